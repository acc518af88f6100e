#pragma once

// Hyperparameter heuristics: c-bar scaled response, the beta(eta) = a/(1+b eta)
// law, grid search over (eta, beta), and the b-versus-spectral-radius regression.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "localspin/error.hpp"
#include "localspin/solver.hpp"

namespace localspin {

struct GridPoint {
  double eta = 0.0;
  double beta = 0.0;
  double median_energy = 0.0;
};

struct TuneResult {
  double eta_star = 0.0;
  double beta_star = 0.0;
  double median_energy = 0.0;
  std::vector<GridPoint> grid_evaluations;  // eta-major, grid order
};

struct LocusPoint {
  double eta = 0.0;
  double beta_opt = 0.0;
  double median_energy = 0.0;
};

struct BetaEtaFit {
  double a = 1.0;
  double b = 1.0;
  double r_squared = 0.0;
  std::vector<LocusPoint> locus;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// log-spaced grid of `count` points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (count == 0 || !(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("bad grid bounds");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) g[k] = lo * std::exp(step * static_cast<double>(k));
  g.back() = hi;
  return g;
}

inline std::vector<double> default_eta_grid() { return {0.25, 0.5, 1.0, 2.0, 4.0}; }
inline std::vector<double> default_beta_grid() { return log_grid(0.05, 2.0, 12); }

/// Spectral abscissa used by the b regression: ||c-bar J|| / 2.
inline double normalized_spectral_radius(const InstanceStats& s) {
  return s.spectral_radius_estimate * s.cbar / 2.0;
}

/// b = slope x + intercept, floored at 0.
inline double predict_b(double normalized_spectral_radius, const LinearFit& regression) {
  return std::max(0.0, regression.slope * normalized_spectral_radius + regression.intercept);
}

/// eta = 1 and beta = 1/(1 + b). Without a fitted regression, b = c-bar ||J||,
/// the value at which the linearized update around v = 0 has unit gain.
inline Hyperparams default_hyperparams(const InstanceStats& s,
                                       const std::optional<LinearFit>& regression = std::nullopt) {
  Hyperparams hp;
  hp.eta = 1.0;
  const double b = regression ? predict_b(normalized_spectral_radius(s), *regression)
                              : s.spectral_radius_estimate * s.cbar;
  hp.beta = 1.0 / (1.0 + b * hp.eta);
  return hp;
}

inline Hyperparams default_hyperparams(const Instance& inst,
                                       const std::optional<LinearFit>& regression = std::nullopt) {
  return default_hyperparams(stats(inst), regression);
}

/// Median energy of `runs_per_point` restarts at every (eta, beta) pair.
/// Every grid point reuses the same restart seeds (common random numbers).
/// The winner is the smallest median energy; ties go to the smallest eta, then
/// the smallest beta.
inline TuneResult grid_search(const Problem& problem, std::span<const double> etas,
                              std::span<const double> betas, std::size_t runs_per_point,
                              std::uint64_t master_seed, const Hyperparams& base = {},
                              std::size_t threads = 1) {
  if (etas.empty() || betas.empty()) throw InvalidArgument("grid_search needs nonempty grids");
  if (runs_per_point == 0) throw InvalidArgument("runs_per_point must be at least 1");
  const std::size_t points = etas.size() * betas.size();
  const std::size_t jobs = points * runs_per_point;
  std::vector<double> energies(jobs);
  parallel_for(jobs, threads, [&](std::size_t job) {
    const std::size_t point = job / runs_per_point;
    const std::size_t k = job % runs_per_point;
    Hyperparams hp = base;
    hp.eta = etas[point / betas.size()];
    hp.beta = betas[point % betas.size()];
    energies[job] = run(problem, hp, restart_seed(master_seed, k)).energy;
  });
  TuneResult out;
  out.grid_evaluations.reserve(points);
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<double> e(energies.begin() + static_cast<std::ptrdiff_t>(p * runs_per_point),
                          energies.begin() + static_cast<std::ptrdiff_t>((p + 1) * runs_per_point));
    out.grid_evaluations.push_back(
        {etas[p / betas.size()], betas[p % betas.size()], median(std::move(e))});
  }
  const GridPoint* best = &out.grid_evaluations.front();
  for (const auto& g : out.grid_evaluations) {
    if (std::tie(g.median_energy, g.eta, g.beta) <
        std::tie(best->median_energy, best->eta, best->beta)) {
      best = &g;
    }
  }
  out.eta_star = best->eta;
  out.beta_star = best->beta;
  out.median_energy = best->median_energy;
  return out;
}

/// Re-tunes beta around hp.beta (multiplied by each factor) at fixed eta.
inline Hyperparams refine_beta(const Problem& problem, const Hyperparams& hp,
                               std::span<const double> factors, std::size_t runs_per_point,
                               std::uint64_t master_seed, std::size_t threads = 1) {
  std::vector<double> betas;
  for (double f : factors) betas.push_back(hp.beta * f);
  std::sort(betas.begin(), betas.end());
  const double eta[] = {hp.eta};
  const auto t = grid_search(problem, eta, betas, runs_per_point, master_seed, hp, threads);
  Hyperparams out = hp;
  out.beta = t.beta_star;
  return out;
}

/// Per-eta optimal beta. Among betas tied on median energy the centre of the
/// tied run is taken, so flat optima do not drag the locus to the grid edge.
inline std::vector<LocusPoint> extract_locus(const TuneResult& t) {
  std::map<double, std::vector<GridPoint>> by_eta;
  for (const auto& g : t.grid_evaluations) by_eta[g.eta].push_back(g);
  std::vector<LocusPoint> locus;
  for (auto& [eta, points] : by_eta) {
    std::sort(points.begin(), points.end(),
              [](const GridPoint& a, const GridPoint& b) { return a.beta < b.beta; });
    double best = points.front().median_energy;
    for (const auto& p : points) best = std::min(best, p.median_energy);
    std::vector<double> tied;
    for (const auto& p : points) {
      if (p.median_energy == best) tied.push_back(p.beta);
    }
    // geometric centre, the grid being log-spaced
    const double beta = std::sqrt(tied.front() * tied.back());
    locus.push_back({eta, beta, best});
  }
  return locus;
}

namespace detail {

inline double r_squared(std::span<const double> y, std::span<const double> fitted) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    ss_res += (y[k] - fitted[k]) * (y[k] - fitted[k]);
    ss_tot += (y[k] - mean) * (y[k] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

}  // namespace detail

/// Least-squares fit of beta = a / (1 + b eta) by Levenberg-Marquardt from
/// (a, b) = (1, 1).
inline BetaEtaFit fit_beta_eta(std::span<const LocusPoint> locus) {
  if (locus.size() < 3) throw InvalidArgument("beta(eta) fit needs at least 3 locus points");
  {
    std::vector<double> etas;
    for (const auto& p : locus) etas.push_back(p.eta);
    std::sort(etas.begin(), etas.end());
    if (std::adjacent_find(etas.begin(), etas.end()) != etas.end()) {
      throw InvalidArgument("beta(eta) fit needs distinct eta values");
    }
  }
  auto residuals = [&](double a, double b, std::vector<double>& r) {
    double ss = 0.0;
    for (std::size_t k = 0; k < locus.size(); ++k) {
      r[k] = locus[k].beta_opt - a / (1.0 + b * locus[k].eta);
      ss += r[k] * r[k];
    }
    return ss;
  };
  const std::size_t m = locus.size();
  std::vector<double> r(m), trial(m);
  double a = 1.0, b = 1.0;
  double cost = residuals(a, b, r);
  double lambda = 1e-3;
  for (int iter = 0; iter < 500; ++iter) {
    // J^T J and J^T r for the model f = a / (1 + b eta).
    double jtj00 = 0, jtj01 = 0, jtj11 = 0, g0 = 0, g1 = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const double d = 1.0 + b * locus[k].eta;
      const double da = 1.0 / d;
      const double db = -a * locus[k].eta / (d * d);
      jtj00 += da * da;
      jtj01 += da * db;
      jtj11 += db * db;
      g0 += da * r[k];
      g1 += db * r[k];
    }
    bool improved = false, stalled = false;
    while (lambda < 1e12) {
      const double h00 = jtj00 * (1.0 + lambda), h11 = jtj11 * (1.0 + lambda);
      const double det = h00 * h11 - jtj01 * jtj01;
      if (det <= 0.0 || !std::isfinite(det)) {
        lambda *= 10.0;
        continue;
      }
      const double step_a = (h11 * g0 - jtj01 * g1) / det;
      const double step_b = (h00 * g1 - jtj01 * g0) / det;
      const double na = a + step_a, nb = b + step_b;
      bool valid = true;
      for (const auto& p : locus) {
        if (1.0 + nb * p.eta <= 0.0) valid = false;
      }
      const double new_cost = valid ? residuals(na, nb, trial) : INFINITY;
      if (new_cost < cost) {
        const double rel = (cost - new_cost) / std::max(cost, 1e-300);
        a = na;
        b = nb;
        cost = new_cost;
        r = trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        stalled = rel < 1e-15 || (std::abs(step_a) < 1e-14 && std::abs(step_b) < 1e-14);
        break;
      }
      lambda *= 10.0;
    }
    if (!improved || stalled || cost == 0.0) break;
  }
  BetaEtaFit fit;
  fit.a = a;
  fit.b = b;
  std::vector<double> y, f;
  for (const auto& p : locus) {
    y.push_back(p.beta_opt);
    f.push_back(a / (1.0 + b * p.eta));
  }
  fit.r_squared = detail::r_squared(y, f);
  fit.locus.assign(locus.begin(), locus.end());
  return fit;
}

/// Ordinary least squares y = slope x + intercept over (x, y) pairs.
inline LinearFit fit_b_vs_spectral(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw InvalidArgument("linear fit needs at least 2 points");
  double mx = 0, my = 0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw InvalidArgument("linear fit needs distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  std::vector<double> y, f;
  for (const auto& [px, py] : points) {
    y.push_back(py);
    f.push_back(fit.slope * px + fit.intercept);
  }
  fit.r_squared = detail::r_squared(y, f);
  return fit;
}

inline void to_json(nlohmann::json& j, const GridPoint& g) {
  j = {{"eta", g.eta}, {"beta", g.beta}, {"median_energy", g.median_energy}};
}
inline void to_json(nlohmann::json& j, const LocusPoint& p) {
  j = {{"eta", p.eta}, {"beta_opt", p.beta_opt}, {"median_energy", p.median_energy}};
}
inline void to_json(nlohmann::json& j, const TuneResult& t) {
  j = {{"eta_star", t.eta_star},
       {"beta_star", t.beta_star},
       {"median_energy", t.median_energy},
       {"grid_evaluations", t.grid_evaluations}};
}
inline void to_json(nlohmann::json& j, const BetaEtaFit& f) {
  j = {{"a", f.a}, {"b", f.b}, {"r_squared", f.r_squared}, {"locus", f.locus}};
}
inline void to_json(nlohmann::json& j, const LinearFit& f) {
  j = {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}
inline void from_json(const nlohmann::json& j, LinearFit& f) {
  f.slope = j.at("slope").get<double>();
  f.intercept = j.at("intercept").get<double>();
  f.r_squared = j.value("r_squared", 0.0);
}

/// CSV "eta,beta_opt,median_energy" with header.
inline std::string locus_csv(std::span<const LocusPoint> locus) {
  std::string out = "eta,beta_opt,median_energy\n";
  for (const auto& p : locus) {
    out += detail::format_weight(p.eta) + ',' + detail::format_weight(p.beta_opt) + ',' +
           detail::format_weight(p.median_energy) + '\n';
  }
  return out;
}

}  // namespace localspin
