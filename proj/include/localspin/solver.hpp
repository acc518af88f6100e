#pragma once

// Local-spin dynamics on the relaxed hypercube [-1,1]^n: the tanh update (LT),
// the hard-cutoff gradient-descent variant (GD), and mean-field imaginary-time
// evolution (IMAG), plus rounding and restarts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "localspin/error.hpp"
#include "localspin/instance.hpp"
#include "localspin/parallel.hpp"
#include "localspin/rng.hpp"
#include "localspin/stats.hpp"

namespace localspin {

enum class Variant { lt, gd, imag };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::lt: return "lt";
    case Variant::gd: return "gd";
    case Variant::imag: return "imag";
  }
  return "lt";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "lt") return Variant::lt;
  if (s == "gd") return Variant::gd;
  if (s == "imag") return Variant::imag;
  throw InvalidArgument("unknown algorithm '" + std::string(s) + "' (expected lt, gd or imag)");
}

struct Hyperparams {
  double eta = 1.0;              // response in units of c-bar
  double beta = 0.5;             // inverse temperature
  std::size_t max_rounds = 10000;
  double threshold = 1e-6;       // l-infinity displacement that ends a run
  Variant variant = Variant::lt;
  double dtau = 0.05;            // imaginary-time step (IMAG only)

  void validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
    if (max_rounds == 0) throw InvalidArgument("max_rounds must be positive");
    if (!(threshold >= 0.0)) throw InvalidArgument("threshold must be nonnegative");
    if (variant == Variant::imag && (!(dtau > 0.0) || !std::isfinite(dtau))) {
      throw InvalidArgument("dtau must be positive");
    }
  }
};

struct RunResult {
  std::vector<int> spins;                 // +1 / -1
  double cut = 0.0;
  double energy = 0.0;                    // 1/2 s^T J s at the rounded spins
  std::size_t rounds_used = 0;
  bool converged = false;
  std::vector<double> displacement_trace; // ||v_{t+1} - v_t||_inf per round
  double wall_time = 0.0;                 // seconds
};

/// An instance prepared for repeated runs: coupling matrix and the scale c-bar.
struct Problem {
  Instance instance;
  CouplingMatrix J;
  InstanceStats stats;

  explicit Problem(Instance inst)
      : instance(std::move(inst)), J(instance), stats(localspin::stats(instance, J)) {}

  std::size_t size() const noexcept { return instance.n; }
  double response(const Hyperparams& hp) const { return hp.eta * stats.cbar; }
};

namespace detail {
inline void check_length(std::size_t got, std::size_t want) {
  if (got != want) {
    throw InvalidArgument("spin vector has length " + std::to_string(got) + ", expected " +
                          std::to_string(want));
  }
}
}  // namespace detail

/// Weight of edges crossing the partition given by hard spins.
inline double cut_value(const Instance& inst, std::span<const int> s) {
  detail::check_length(s.size(), inst.n);
  double cut = 0.0;
  for (const auto& e : inst.edges) {
    if (s[e.i] != s[e.j]) cut += e.w;
  }
  return cut;
}

/// H(v) = 1/2 v^T J v, for soft or hard spins.
inline double energy(const CouplingMatrix& J, std::span<const double> v) {
  detail::check_length(v.size(), J.size());
  double e = 0.0;
  for (std::size_t i = 0; i < J.size(); ++i) {
    auto cols = J.row_columns(i);
    auto vals = J.row_values(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) acc += vals[k] * v[cols[k]];
    e += v[i] * acc;
  }
  return 0.5 * e;
}

inline double energy(const CouplingMatrix& J, std::span<const int> s) {
  std::vector<double> v(s.begin(), s.end());
  return energy(J, std::span<const double>(v));
}

/// MAXCUT Hamiltonian 1/4 sum_{i,j} w_ij (s_i s_j - 1) over ordered pairs;
/// equals minus the cut.
inline double maxcut_hamiltonian(const Instance& inst, std::span<const int> s) {
  detail::check_length(s.size(), inst.n);
  double h = 0.0;
  for (const auto& e : inst.edges) h += 0.5 * e.w * (s[e.i] * s[e.j] - 1);
  return h;
}

/// F = -dH/dv = -J v.
inline std::vector<double> force(const CouplingMatrix& J, std::span<const double> v) {
  detail::check_length(v.size(), J.size());
  std::vector<double> f(v.size());
  J.multiply(v, f);
  for (double& x : f) x = -x;
  return f;
}

/// sgn(x) * min(1, |x|).
inline double cutoff(double x) { return std::clamp(x, -1.0, 1.0); }

inline constexpr double kImagClamp = 1e-12;

namespace detail {

// One synchronous round written into `out`; `scratch` receives J v.
inline void step_into(const CouplingMatrix& J, Variant variant, double c, double beta,
                      double dtau, std::span<const double> v, std::span<double> scratch,
                      std::span<double> out) {
  J.multiply(v, scratch);
  const std::size_t n = v.size();
  switch (variant) {
    case Variant::lt:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(beta * (v[i] - c * scratch[i]));
      break;
    case Variant::gd:
      for (std::size_t i = 0; i < n; ++i) out[i] = cutoff(beta * (v[i] - c * scratch[i]));
      break;
    case Variant::imag: {
      constexpr double hi = 1.0 - kImagClamp;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(v[i]) <= 1.0)) {
          throw InvalidArgument("imaginary-time step needs |v_i| < 1, got " +
                                std::to_string(v[i]));
        }
        const double vi = std::clamp(v[i], -hi, hi);
        out[i] = std::clamp(std::tanh(-2.0 * dtau * scratch[i] + std::atanh(vi)), -hi, hi);
      }
      break;
    }
  }
}

}  // namespace detail

/// v'_i = tanh(beta (v_i + c F_i)), all spins from the same snapshot.
inline std::vector<double> lt_step(std::span<const double> v, const CouplingMatrix& J, double c,
                                   double beta) {
  detail::check_length(v.size(), J.size());
  std::vector<double> scratch(v.size()), out(v.size());
  detail::step_into(J, Variant::lt, c, beta, 0.0, v, scratch, out);
  return out;
}

/// v'_i = cutoff(beta (v_i + c F_i)).
inline std::vector<double> gd_step(std::span<const double> v, const CouplingMatrix& J, double c,
                                   double beta) {
  detail::check_length(v.size(), J.size());
  std::vector<double> scratch(v.size()), out(v.size());
  detail::step_into(J, Variant::gd, c, beta, 0.0, v, scratch, out);
  return out;
}

/// v'_i = tanh(2 dtau F_i + artanh v_i). Inputs with |v_i| > 1 are rejected;
/// inputs and outputs are clamped to [-1+1e-12, 1-1e-12].
inline std::vector<double> imag_step(std::span<const double> v, const CouplingMatrix& J,
                                     double dtau) {
  detail::check_length(v.size(), J.size());
  std::vector<double> scratch(v.size()), out(v.size());
  detail::step_into(J, Variant::imag, 0.0, 0.0, dtau, v, scratch, out);
  return out;
}

/// Sign rounding; exact zeros go to +1.
inline std::vector<int> round_spins(std::span<const double> v) {
  std::vector<int> s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] < 0.0 ? -1 : 1;
  return s;
}

/// Uniform[-1,1] initial state drawn from `seed`.
inline std::vector<double> random_state(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

/// Iterates the chosen update from `initial` until the l-infinity displacement
/// drops below hp.threshold or hp.max_rounds rounds have run, then rounds.
inline RunResult run_from(const Problem& problem, const Hyperparams& hp,
                          std::vector<double> initial) {
  hp.validate();
  detail::check_length(initial.size(), problem.size());
  const auto start = std::chrono::steady_clock::now();
  const double c = problem.response(hp);
  std::vector<double> v = std::move(initial), next(v.size()), scratch(v.size());
  RunResult r;
  r.displacement_trace.reserve(std::min<std::size_t>(hp.max_rounds, 1024));
  while (r.rounds_used < hp.max_rounds) {
    detail::step_into(problem.J, hp.variant, c, hp.beta, hp.dtau, v, scratch, next);
    double disp = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) disp = std::max(disp, std::abs(next[i] - v[i]));
    std::swap(v, next);
    ++r.rounds_used;
    r.displacement_trace.push_back(disp);
    if (disp < hp.threshold) {
      r.converged = true;
      break;
    }
  }
  r.spins = round_spins(v);
  r.cut = cut_value(problem.instance, r.spins);
  r.energy = energy(problem.J, std::span<const int>(r.spins));
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline RunResult run(const Problem& problem, const Hyperparams& hp, std::uint64_t seed) {
  return run_from(problem, hp, random_state(problem.size(), seed));
}

/// Convenience overload; prepares the problem (c-bar, coupling matrix) first.
inline RunResult run(const Instance& inst, const Hyperparams& hp, std::uint64_t seed) {
  return run(Problem(inst), hp, seed);
}

/// Seed of restart k under master_seed.
inline std::uint64_t restart_seed(std::uint64_t master_seed, std::size_t k) {
  return derive_seed(master_seed, k);
}

/// M independent restarts; result k depends only on (master_seed, k).
inline std::vector<RunResult> run_restarts(const Problem& problem, const Hyperparams& hp,
                                           std::uint64_t master_seed, std::size_t restarts,
                                           std::size_t threads = 1) {
  if (restarts == 0) throw InvalidArgument("restarts must be at least 1");
  hp.validate();
  std::vector<RunResult> out(restarts);
  parallel_for(restarts, threads, [&](std::size_t k) {
    out[k] = run(problem, hp, restart_seed(master_seed, k));
  });
  return out;
}

inline const RunResult& best_of(std::span<const RunResult> runs) {
  if (runs.empty()) throw InvalidArgument("no runs");
  const RunResult* best = &runs.front();
  for (const auto& r : runs) {
    if (r.cut > best->cut) best = &r;
  }
  return *best;
}

/// Median; for an even count, the mean of the two middle values.
inline double median(std::vector<double> xs) {
  if (xs.empty()) throw InvalidArgument("median of an empty set");
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double upper = xs[mid];
  if (xs.size() % 2 == 1) return upper;
  const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline double median_energy_of(std::span<const RunResult> runs) {
  std::vector<double> e;
  e.reserve(runs.size());
  for (const auto& r : runs) e.push_back(r.energy);
  return median(std::move(e));
}

inline void to_json(nlohmann::json& j, const Hyperparams& hp) {
  j = {{"eta", hp.eta},
       {"beta", hp.beta},
       {"max_rounds", hp.max_rounds},
       {"threshold", hp.threshold},
       {"algo", std::string(to_string(hp.variant))}};
  if (hp.variant == Variant::imag) j["dtau"] = hp.dtau;
}

inline void from_json(const nlohmann::json& j, Hyperparams& hp) {
  hp = Hyperparams{};
  if (j.contains("eta")) hp.eta = j["eta"].get<double>();
  if (j.contains("beta")) hp.beta = j["beta"].get<double>();
  if (j.contains("max_rounds")) hp.max_rounds = j["max_rounds"].get<std::size_t>();
  if (j.contains("threshold")) hp.threshold = j["threshold"].get<double>();
  if (j.contains("algo")) hp.variant = parse_variant(j["algo"].get<std::string>());
  if (j.contains("dtau")) hp.dtau = j["dtau"].get<double>();
}

struct RunJsonOptions {
  bool trace = false;
  bool timing = true;
};

inline nlohmann::json run_to_json(const RunResult& r, RunJsonOptions opts = {}) {
  nlohmann::json j = {{"spins", r.spins},
                      {"cut", r.cut},
                      {"energy", r.energy},
                      {"rounds", r.rounds_used},
                      {"converged", r.converged}};
  if (opts.timing) j["wall_time_s"] = r.wall_time;
  if (opts.trace) j["trace"] = r.displacement_trace;
  return j;
}

inline void to_json(nlohmann::json& j, const RunResult& r) { j = run_to_json(r, {true, true}); }

inline void from_json(const nlohmann::json& j, RunResult& r) {
  r = RunResult{};
  r.spins = j.at("spins").get<std::vector<int>>();
  r.cut = j.at("cut").get<double>();
  r.energy = j.at("energy").get<double>();
  r.rounds_used = j.at("rounds").get<std::size_t>();
  r.converged = j.at("converged").get<bool>();
  if (j.contains("wall_time_s")) r.wall_time = j["wall_time_s"].get<double>();
  if (j.contains("trace")) r.displacement_trace = j["trace"].get<std::vector<double>>();
}

}  // namespace localspin
