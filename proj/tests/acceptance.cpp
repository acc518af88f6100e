// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "localspin/localspin.hpp"

using namespace localspin;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  failures += !o.pass;
  std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::vector<double> random_soft(std::size_t n, Rng& rng, double bound = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return v;
}

std::vector<int> random_hard(std::size_t n, Rng& rng) {
  std::vector<int> s(n);
  for (auto& x : s) x = rng.bernoulli(0.5) ? 1 : -1;
  return s;
}

std::vector<FamilySpec> all_families() {
  return {FamilySpec::g05(20),      FamilySpec::pm1s(30),  FamilySpec::pm1d(20),
          FamilySpec::w(20, 0.5),   FamilySpec::pw(20, 0.9), FamilySpec::ising(20, 2.5),
          FamilySpec::torus(2, 5)};
}

Outcome oracle_agreement() {
  const double factors[] = {0.5, 0.7, 1.0, 1.4, 2.0};
  int hits = 0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    Problem p(generate(FamilySpec::g05(16), 1000 + k));
    const auto hp = refine_beta(p, default_hyperparams(p.stats), factors, 30, k);
    const auto runs = run_restarts(p, hp, derive_seed(k, 7), 100);
    hits += cuts_equal(best_of(runs).cut, brute_force(p.instance).max_cut);
  }
  return {hits >= 45, format("%d/50 optima (need >= 45)", hits)};
}

Outcome gradient_check() {
  Rng rng(5);
  const auto families = all_families();
  const double eps = 1e-5;
  double worst = 0.0;
  for (std::size_t k = 0; k < 50; ++k) {
    Problem p(generate(families[k % families.size()], k));
    auto v = random_soft(p.size(), rng);
    const auto f = force(p.J, v);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double x = v[i];
      v[i] = x + eps;
      const double up = energy(p.J, std::span<const double>(v));
      v[i] = x - eps;
      const double down = energy(p.J, std::span<const double>(v));
      v[i] = x;
      worst = std::max(worst, std::abs(f[i] + (up - down) / (2 * eps)));
    }
  }
  return {worst <= 1e-6, format("max |F + dH/dv| = %.3g (need <= 1e-6)", worst)};
}

Outcome energy_cut_identity() {
  Rng rng(8);
  const auto families = all_families();
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto inst = generate(families[k % families.size()], k / 7);
    const CouplingMatrix J(inst);
    const auto s = random_hard(inst.n, rng);
    const double h = maxcut_hamiltonian(inst, s);
    const double e = energy(J, std::span<const int>(s)) - 0.5 * inst.total_weight();
    const double scale = std::max(1.0, std::abs(h));
    worst = std::max(worst, std::abs(h - e) / scale);
    worst = std::max(worst, std::abs(h + cut_value(inst, s)) / scale);
  }
  return {worst <= 1e-9, format("max relative mismatch %.3g (need <= 1e-9)", worst)};
}

Outcome convergence() {
  Problem p(generate(FamilySpec::w(100, 0.5), 3));
  Hyperparams hp;
  hp.eta = 1.0;
  hp.beta = 0.5;
  int converged = 0, monotone = 0;
  for (std::size_t k = 0; k < 30; ++k) {
    const auto r = run(p, hp, restart_seed(3, k));
    converged += r.converged;
    const auto& t = r.displacement_trace;
    bool ok = t.size() >= 20;
    for (std::size_t i = t.size() < 20 ? t.size() : t.size() - 19; ok && i < t.size(); ++i) {
      ok = t[i] <= t[i - 1] + 1e-12;
    }
    monotone += ok;
  }
  return {converged >= 27 && monotone == 30,
          format("%d/30 converged (need >= 27), %d/30 with nonincreasing tail", converged,
                 monotone)};
}

Outcome beta_eta_law() {
  Problem p(generate(FamilySpec::torus(2, 6), 7));
  const auto t = grid_search(p, log_grid(0.25, 4.0, 9), log_grid(0.05, 2.0, 40), 60, 7);
  const auto fit = fit_beta_eta(extract_locus(t));
  return {fit.r_squared >= 0.9 && fit.a >= 0.5 && fit.a <= 1.5,
          format("R^2 = %.4f, a = %.4f, b = %.4f (need R^2 >= 0.9, a in [0.5, 1.5])",
                 fit.r_squared, fit.a, fit.b)};
}

Outcome lt_beats_gd() {
  const char* tags[] = {"g05_60",   "g05_80",      "g05_100",    "pm1s_80",     "pm1s_100",
                        "pm1d_80",  "pm1d_100",    "w01_100",    "w05_100",     "w09_100",
                        "pw01_100", "pw05_100",    "pw09_100",   "ising2.5_100", "ising3_100",
                        "ising2.5_80", "t2g8",     "t2g9",       "t2g10",       "t3g4"};
  // Both algorithms get the same tuning: a 5 x 48 grid, then +-20% beta
  // refinement at the winning eta, p = 1000 rounds.
  const auto etas = default_eta_grid();
  const auto betas = log_grid(0.05, 2.0, 48);
  const double factors[] = {0.8, 0.85, 0.9, 0.95, 1.0, 1.05, 1.1, 1.15, 1.2};
  int ge = 0, gt = 0;
  std::string worst;
  for (const char* tag : tags) {
    Problem p(generate(parse_family_tag(tag), 17));
    double med[2];
    for (int a = 0; a < 2; ++a) {
      Hyperparams base;
      base.max_rounds = 1000;
      base.variant = a == 0 ? Variant::lt : Variant::gd;
      const auto t = grid_search(p, etas, betas, 30, 11, base);
      Hyperparams hp = base;
      hp.eta = t.eta_star;
      hp.beta = t.beta_star;
      hp = refine_beta(p, hp, factors, 30, 11);
      std::vector<double> cuts;
      for (const auto& r : run_restarts(p, hp, 99, 30)) cuts.push_back(r.cut);
      med[a] = median(std::move(cuts));
    }
    ge += med[0] >= med[1];
    gt += med[0] > med[1];
    if (med[0] < med[1]) worst += format(" %s(%g<%g)", tag, med[0], med[1]);
  }
  return {ge >= 16 && gt >= 10,
          format("LT >= GD on %d/20 (need >= 16), LT > GD on %d/20 (need >= 10);%s", ge, gt,
                 worst.empty() ? " GD never ahead" : (" GD ahead on" + worst).c_str())};
}

Outcome imaginary_time() {
  Rng rng(21);
  double worst_ratio = INFINITY;
  for (int k = 0; k < 20; ++k) {
    const auto families = all_families();
    Problem p(generate(families[k % families.size()], k));
    const auto v = random_soft(p.size(), rng, 0.9);
    std::vector<double> jv(p.size());
    p.J.multiply(v, jv);
    auto error = [&](double dt) {
      const auto next = imag_step(v, p.J, dt);
      double e = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double ode = -2.0 * (1 - v[i] * v[i]) * jv[i];
        e = std::max(e, std::abs((next[i] - v[i]) / dt - ode));
      }
      return e;
    };
    const double dt = 1e-3 * p.stats.cbar;
    worst_ratio = std::min(worst_ratio, error(dt) / error(dt / 2));
  }
  return {worst_ratio >= 1.9,
          format("smallest error ratio on halving dtau %.4f (need >= 1.9)", worst_ratio)};
}

Outcome scale_covariance() {
  int mismatches = 0, checks = 0;
  for (const auto& family : all_families()) {
    const auto inst = generate(family, 4);
    Problem p(inst);
    for (double lambda : {0.5, 3.0}) {
      Problem q(scaled(inst, lambda));
      for (Variant v : {Variant::lt, Variant::gd}) {
        Hyperparams hp = default_hyperparams(p.stats);
        hp.variant = v;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
          const auto a = run(p, hp, seed), b = run(q, hp, seed);
          mismatches += a.spins != b.spins || a.rounds_used != b.rounds_used;
          ++checks;
        }
      }
    }
  }
  return {mismatches == 0, format("%d/%d runs differ after rescaling (need 0)", mismatches, checks)};
}

Outcome entropy_correctness() {
  const std::vector<std::vector<double>> joint{{0.4, 0.1}, {0.1, 0.4}};
  const double h2 = -0.2 * std::log2(0.2) - 0.8 * std::log2(0.8);
  const double table = conditional_entropy_bits(joint);
  std::vector<std::optional<double>> runtime;
  std::vector<double> predictor;
  for (int k = 0; k < 50; ++k) {
    predictor.push_back(k % 5);
    runtime.push_back(k % 5 == 4 ? std::nullopt : std::optional(0.05 * std::pow(10.0, k % 5)));
  }
  const double deterministic = conditional_entropy(runtime, predictor);
  return {std::abs(table - h2) <= 1e-9 && deterministic == 0.0,
          format("2x2 table %.12f vs %.12f, deterministic map %.3g", table, h2, deterministic)};
}

Outcome bench_determinism() {
  auto bench = [](const std::string& threads, const std::string& format) {
    std::ostringstream out, err;
    const int code = cli::run_cli(
        {"bench", "--seed", "2024", "--no-timing", "--threads", threads, "--format", format}, out,
        err);
    if (code != 0) throw Error("bench exited with " + std::to_string(code) + ": " + err.str());
    return out.str();
  };
  const auto a = bench("1", "json");
  const auto b = bench("1", "json");
  const auto c = bench("4", "json");
  const auto d = bench("1", "csv");
  const auto e = bench("3", "csv");
  const bool ok = a == b && a == c && d == e;
  return {ok, format("json %s, csv %s across --threads 1/3/4 (%zu bytes)",
                     a == b && a == c ? "identical" : "DIFFERS", d == e ? "identical" : "DIFFERS",
                     a.size())};
}

}  // namespace

int main(int argc, char** argv) {
  using Check = std::pair<const char*, Outcome (*)()>;
  const Check checks[] = {{"oracle agreement", oracle_agreement},
                          {"gradient check", gradient_check},
                          {"energy/cut identity", energy_cut_identity},
                          {"convergence", convergence},
                          {"beta(eta) law", beta_eta_law},
                          {"LT vs GD", lt_beats_gd},
                          {"imaginary-time slope", imaginary_time},
                          {"scale covariance", scale_covariance},
                          {"conditional entropy", entropy_correctness},
                          {"bench determinism", bench_determinism}};
  // No argument: every criterion. Otherwise only the listed ids.
  std::vector<int> ids;
  for (int k = 1; k < argc; ++k) ids.push_back(std::atoi(argv[k]));
  if (ids.empty()) {
    for (int id = 1; id <= 10; ++id) ids.push_back(id);
  }
  for (int id : ids) {
    if (id < 1 || id > 10) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    report(id, checks[id - 1].first, checks[id - 1].second);
  }
  std::printf("%d of %zu criteria failed\n", failures, ids.size());
  return failures == 0 ? 0 : 1;
}
