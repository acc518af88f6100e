#pragma once

// Benchmark harness: median-energy and time-to-solution protocols, and the
// conditional-entropy analysis of how well instance statistics predict runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "localspin/error.hpp"
#include "localspin/generators.hpp"
#include "localspin/oracle.hpp"
#include "localspin/parallel.hpp"
#include "localspin/solver.hpp"
#include "localspin/tuner.hpp"

namespace localspin {

/// Binning for the conditional-entropy analysis: `runtime_bins` logarithmic
/// intervals over [runtime_lo, runtime_hi] plus one bin for timeouts, and
/// `predictor_bins` equal-width intervals over the observed predictor range.
struct EntropyBinning {
  double runtime_lo = 0.01;
  double runtime_hi = 1000.0;
  std::size_t runtime_bins = 20;
  std::size_t predictor_bins = 20;

  std::size_t runtime_bin_count() const { return runtime_bins + 1; }
};

struct BenchConfig {
  std::size_t restarts_for_median = 30;
  double timeout = 1000.0;         // seconds per time-to-solution trial
  double tuning_budget = 20.0;     // seconds, not counted as runtime
  std::size_t tts_trials = 10;
  std::optional<std::size_t> max_restarts = 10000;  // per-trial restart cap (TIMEOUT when hit)
  std::size_t tuning_runs = 10;    // restarts per tuning grid point
  std::size_t oracle_max_n = 24;   // no time-to-solution above this size
  std::size_t max_rounds = 10000;
  double threshold = 1e-6;
  Variant variant = Variant::lt;
  EntropyBinning binning;

  void validate() const {
    if (restarts_for_median == 0 || tts_trials == 0 || tuning_runs == 0) {
      throw InvalidArgument("bench counts must be positive");
    }
    if (!(timeout > 0.0) || !(tuning_budget > 0.0)) {
      throw InvalidArgument("bench time budgets must be positive");
    }
    if (binning.runtime_bins == 0 || binning.predictor_bins == 0 ||
        !(binning.runtime_lo > 0.0) || !(binning.runtime_hi > binning.runtime_lo)) {
      throw InvalidArgument("bad entropy binning");
    }
  }
};

/// Median energy of M seeded restarts.
inline double median_energy(const Problem& problem, const Hyperparams& hp, std::size_t restarts,
                            std::uint64_t master_seed, std::size_t threads = 1) {
  const auto runs = run_restarts(problem, hp, master_seed, restarts, threads);
  return median_energy_of(runs);
}

// ---------------------------------------------------------------------------
// Time to solution

struct TtsTrial {
  std::optional<double> seconds;               // nullopt: TIMEOUT
  std::optional<std::size_t> restarts_to_hit;  // nullopt: TIMEOUT
};

struct TimeToSolution {
  std::optional<double> seconds;        // median over trials; nullopt: TIMEOUT
  std::optional<double> restarts;       // median restarts to first hit; nullopt: TIMEOUT
  std::vector<TtsTrial> trials;

  bool timed_out() const { return !seconds.has_value(); }
};

inline bool reaches(double cut, double optimum) {
  return cut >= optimum - kCutRelTol * std::max(1.0, std::abs(optimum));
}

/// One trial: restarts with seeds derive_seed(trial_seed, r) until a run
/// reaches `optimum`, the wall-clock timeout passes, or max_restarts is spent.
inline TtsTrial time_to_solution_trial(const Problem& problem, const Hyperparams& hp,
                                       double optimum, double timeout, std::uint64_t trial_seed,
                                       std::optional<std::size_t> max_restarts = std::nullopt) {
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t r = 0; !max_restarts || r < *max_restarts; ++r) {
    const auto result = run(problem, hp, restart_seed(trial_seed, r));
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (reaches(result.cut, optimum)) {
      if (elapsed > timeout) return {};
      return {elapsed, r + 1};
    }
    if (elapsed > timeout) return {};
  }
  return {};
}

/// Median with nullopt treated as +infinity; an infinite median is nullopt.
inline std::optional<double> median_with_timeouts(std::span<const std::optional<double>> xs) {
  std::vector<double> v;
  for (const auto& x : xs) v.push_back(x ? *x : std::numeric_limits<double>::infinity());
  const double m = median(std::move(v));
  if (std::isinf(m)) return std::nullopt;
  return m;
}

inline TimeToSolution aggregate_trials(std::vector<TtsTrial> trials) {
  TimeToSolution out;
  std::vector<std::optional<double>> secs, restarts;
  for (const auto& t : trials) {
    secs.push_back(t.seconds);
    restarts.push_back(t.restarts_to_hit ? std::optional<double>(static_cast<double>(*t.restarts_to_hit))
                                         : std::nullopt);
  }
  out.seconds = median_with_timeouts(secs);
  out.restarts = median_with_timeouts(restarts);
  out.trials = std::move(trials);
  return out;
}

inline std::uint64_t tts_trial_seed(std::uint64_t master_seed, std::size_t trial) {
  return derive_seed(master_seed ^ 0x7454535F74726961ULL, trial);
}

/// Median time to first reach the known optimum over `trials` sequential trials.
inline TimeToSolution time_to_solution(const Problem& problem, const Hyperparams& hp,
                                       double optimum, double timeout, std::uint64_t master_seed,
                                       std::size_t trials = 10,
                                       std::optional<std::size_t> max_restarts = std::nullopt) {
  if (trials == 0) throw InvalidArgument("time_to_solution needs at least one trial");
  std::vector<TtsTrial> out;
  for (std::size_t t = 0; t < trials; ++t) {
    out.push_back(time_to_solution_trial(problem, hp, optimum, timeout,
                                         tts_trial_seed(master_seed, t), max_restarts));
  }
  return aggregate_trials(std::move(out));
}

// ---------------------------------------------------------------------------
// Conditional entropy

/// Runtime bin: log intervals over [lo, hi]; times below lo land in bin 0,
/// timeouts and times above hi in the extra last bin.
inline std::size_t runtime_bin(std::optional<double> seconds, const EntropyBinning& b) {
  if (!seconds || *seconds > b.runtime_hi) return b.runtime_bins;
  if (*seconds <= b.runtime_lo) return 0;
  const double pos = std::log(*seconds / b.runtime_lo) / std::log(b.runtime_hi / b.runtime_lo);
  return std::min(b.runtime_bins - 1, static_cast<std::size_t>(pos * static_cast<double>(b.runtime_bins)));
}

inline std::size_t predictor_bin(double x, double lo, double hi, std::size_t bins) {
  if (!(hi > lo)) return 0;
  const double pos = (x - lo) / (hi - lo);
  return std::min(bins - 1, static_cast<std::size_t>(pos * static_cast<double>(bins)));
}

/// H(runtime | predictor) in bits from a joint table joint[predictor][runtime]
/// of nonnegative weights (counts or probabilities; normalized here).
inline double conditional_entropy_bits(const std::vector<std::vector<double>>& joint) {
  double total = 0.0;
  for (const auto& row : joint) {
    for (double p : row) {
      if (p < 0.0) throw InvalidArgument("negative joint weight");
      total += p;
    }
  }
  if (total <= 0.0) throw InvalidArgument("empty joint table");
  double h = 0.0;
  for (const auto& row : joint) {
    double marginal = 0.0;
    for (double p : row) marginal += p;
    if (marginal == 0.0) continue;
    for (double p : row) {
      if (p > 0.0) h -= (p / total) * std::log2(p / marginal);
    }
  }
  return std::max(0.0, h);
}

/// Normalized H(runtime | predictor): runtimes and predictor values are binned,
/// and the entropy is divided by log2 of the runtime bin count.
inline double conditional_entropy(std::span<const std::optional<double>> runtime,
                                  std::span<const double> predictor,
                                  const EntropyBinning& binning = {}) {
  if (runtime.size() != predictor.size()) {
    throw InvalidArgument("runtime and predictor samples differ in length");
  }
  if (runtime.empty()) throw InvalidArgument("conditional entropy of an empty sample");
  const auto [lo, hi] = std::minmax_element(predictor.begin(), predictor.end());
  std::vector<std::vector<double>> joint(binning.predictor_bins,
                                         std::vector<double>(binning.runtime_bin_count(), 0.0));
  for (std::size_t k = 0; k < runtime.size(); ++k) {
    joint[predictor_bin(predictor[k], *lo, *hi, binning.predictor_bins)]
         [runtime_bin(runtime[k], binning)] += 1.0;
  }
  return conditional_entropy_bits(joint) /
         std::log2(static_cast<double>(binning.runtime_bin_count()));
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteEntry {
  FamilySpec family;
  std::uint64_t seed = 0;
};

struct Predictors {
  double n = 0, m = 0, m_bar = 0, mu = 0;
};

struct BenchRecord {
  std::string id;
  Predictors predictors;
  Hyperparams hyperparams;
  double median_energy = 0.0;
  double best_cut = 0.0;
  std::optional<double> optimum;
  std::optional<TimeToSolution> tts;
  double tuning_seconds = 0.0;
  bool tuning_truncated = false;
  std::optional<std::string> error;
};

struct EntropyReport {
  std::vector<std::pair<std::string, double>> values;  // predictor -> normalized H
  std::size_t samples = 0;
};

struct BenchReport {
  std::vector<BenchRecord> records;
  EntropyReport entropy;
};

/// Reference normalized entropies for LT on the Biq Mac collection, reported
/// next to ours for a qualitative comparison only.
inline const std::vector<std::pair<std::string, double>>& published_lt_entropy() {
  static const std::vector<std::pair<std::string, double>> values = {
      {"n", 0.69}, {"m", 0.63}, {"m_bar", 0.59}, {"mu", 0.53}};
  return values;
}

/// Default suite: twenty n <= 16 instances across the seven families.
inline std::vector<SuiteEntry> default_suite(std::size_t count = 20, std::uint64_t seed = 1) {
  const std::vector<FamilySpec> families = {
      FamilySpec::g05(16),       FamilySpec::pm1s(16), FamilySpec::pm1d(16),
      FamilySpec::w(16, 0.5),    FamilySpec::pw(16, 0.5), FamilySpec::ising(16, 2.5),
      FamilySpec::torus(2, 4)};
  std::vector<SuiteEntry> suite;
  for (std::size_t k = 0; k < count; ++k) {
    suite.push_back({families[k % families.size()], derive_seed(seed, k)});
  }
  return suite;
}

/// Deterministic local tuning around the analytic default: eta in {0.5, 1, 2},
/// beta = factor / (1 + b eta) for a small set of factors. Stops early (and
/// flags it) if the wall-clock budget runs out.
inline Hyperparams tune_locally(const Problem& problem, const BenchConfig& cfg,
                                std::uint64_t seed, double& seconds, bool& truncated) {
  const auto start = std::chrono::steady_clock::now();
  Hyperparams base = default_hyperparams(problem.stats);
  base.max_rounds = cfg.max_rounds;
  base.threshold = cfg.threshold;
  base.variant = cfg.variant;
  const double b = problem.stats.spectral_radius_estimate * problem.stats.cbar;
  const double etas[] = {0.5, 1.0, 2.0};
  const double factors[] = {0.6, 0.8, 1.0, 1.25, 1.5, 2.0};
  Hyperparams best = base;
  double best_energy = std::numeric_limits<double>::infinity();
  truncated = false;
  for (double eta : etas) {
    for (double f : factors) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (elapsed > cfg.tuning_budget) {
        truncated = true;
        break;
      }
      Hyperparams hp = base;
      hp.eta = eta;
      hp.beta = f / (1.0 + b * eta);
      const double e = median_energy(problem, hp, cfg.tuning_runs, seed);
      if (e < best_energy) {
        best_energy = e;
        best = hp;
      }
    }
    if (truncated) break;
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

inline BenchRecord bench_instance(const SuiteEntry& entry, const BenchConfig& cfg,
                                  std::uint64_t instance_seed) {
  BenchRecord rec;
  rec.id = entry.family.tag() + "#" + std::to_string(entry.seed);
  try {
    Problem problem(generate(entry.family, entry.seed));
    const auto& s = problem.stats;
    rec.predictors = {static_cast<double>(problem.size()), s.m, s.m_bar, s.mu};
    rec.hyperparams = tune_locally(problem, cfg, derive_seed(instance_seed, 0),
                                   rec.tuning_seconds, rec.tuning_truncated);
    const auto runs =
        run_restarts(problem, rec.hyperparams, derive_seed(instance_seed, 1), cfg.restarts_for_median);
    rec.median_energy = median_energy_of(runs);
    rec.best_cut = best_of(runs).cut;
    if (problem.size() <= std::min(cfg.oracle_max_n, kOracleMaxVertices)) {
      rec.optimum = brute_force(problem.instance).max_cut;
      rec.tts = time_to_solution(problem, rec.hyperparams, *rec.optimum, cfg.timeout,
                                 derive_seed(instance_seed, 2), cfg.tts_trials, cfg.max_restarts);
    }
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

inline EntropyReport entropy_report(std::span<const BenchRecord> records,
                                    const EntropyBinning& binning) {
  EntropyReport rep;
  std::vector<std::optional<double>> runtime;
  std::vector<double> n, m, m_bar, mu;
  for (const auto& r : records) {
    if (r.error || !r.tts) continue;
    runtime.push_back(r.tts->seconds);
    n.push_back(r.predictors.n);
    m.push_back(r.predictors.m);
    m_bar.push_back(r.predictors.m_bar);
    mu.push_back(r.predictors.mu);
  }
  rep.samples = runtime.size();
  if (runtime.empty()) return rep;
  rep.values = {{"n", conditional_entropy(runtime, n, binning)},
                {"m", conditional_entropy(runtime, m, binning)},
                {"m_bar", conditional_entropy(runtime, m_bar, binning)},
                {"mu", conditional_entropy(runtime, mu, binning)}};
  return rep;
}

/// Runs every suite entry (concurrently across instances; timing trials stay
/// sequential inside an instance) and the entropy analysis. Per-instance
/// failures are recorded, not thrown.
inline BenchReport run_benchmark(std::span<const SuiteEntry> suite, const BenchConfig& cfg,
                                 std::uint64_t master_seed, std::size_t threads = 1) {
  cfg.validate();
  BenchReport report;
  report.records.resize(suite.size());
  parallel_for(suite.size(), threads, [&](std::size_t k) {
    report.records[k] = bench_instance(suite[k], cfg, derive_seed(master_seed, k));
  });
  report.entropy = entropy_report(report.records, cfg.binning);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization. Timing-derived fields (wall times, time-to-solution seconds,
// the entropy table) are omitted when `timing` is false.

inline nlohmann::json optional_json(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

inline nlohmann::json record_to_json(const BenchRecord& r, bool timing) {
  nlohmann::json j;
  j["id"] = r.id;
  j["predictors"] = {{"n", r.predictors.n},
                     {"m", r.predictors.m},
                     {"m_bar", r.predictors.m_bar},
                     {"mu", r.predictors.mu}};
  j["hyperparams"] = r.hyperparams;
  j["median_energy"] = r.median_energy;
  j["best_cut"] = r.best_cut;
  j["optimum"] = optional_json(r.optimum);
  if (r.tts) {
    j["restarts_to_solution"] = optional_json(r.tts->restarts);
    if (timing) {
      j["time_to_solution_s"] = r.tts->seconds ? nlohmann::json(*r.tts->seconds)
                                               : nlohmann::json("TIMEOUT");
    }
  }
  if (timing) {
    j["tuning_time_s"] = r.tuning_seconds;
    j["tuning_truncated"] = r.tuning_truncated;
  }
  if (r.error) j["error"] = *r.error;
  return j;
}

inline nlohmann::json report_to_json(const BenchReport& rep, bool timing = true) {
  nlohmann::json j;
  j["records"] = nlohmann::json::array();
  for (const auto& r : rep.records) j["records"].push_back(record_to_json(r, timing));
  if (timing) {
    nlohmann::json table = nlohmann::json::array();
    const auto& published = published_lt_entropy();
    for (std::size_t k = 0; k < rep.entropy.values.size(); ++k) {
      table.push_back({{"predictor", rep.entropy.values[k].first},
                       {"normalized_entropy", rep.entropy.values[k].second},
                       {"published_lt", published[k].second}});
    }
    j["entropy"] = {{"samples", rep.entropy.samples}, {"table", table}};
  }
  return j;
}

inline BenchRecord record_from_json(const nlohmann::json& j) {
  BenchRecord r;
  r.id = j.at("id").get<std::string>();
  const auto& p = j.at("predictors");
  r.predictors = {p.at("n").get<double>(), p.at("m").get<double>(), p.at("m_bar").get<double>(),
                  p.at("mu").get<double>()};
  r.hyperparams = j.at("hyperparams").get<Hyperparams>();
  r.median_energy = j.at("median_energy").get<double>();
  r.best_cut = j.at("best_cut").get<double>();
  if (!j.at("optimum").is_null()) r.optimum = j["optimum"].get<double>();
  if (j.contains("restarts_to_solution") || j.contains("time_to_solution_s")) {
    TimeToSolution t;
    if (j.contains("restarts_to_solution") && !j["restarts_to_solution"].is_null()) {
      t.restarts = j["restarts_to_solution"].get<double>();
    }
    if (j.contains("time_to_solution_s") && j["time_to_solution_s"].is_number()) {
      t.seconds = j["time_to_solution_s"].get<double>();
    }
    r.tts = t;
  }
  r.tuning_seconds = j.value("tuning_time_s", 0.0);
  r.tuning_truncated = j.value("tuning_truncated", false);
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  return r;
}

inline BenchReport report_from_json(const nlohmann::json& j) {
  try {
    BenchReport rep;
    for (const auto& r : j.at("records")) rep.records.push_back(record_from_json(r));
    if (j.contains("entropy")) {
      rep.entropy.samples = j["entropy"].at("samples").get<std::size_t>();
      for (const auto& row : j["entropy"].at("table")) {
        rep.entropy.values.emplace_back(row.at("predictor").get<std::string>(),
                                        row.at("normalized_entropy").get<double>());
      }
    }
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bench report JSON: ") + e.what());
  }
}

namespace detail {
inline std::string csv_number(const std::optional<double>& x) {
  return x ? format_weight(*x) : std::string();
}
}  // namespace detail

inline const char* kBenchCsvHeader =
    "id,n,m,m_bar,mu,algo,eta,beta,median_energy,best_cut,optimum,restarts_to_solution,"
    "time_to_solution_s,error";

/// One row per record. Empty cells are absent values; a timed-out instance
/// has time_to_solution_s = TIMEOUT.
inline std::string report_to_csv(const BenchReport& rep, bool timing = true) {
  using detail::format_weight;
  std::string out = std::string(kBenchCsvHeader) + '\n';
  for (const auto& r : rep.records) {
    std::string tts;
    if (timing && r.tts) tts = r.tts->seconds ? format_weight(*r.tts->seconds) : "TIMEOUT";
    std::string err = r.error.value_or("");
    std::replace(err.begin(), err.end(), ',', ';');
    out += r.id + ',' + format_weight(r.predictors.n) + ',' + format_weight(r.predictors.m) + ',' +
           format_weight(r.predictors.m_bar) + ',' + format_weight(r.predictors.mu) + ',' +
           std::string(to_string(r.hyperparams.variant)) + ',' + format_weight(r.hyperparams.eta) +
           ',' + format_weight(r.hyperparams.beta) + ',' + format_weight(r.median_energy) + ',' +
           format_weight(r.best_cut) + ',' + detail::csv_number(r.optimum) + ',' +
           (r.tts ? detail::csv_number(r.tts->restarts) : std::string()) + ',' + tts + ',' + err +
           '\n';
  }
  return out;
}

/// Reads report_to_csv output back into records (entropy is not part of the CSV).
inline BenchReport report_from_csv(std::string_view text) {
  BenchReport rep;
  std::size_t pos = 0, line_no = 0;
  auto number = [&](std::string_view cell) -> std::optional<double> {
    if (cell.empty()) return std::nullopt;
    auto v = detail::parse_number<double>(cell);
    if (!v) throw ParseError("bad number '" + std::string(cell) + "'", line_no);
    return v;
  };
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != kBenchCsvHeader) throw ParseError("unexpected CSV header", 1);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= line.size(); ++k) {
      if (k == line.size() || line[k] == ',') {
        cells.push_back(line.substr(start, k - start));
        start = k + 1;
      }
    }
    if (cells.size() != 14) throw ParseError("expected 14 CSV cells", line_no);
    BenchRecord r;
    r.id = std::string(cells[0]);
    r.predictors = {number(cells[1]).value_or(0), number(cells[2]).value_or(0),
                    number(cells[3]).value_or(0), number(cells[4]).value_or(0)};
    r.hyperparams.variant = parse_variant(cells[5]);
    r.hyperparams.eta = number(cells[6]).value_or(0);
    r.hyperparams.beta = number(cells[7]).value_or(0);
    r.median_energy = number(cells[8]).value_or(0);
    r.best_cut = number(cells[9]).value_or(0);
    r.optimum = number(cells[10]);
    if (!cells[11].empty() || !cells[12].empty()) {
      TimeToSolution t;
      t.restarts = number(cells[11]);
      if (cells[12] != "TIMEOUT") t.seconds = number(cells[12]);
      r.tts = t;
    }
    if (!cells[13].empty()) r.error = std::string(cells[13]);
    rep.records.push_back(std::move(r));
  }
  return rep;
}

}  // namespace localspin
