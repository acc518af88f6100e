#pragma once

// The localspin command line: generate, solve, tune, oracle, bench, stats.
// run_cli() takes the streams explicitly so tests can drive it in-process.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "localspin/localspin.hpp"

namespace localspin::cli {

enum ExitCode { kOk = 0, kUsage = 1, kRuntime = 2, kOracleCap = 3 };

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  // instance selection / generation
  std::string instance_path;
  std::string family;
  std::size_t n = 0;
  std::optional<double> density;
  double sigma = 2.5;
  std::size_t dim = 2;
  std::size_t side = 0;
  // solver
  std::optional<double> eta;
  std::optional<double> beta;
  std::size_t max_rounds = 10000;
  double threshold = 1e-6;
  std::string algo = "lt";
  std::optional<double> dtau;
  std::size_t restarts = 0;  // 0: subcommand default
  // benchmarking
  double timeout = 1000.0;
  double tuning_budget = 20.0;
  std::size_t trials = 10;
  std::size_t max_restarts = 10000;  // 0: no cap
  std::size_t suite_size = 20;
  std::string suite_path;
  std::string target_from;
  std::vector<double> etas;
  std::vector<double> betas;
  // output
  std::optional<std::uint64_t> seed;
  std::string format = "json";
  std::size_t threads = 1;
  std::string output;
  bool trace = false;
  bool no_timing = false;
  std::string config;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Instance load_instance(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return nlohmann::json::parse(text).get<Instance>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what(), 0);
    }
  }
  return parse_biqmac(text);
}

inline std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("LOCALSPIN_SEED")) {
    auto v = localspin::detail::parse_number<std::uint64_t>(env);
    if (!v) throw UsageError(std::string("LOCALSPIN_SEED is not an unsigned integer: ") + env);
    return *v;
  }
  return 1;
}

inline Variant resolve_variant(const Options& o) {
  const Variant v = parse_variant(o.algo);
  if (v == Variant::imag && !o.dtau) throw UsageError("--algo imag requires --dtau");
  return v;
}

/// Hyperparameters from the flags. Unset eta/beta fall back to the analytic
/// default; an explicit eta alone keeps beta on the 1/(1 + b eta) curve.
inline Hyperparams resolve_hyperparams(const Options& o, const InstanceStats& s) {
  Hyperparams hp = default_hyperparams(s);
  const double b = 1.0 / hp.beta - 1.0;
  if (o.eta) hp.eta = *o.eta;
  hp.beta = o.beta ? *o.beta : 1.0 / (1.0 + b * hp.eta);
  hp.max_rounds = o.max_rounds;
  hp.threshold = o.threshold;
  hp.variant = resolve_variant(o);
  if (o.dtau) hp.dtau = *o.dtau;
  try {
    hp.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return hp;
}

inline FamilySpec resolve_family(const Options& o) {
  FamilySpec f;
  if (o.family == "torus") {
    f = FamilySpec::torus(o.dim, o.side);
  } else {
    if (o.n == 0) throw UsageError("--n is required for family " + o.family);
    if (o.family == "g05") f = FamilySpec::g05(o.n);
    else if (o.family == "pm1s") f = FamilySpec::pm1s(o.n);
    else if (o.family == "pm1d") f = FamilySpec::pm1d(o.n);
    else if (o.family == "w") f = FamilySpec::w(o.n, o.density.value_or(0.5));
    else if (o.family == "pw") f = FamilySpec::pw(o.n, o.density.value_or(0.5));
    else if (o.family == "ising") f = FamilySpec::ising(o.n, o.sigma);
    else throw UsageError("unknown family " + o.family);
    if (o.density && o.family != "w" && o.family != "pw") f.density = *o.density;
  }
  try {
    f.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return f;
}

inline nlohmann::json tts_json(const TimeToSolution& t, bool timing) {
  nlohmann::json j;
  if (timing) j["seconds"] = optional_json(t.seconds);
  j["restarts"] = optional_json(t.restarts);
  j["trials"] = t.trials.size();
  std::size_t timeouts = 0;
  for (const auto& tr : t.trials) timeouts += !tr.restarts_to_hit.has_value();
  j["timeouts"] = timeouts;
  return j;
}

inline std::vector<SuiteEntry> load_suite(const std::string& path) {
  std::vector<SuiteEntry> suite;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = localspin::detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = localspin::detail::split_ws(t);
    if (fields.size() != 2) throw ParseError("suite line must be '<family-tag> <seed>'", lineno);
    auto seed = localspin::detail::parse_number<std::uint64_t>(fields[1]);
    if (!seed) throw ParseError("bad seed in suite", lineno);
    suite.push_back({parse_family_tag(std::string(fields[0])), *seed});
  }
  return suite;
}

/// Turns a JSON config object into flag tokens. Keys are flag names without
/// the leading dashes; underscores are accepted in place of hyphens.
inline std::vector<std::string> config_tokens(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("bad config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : j.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& x : value) {
        if (!joined.empty()) joined += ',';
        joined += x.is_string() ? x.get<std::string>() : x.dump();
      }
      out.push_back(flag);
      out.push_back(joined);
    } else {
      out.push_back(flag);
      out.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return out;
}

/// Config tokens go right after the subcommand, so later command-line flags
/// override them.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t k = 0; k < args.size(); ++k) {
    std::string path;
    std::size_t span = 0;
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[k + 1];
      span = 2;
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
      span = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(k),
               args.begin() + static_cast<std::ptrdiff_t>(k + span));
    const auto tokens = config_tokens(path);
    args.insert(args.begin() + (args.empty() ? 0 : 1), tokens.begin(), tokens.end());
    return args;
  }
  return args;
}

}  // namespace detail

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) { build(); }

  int run(std::vector<std::string> args) {
    try {
      args = detail::expand_config(std::move(args));
      std::reverse(args.begin(), args.end());
      app_.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app_.exit(e, out_, err_);
      return code == 0 ? kOk : kUsage;
    } catch (const UsageError& e) {
      err_ << "error: " << e.what() << "\n" << app_.help();
      return kUsage;
    }
    try {
      dispatch();
      return kOk;
    } catch (const UsageError& e) {
      err_ << "error: " << e.what() << "\n";
      return kUsage;
    } catch (const OracleCapExceeded& e) {
      err_ << "error: " << e.what() << "\n";
      return kOracleCap;
    } catch (const InvalidArgument& e) {
      err_ << "error: " << e.what() << "\n";
      return kUsage;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return kRuntime;
    }
  }

 private:
  void build() {
    app_.require_subcommand(1);
    app_.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app_.set_help_all_flag("--help-all", "Show help for every subcommand");

    auto common = [&](CLI::App* s) {
      s->add_option("--seed", o_.seed, "Master seed (default: $LOCALSPIN_SEED or 1)");
      s->add_option("--format", o_.format, "Output format")
          ->check(CLI::IsMember({"json", "csv"}));
      s->add_option("--threads", o_.threads, "Worker threads")->check(CLI::PositiveNumber);
      s->add_option("-o,--output", o_.output, "Write results to this file instead of stdout");
      s->add_flag("--no-timing", o_.no_timing, "Omit wall-clock fields");
      s->add_option("--config", o_.config, "JSON file of default flag values");
    };
    auto solver = [&](CLI::App* s) {
      s->add_option("--eta", o_.eta, "Response in units of c-bar");
      s->add_option("--beta", o_.beta, "Inverse temperature");
      s->add_option("--max-rounds", o_.max_rounds, "Round cap per run");
      s->add_option("--threshold", o_.threshold, "Displacement that ends a run");
      s->add_option("--algo", o_.algo, "Update rule")->check(CLI::IsMember({"lt", "gd", "imag"}));
      s->add_option("--dtau", o_.dtau, "Imaginary-time step (required for imag)");
    };
    auto instance = [&](CLI::App* s) {
      s->add_option("instance", o_.instance_path, "Biq Mac or JSON instance file")->required();
    };

    sub_["generate"] = app_.add_subcommand("generate", "Generate a random instance");
    auto* g = sub_["generate"];
    g->add_option("--family", o_.family, "g05, pm1s, pm1d, w, pw, ising or torus")->required();
    g->add_option("--n", o_.n, "Vertex count");
    g->add_option("--density", o_.density, "Edge probability");
    g->add_option("--sigma", o_.sigma, "Ising decay exponent");
    g->add_option("--dim", o_.dim, "Torus dimension");
    g->add_option("--side", o_.side, "Torus side length");
    common(g);

    sub_["solve"] = app_.add_subcommand("solve", "Run restarts and report the best cut");
    auto* s = sub_["solve"];
    instance(s);
    solver(s);
    s->add_option("--restarts", o_.restarts, "Number of restarts (default 1)");
    s->add_flag("--trace", o_.trace, "Include the displacement trace of the best run");
    s->add_option("--target-from", o_.target_from, "Oracle JSON; adds time to solution");
    s->add_option("--timeout", o_.timeout, "Seconds per time-to-solution trial");
    s->add_option("--trials", o_.trials, "Time-to-solution trials");
    s->add_option("--max-restarts", o_.max_restarts, "Restart cap per trial, 0 for none");
    common(s);

    sub_["tune"] = app_.add_subcommand("tune", "Grid-search eta and beta, fit the beta(eta) law");
    auto* t = sub_["tune"];
    instance(t);
    solver(t);
    t->add_option("--restarts", o_.restarts, "Runs per grid point (default 10)");
    t->add_option("--etas", o_.etas, "Comma-separated eta grid")->delimiter(',');
    t->add_option("--betas", o_.betas, "Comma-separated beta grid")->delimiter(',');
    common(t);

    sub_["oracle"] = app_.add_subcommand("oracle", "Exact MAXCUT by enumeration (n <= 28)");
    auto* r = sub_["oracle"];
    instance(r);
    common(r);

    sub_["bench"] = app_.add_subcommand("bench", "Benchmark suite with entropy analysis");
    auto* b = sub_["bench"];
    b->add_option("--suite", o_.suite_path, "File of '<family-tag> <seed>' lines");
    b->add_option("--suite-size", o_.suite_size, "Size of the built-in suite");
    b->add_option("--restarts", o_.restarts, "Restarts for the median energy (default 30)");
    b->add_option("--timeout", o_.timeout, "Seconds per time-to-solution trial");
    b->add_option("--tuning-budget", o_.tuning_budget, "Seconds of tuning per instance");
    b->add_option("--trials", o_.trials, "Time-to-solution trials");
    b->add_option("--max-restarts", o_.max_restarts, "Restart cap per trial, 0 for none");
    b->add_option("--max-rounds", o_.max_rounds, "Round cap per run");
    b->add_option("--threshold", o_.threshold, "Displacement that ends a run");
    b->add_option("--algo", o_.algo, "Update rule")->check(CLI::IsMember({"lt", "gd", "imag"}));
    b->add_option("--dtau", o_.dtau, "Imaginary-time step");
    common(b);

    sub_["stats"] = app_.add_subcommand("stats", "Instance statistics");
    auto* st = sub_["stats"];
    instance(st);
    common(st);
  }

  void emit(const std::string& text) {
    if (o_.output.empty()) {
      out_ << text;
      return;
    }
    std::ofstream f(o_.output, std::ios::binary);
    if (!f) throw Error("cannot write " + o_.output);
    f << text;
  }

  void emit(const nlohmann::json& j) { emit(j.dump(2) + "\n"); }

  void dispatch() {
    if (sub_["generate"]->parsed()) return generate();
    if (sub_["solve"]->parsed()) return solve();
    if (sub_["tune"]->parsed()) return tune();
    if (sub_["oracle"]->parsed()) return oracle();
    if (sub_["bench"]->parsed()) return bench();
    if (sub_["stats"]->parsed()) return stats_cmd();
  }

  bool timing() const { return !o_.no_timing; }

  std::optional<std::size_t> restart_cap() const {
    if (o_.max_restarts == 0) return std::nullopt;
    return o_.max_restarts;
  }

  void generate() {
    const auto family = detail::resolve_family(o_);
    const auto inst = localspin::generate(family, detail::resolve_seed(o_));
    if (o_.format == "json") {
      if (sub_["generate"]->count("--format") == 0) {
        emit(serialize_biqmac(inst));
      } else {
        emit(nlohmann::json(inst));
      }
    } else {
      throw UsageError("generate writes Biq Mac text or JSON, not CSV");
    }
    err_ << inst.family.value_or("") << ": " << inst.n << " vertices, " << inst.edges.size()
         << " edges\n";
  }

  void solve() {
    Problem problem(detail::load_instance(o_.instance_path));
    const auto hp = detail::resolve_hyperparams(o_, problem.stats);
    const std::uint64_t seed = detail::resolve_seed(o_);
    const std::size_t restarts = o_.restarts == 0 ? 1 : o_.restarts;
    const auto runs = run_restarts(problem, hp, seed, restarts, o_.threads);
    const auto& best = best_of(runs);

    std::optional<TimeToSolution> tts;
    if (!o_.target_from.empty()) {
      nlohmann::json target;
      try {
        target = nlohmann::json::parse(detail::read_file(o_.target_from));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(o_.target_from + ": " + e.what(), 0);
      }
      if (!target.contains("max_cut")) throw ParseError(o_.target_from + ": no max_cut", 0);
      tts = time_to_solution(problem, hp, target["max_cut"].get<double>(), o_.timeout,
                             seed, o_.trials, restart_cap());
    }

    if (o_.format == "csv") {
      std::ostringstream csv;
      csv << "restart,cut,energy,rounds,converged" << (timing() ? ",wall_time_s" : "") << "\n";
      for (std::size_t k = 0; k < runs.size(); ++k) {
        csv << k << ',' << localspin::detail::format_weight(runs[k].cut) << ','
            << localspin::detail::format_weight(runs[k].energy) << ',' << runs[k].rounds_used
            << ',' << (runs[k].converged ? 1 : 0);
        if (timing()) csv << ',' << runs[k].wall_time;
        csv << "\n";
      }
      return emit(csv.str());
    }
    std::vector<double> cuts;
    for (const auto& r : runs) cuts.push_back(r.cut);
    nlohmann::json j = {{"instance", {{"n", problem.size()}, {"edges", problem.instance.edges.size()}}},
                        {"seed", seed},
                        {"hyperparams", hp},
                        {"restarts", restarts},
                        {"best", run_to_json(best, {o_.trace, timing()})},
                        {"median_cut", median(cuts)},
                        {"median_energy", median_energy_of(runs)},
                        {"cuts", cuts}};
    if (problem.instance.family) j["instance"]["family"] = *problem.instance.family;
    if (tts) j["time_to_solution"] = detail::tts_json(*tts, timing());
    emit(j);
  }

  void tune() {
    Problem problem(detail::load_instance(o_.instance_path));
    auto base = detail::resolve_hyperparams(o_, problem.stats);
    const auto etas = o_.etas.empty() ? default_eta_grid() : o_.etas;
    const auto betas = o_.betas.empty() ? default_beta_grid() : o_.betas;
    for (double x : etas) {
      if (!(x > 0.0)) throw UsageError("--etas must be positive");
    }
    for (double x : betas) {
      if (!(x > 0.0)) throw UsageError("--betas must be positive");
    }
    const std::size_t runs = o_.restarts == 0 ? 10 : o_.restarts;
    const auto result = grid_search(problem, etas, betas, runs, detail::resolve_seed(o_), base,
                                    o_.threads);
    const auto locus = extract_locus(result);
    if (o_.format == "csv") return emit(locus_csv(locus));
    nlohmann::json j = result;
    j["locus"] = locus;
    try {
      j["fit"] = fit_beta_eta(locus);
    } catch (const InvalidArgument& e) {
      err_ << "no beta(eta) fit: " << e.what() << "\n";
      j["fit"] = nullptr;
    }
    emit(j);
  }

  void oracle() {
    const auto inst = detail::load_instance(o_.instance_path);
    const auto sol = brute_force(inst, o_.threads);
    if (o_.format == "csv") {
      std::ostringstream csv;
      csv << "max_cut,num_optima,spins\n"
          << localspin::detail::format_weight(sol.max_cut) << ',' << sol.num_optima << ',';
      for (int s : sol.argmax_spins) csv << (s > 0 ? '+' : '-');
      csv << "\n";
      return emit(csv.str());
    }
    emit(nlohmann::json(sol));
  }

  void bench() {
    BenchConfig cfg;
    if (o_.restarts != 0) cfg.restarts_for_median = o_.restarts;
    cfg.timeout = o_.timeout;
    cfg.tuning_budget = o_.tuning_budget;
    cfg.tts_trials = o_.trials;
    cfg.max_restarts = restart_cap();
    cfg.max_rounds = o_.max_rounds;
    cfg.threshold = o_.threshold;
    cfg.variant = detail::resolve_variant(o_);
    const auto seed = detail::resolve_seed(o_);
    const auto suite = o_.suite_path.empty() ? default_suite(o_.suite_size, seed)
                                             : detail::load_suite(o_.suite_path);
    const auto report = run_benchmark(suite, cfg, seed, o_.threads);
    for (const auto& r : report.records) {
      if (r.error) err_ << r.id << ": " << *r.error << "\n";
    }
    if (o_.format == "csv") return emit(report_to_csv(report, timing()));
    emit(report_to_json(report, timing()));
  }

  void stats_cmd() {
    const auto inst = detail::load_instance(o_.instance_path);
    const auto s = localspin::stats(inst);
    if (o_.format == "csv") {
      std::ostringstream csv;
      csv.precision(17);
      csv << "n,edges,m,m_bar,mu,cbar,gershgorin_radius,spectral_radius\n"
          << inst.n << ',' << inst.edges.size() << ',' << s.m << ',' << s.m_bar << ',' << s.mu
          << ',' << s.cbar << ',' << s.gershgorin_radius << ',' << s.spectral_radius_estimate
          << "\n";
      return emit(csv.str());
    }
    nlohmann::json j = s;
    j["n"] = inst.n;
    j["edges"] = inst.edges.size();
    emit(j);
  }

  std::ostream& out_;
  std::ostream& err_;
  Options o_;
  CLI::App app_{"Local-spin MAXCUT heuristics", "localspin"};
  std::map<std::string, CLI::App*> sub_;
};

/// Runs one invocation; `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  return cli.run(std::move(args));
}

}  // namespace localspin::cli
