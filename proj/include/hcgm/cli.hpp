#pragma once

// Command implementations behind the hcgm executable. Each command returns
// a process exit code and writes human-readable output to the given streams.
//
//   0  success (bounds-check: all bounds hold)
//   1  bounds-check found a violation
//   2  usage or configuration error
//   3  numeric abort during a solve

#include "hcgm/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace hcgm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

enum class LogLevel { Quiet, Info, Debug };

/// HCGM_LOG = quiet | info | debug (default info).
inline LogLevel log_level_from_env() {
  const char* v = std::getenv("HCGM_LOG");
  if (!v) return LogLevel::Info;
  const std::string s(v);
  if (s == "quiet") return LogLevel::Quiet;
  if (s == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

struct Streams {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
  LogLevel level = LogLevel::Info;
};

struct RunOutcome {
  ProblemInstance instance;
  SolveResult result;
  SolverConfig solver;
};

/// Builds the instance and resolves the recommended beta0.
inline RunOutcome run_config(const RunConfig& rc) {
  RunOutcome o{build_instance(rc.problem), {}, rc.solver};
  if (rc.recommended_beta0) o.solver.beta0 = o.instance.bounds.beta0;
  o.result = solve(o.instance.problem, o.solver);
  return o;
}

inline RunConfig with_resolved_beta0(RunConfig rc, const ProblemInstance& inst) {
  if (rc.recommended_beta0) {
    rc.solver.beta0 = inst.bounds.beta0;
    rc.recommended_beta0 = false;
  }
  return rc;
}

namespace detail {

inline void check_writable(const std::string& path) {
  if (path.empty()) throw ConfigError("no trace output path given (use --out or output.trace)");
  const std::filesystem::path p(path);
  const auto parent = p.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw ConfigError("output directory does not exist: " + parent.string());
  if (std::filesystem::is_directory(p)) throw ConfigError("output path is a directory: " + path);
}

inline int solve_one(const RunConfig& rc, const std::string& out_path, Streams io, std::mutex* log_mutex) {
  auto log = [&](std::ostream& s, const std::string& line) {
    if (log_mutex) {
      std::lock_guard<std::mutex> lock(*log_mutex);
      s << line << "\n";
    } else {
      s << line << "\n";
    }
  };
  RunOutcome run;
  try {
    check_writable(out_path);
    run = run_config(rc);
  } catch (const ConfigError& e) {
    log(io.err, std::string("error: ") + e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    log(io.err, std::string("error: ") + e.what());
    return kExitConfig;
  }
  write_trace_csv(out_path, run.result.trace, run.instance.problem.terms.size());
  if (run.result.reason == Termination::NumericAbort) {
    log(io.err, "numeric abort: " + run.result.diagnostic);
    return kExitNumeric;
  }
  if (io.level != LogLevel::Quiet) {
    std::ostringstream msg;
    msg << run.instance.name << ": " << run.result.trace.size() << " rows -> " << out_path;
    if (!run.result.trace.empty()) {
      const auto& last = run.result.trace.back();
      msg << " (F_beta " << format_double(last.F_beta) << ", gap " << format_double(last.total_gap()) << ")";
    }
    log(io.out, msg.str());
  }
  return kExitOk;
}

}  // namespace detail

/// Single solve; `out_path` overrides output.trace when non-empty.
inline int cmd_solve(const std::string& config_path, const std::string& out_path, Streams io = {}) {
  RunConfig rc;
  try {
    rc = load_run_config(config_path);
  } catch (const ConfigError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return detail::solve_one(rc, out_path.empty() ? rc.output.trace : out_path, io, nullptr);
}

/// Several configs, each writing to its own output.trace, on `jobs` threads.
/// Returns the largest exit code of the individual runs.
inline int cmd_solve_batch(const std::vector<std::string>& config_paths, int jobs, Streams io = {}) {
  if (jobs < 1) {
    io.err << "error: --jobs must be >= 1\n";
    return kExitConfig;
  }
  std::vector<RunConfig> configs;
  std::set<std::string> seen;
  for (const auto& path : config_paths) {
    try {
      configs.push_back(load_run_config(path));
      const std::string out = configs.back().output.trace;
      detail::check_writable(out);
      const std::string key = std::filesystem::weakly_canonical(out).string();
      if (!seen.insert(key).second) throw ConfigError("duplicate output path " + out + " in batch");
    } catch (const ConfigError& e) {
      io.err << "error: " << path << ": " << e.what() << "\n";
      return kExitConfig;
    }
  }
  std::vector<int> codes(configs.size(), kExitOk);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++)
      codes[i] = detail::solve_one(configs[i], configs[i].output.trace, io, &log_mutex);
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), configs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return codes.empty() ? kExitOk : *std::max_element(codes.begin(), codes.end());
}

// ---------------------------------------------------------------------------
// bounds-check

struct BoundCheckSummary {
  std::string name;
  std::size_t rows = 0;
  double max_ratio = 0.0;  // largest value / bound over checked rows
};

namespace detail {

inline bool exceeds(double value, double bound) {
  return value > bound + 1e-12 * std::max(1.0, std::abs(bound));
}

}  // namespace detail

inline int cmd_bounds_check(const std::string& config_path, const std::string& trace_path, Streams io = {}) {
  RunConfig rc;
  ProblemInstance inst;
  std::vector<IterationRecord> trace;
  BoundInputs in;
  try {
    rc = load_run_config(config_path);
    inst = build_instance(rc.problem);
    rc = with_resolved_beta0(rc, inst);
    in = resolve_bound_inputs(inst, rc);
    trace = read_trace_csv(trace_path);
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const CompositeProblem& p = inst.problem;
  const std::size_t terms = p.terms.size();

  // The trace must come from this configuration.
  for (const auto& r : trace) {
    if (r.k < 1 || r.feas_gaps.size() != terms) {
      io.err << "error: trace does not match the configured problem\n";
      return kExitConfig;
    }
    const double expected = schedule_for(r.k, rc.solver).beta;
    if (std::abs(r.beta - expected) > 1e-12 * expected) {
      io.err << "error: trace beta at k=" << r.k << " does not match the configured schedule\n";
      return kExitConfig;
    }
  }

  bool all_indicator = !p.terms.empty();
  for (const auto& t : p.terms) all_indicator = all_indicator && t.g->kind() == TermKind::Indicator;

  if (rc.bounds.estimate_y_star && !in.y_star_norm) {
    if (!p.has_indicator()) {
      io.out << "note: no indicator terms; dual norm estimate not needed\n";
    } else {
      const SolveResult ref = solve(p, rc.solver);
      in.y_star_norm = ref.dual_norm;
      io.out << "note: ||y*|| estimated as " << format_double(ref.dual_norm)
             << " from the final dual iterate of the configured run\n";
    }
  }

  const bool multiplicative = in.model == ErrorModel::Multiplicative;
  if (multiplicative && !in.initial_gap && in.f_star) {
    const ObjectiveReport start = F_value(p.start, p);
    if (start.value) {
      in.initial_gap = *start.value - *in.f_star;
    } else {
      in.initial_gap = F_beta_value(p.start, p, in.beta0) - *in.f_star;
      io.out << "note: start is infeasible; E evaluated with the smoothed objective F_beta0(x1) as a surrogate\n";
    }
  }
  try {
    in.validate();
  } catch (const std::invalid_argument& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const bool have_e = !multiplicative || in.initial_gap.has_value();

  std::vector<BoundCheckSummary> summary;
  auto slot = [&summary](const std::string& name) -> BoundCheckSummary& {
    for (auto& s : summary)
      if (s.name == name) return s;
    summary.push_back({name, 0, 0.0});
    return summary.back();
  };
  std::vector<std::string> skipped;
  if (!in.f_star) skipped.push_back("objective bounds (no reference optimum)");
  if (!have_e) skipped.push_back("all bounds needing E (no reference optimum)");
  if (p.has_indicator() && !all_indicator) skipped.push_back("indicator bounds (problem mixes Lipschitz and indicator terms)");
  if (all_indicator && !in.y_star_norm) skipped.push_back("indicator bounds (||y*|| not supplied)");
  if (!p.has_indicator() && !in.lg) skipped.push_back("Lipschitz bound (L_g unknown)");

  for (const auto& r : trace) {
    // Row k carries x_{k+1}: the smoothed bound is indexed by k, the others by k+1.
    std::vector<std::tuple<std::string, double, double>> checks;
    if (in.f_star && have_e) checks.emplace_back("smoothed-gap", r.F_beta - *in.f_star, smoothed_gap_bound(r.k, in));
    if (!p.has_indicator() && in.lg && in.f_star && have_e)
      checks.emplace_back("lipschitz-gap", r.F_or_nan - *in.f_star, lipschitz_gap_bound(r.k + 1, in));
    if (all_indicator && in.y_star_norm && have_e) {
      const IndicatorBounds b = indicator_bounds(r.k + 1, in);
      const double gap = r.total_gap();
      checks.emplace_back("feasibility-gap", gap, b.feasibility);
      if (in.f_star) {
        checks.emplace_back("objective-upper", r.f_value - *in.f_star, b.objective_upper);
        // f - f* >= -||y*|| dist, checked as -(f - f*) <= ||y*|| dist
        checks.emplace_back("objective-lower", *in.f_star - r.f_value, -b.objective_lower(gap));
      }
    }
    for (const auto& [name, value, bound] : checks) {
      auto& s = slot(name);
      ++s.rows;
      if (bound > 0.0) s.max_ratio = std::max(s.max_ratio, value / bound);
      if (!std::isfinite(value) || detail::exceeds(value, bound)) {
        io.out << "VIOLATED " << name << " at k=" << r.k << ": value " << format_double(value) << " > bound "
               << format_double(bound) << "\n";
        return kExitViolation;
      }
    }
  }
  for (const auto& s : summary)
    io.out << s.name << ": " << s.rows << " rows, max value/bound " << format_double(s.max_ratio) << "\n";
  for (const auto& s : skipped) io.out << "skipped: " << s << "\n";
  io.out << "ALL BOUNDS HOLD\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// demo

inline const std::vector<std::string>& demo_names() {
  static const std::vector<std::string> names = {"counterexample", "quadratic_box", "clustering", "rpca", "game"};
  return names;
}

inline std::string demo_usage() {
  std::string s = "usage: hcgm demo <name> --seed <u64> --iters <n> --out <dir>\n  names:";
  for (const auto& n : demo_names()) s += " " + n;
  return s + "\n";
}

inline nlohmann::json demo_config(const std::string& builder, std::uint64_t seed, int iters,
                                  const nlohmann::json& params, const std::string& trace) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["problem"] = {{"builder", builder}, {"seed", seed}, {"params", params}};
  j["solver"] = {{"beta0", "recommended"}, {"max_iter", iters}, {"seed", seed}};
  j["output"] = {{"trace", trace}};
  if (builder == "clustering") j["bounds"] = {{"y_star_norm", "estimate"}};
  return j;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

inline RunOutcome demo_run(const std::filesystem::path& dir, const std::string& stem, const nlohmann::json& cfg) {
  write_text(dir / (stem + "_config.json"), cfg.dump(2) + "\n");
  const RunConfig rc = parse_run_config(cfg);
  RunOutcome run = run_config(rc);
  write_trace_csv((dir / (stem + ".csv")).string(), run.result.trace, run.instance.problem.terms.size());
  return run;
}

}  // namespace detail

inline int cmd_demo(const std::string& name, std::uint64_t seed, int iters, const std::string& out_dir,
                    Streams io = {}) {
  const auto& names = demo_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    io.err << "error: unknown demo '" << name << "'\n" << demo_usage();
    return kExitConfig;
  }
  if (iters < 0) {
    io.err << "error: --iters must be >= 0\n";
    return kExitConfig;
  }
  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir)) {
    io.err << "error: cannot create output directory " << out_dir << "\n";
    return kExitConfig;
  }
  auto trace_path = [&](const std::string& stem) { return (dir / (stem + ".csv")).string(); };
  const nlohmann::json none = nlohmann::json::object();
  std::ostringstream summary;

  if (name == "rpca") {
    RunOutcome ls = detail::demo_run(dir, "rpca_ls", demo_config("rpca", seed, iters, {{"loss", "ls"}}, trace_path("rpca_ls")));
    RunOutcome lad =
        detail::demo_run(dir, "rpca_lad", demo_config("rpca", seed, iters, {{"loss", "lad"}}, trace_path("rpca_lad")));
    const double e_ls = relative_error(ls.result.x, *ls.instance.planted_matrix);
    const double e_lad = relative_error(lad.result.x, *lad.instance.planted_matrix);
    summary << "loss,relative_error\nls," << format_double(e_ls) << "\nlad," << format_double(e_lad) << "\n";
    detail::write_text(dir / "rpca_summary.csv", summary.str());
    io.out << "rpca seed " << seed << ": relative error LS " << e_ls << ", LAD " << e_lad << "\n";
    return kExitOk;
  }

  RunOutcome run = detail::demo_run(dir, name, demo_config(name, seed, iters, none, trace_path(name)));
  const auto& trace = run.result.trace;
  if (run.result.reason == Termination::NumericAbort) {
    io.err << "numeric abort: " << run.result.diagnostic << "\n";
    return kExitNumeric;
  }

  if (name == "counterexample") {
    const ClassicalCgmTrace classical = classical_cgm_counterexample(iters);
    const double g_star = *run.instance.known_optimum;
    std::ostringstream csv;
    csv << "k,x1,x2,value,gap\n";
    for (std::size_t i = 0; i < classical.iterates.size(); ++i) {
      const Vector& x = classical.iterates[i];
      csv << i + 1 << ',' << format_double(x(0)) << ',' << format_double(x(1)) << ','
          << format_double(classical.values[i]) << ',' << format_double(classical.values[i] - g_star) << "\n";
    }
    detail::write_text(dir / "classical.csv", csv.str());
    if (!trace.empty())
      io.out << "counterexample: HCGM gap " << trace.back().F_or_nan - g_star << ", classical CGM gap "
             << classical.values.back() - g_star << " after " << iters << " iterations\n";
  } else if (name == "clustering") {
    const int clusters = 3;
    const Eigen::Index n = static_cast<Eigen::Index>(run.instance.planted_labels.size());
    const Rounding r = round_clustering(as_matrix(run.result.x, n, n), clusters, seed);
    const double acc = clustering_accuracy(r.labels, run.instance.planted_labels, clusters);
    summary << "accuracy," << format_double(acc) << "\n";
    if (!trace.empty()) summary << "final_feasibility_gap," << format_double(trace.back().total_gap()) << "\n";
    summary << "dual_norm_estimate," << format_double(run.result.dual_norm) << "\n";
    detail::write_text(dir / "clustering_summary.csv", summary.str());
    io.out << "clustering seed " << seed << ": rounding accuracy " << acc << "\n";
  } else if (!trace.empty() && run.instance.known_optimum) {
    io.out << name << ": final gap " << trace.back().F_or_nan - *run.instance.known_optimum << "\n";
  }
  return kExitOk;
}

}  // namespace hcgm::cli
