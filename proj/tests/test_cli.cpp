#include "hcgm/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace hcgm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hcgm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_json(const fs::path& p, const nlohmann::json& j) { std::ofstream(p) << j.dump(2); }

nlohmann::json base_config(const std::string& builder, int iters, const std::string& trace = "") {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["problem"] = {{"builder", builder}, {"seed", 3}};
  j["solver"] = {{"beta0", "recommended"}, {"max_iter", iters}};
  if (!trace.empty()) j["output"] = {{"trace", trace}};
  return j;
}

struct Captured {
  std::ostringstream out, err;
  cli::Streams io() { return {out, err, cli::LogLevel::Quiet}; }
};

int run_binary(const std::string& args) {
  const std::string cmd = std::string(HCGM_CLI_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

// Configuration ----------------------------------------------------------------------

TEST(Config, ParsesFullDocument) {
  nlohmann::json j = base_config("quadratic_box", 50, "t.csv");
  j["solver"]["beta0"] = 0.5;
  j["solver"]["step"] = "line_search";
  j["solver"]["oracle"] = {{"kind", "additive"}, {"delta", 1.0}, {"strategy", "lazy"}};
  j["bounds"] = {{"lg", 2.0}, {"y_star_norm", "estimate"}};
  j["output"]["trace_every"] = 5;
  const RunConfig rc = parse_run_config(j);
  EXPECT_FALSE(rc.recommended_beta0);
  EXPECT_EQ(rc.solver.beta0, 0.5);
  EXPECT_EQ(rc.solver.step, StepVariant::LineSearch);
  EXPECT_EQ(rc.solver.oracle.kind, OracleKind::Additive);
  EXPECT_EQ(rc.solver.oracle.delta, 1.0);
  EXPECT_EQ(rc.solver.trace_every, 5);
  EXPECT_EQ(*rc.bounds.lg, 2.0);
  EXPECT_TRUE(rc.bounds.estimate_y_star);
  EXPECT_FALSE(rc.solver.record_time);
}

TEST(Config, RejectsMalformedDocuments) {
  nlohmann::json j = base_config("counterexample", 10);
  j["solver"]["iterations"] = 5;
  EXPECT_THROW(parse_run_config(j), ConfigError);
  j = base_config("counterexample", 10);
  j.erase("schema_version");
  EXPECT_THROW(parse_run_config(j), ConfigError);
  j = base_config("counterexample", 10);
  j["schema_version"] = 2;
  EXPECT_THROW(parse_run_config(j), ConfigError);
  j = base_config("counterexample", 10);
  j["solver"]["oracle"] = {{"kind", "multiplicative"}, {"delta", 1.5}};
  EXPECT_THROW(parse_run_config(j), ConfigError);
  j = base_config("counterexample", 10);
  j["solver"]["beta0"] = "best";
  EXPECT_THROW(parse_run_config(j), ConfigError);
  j = base_config("counterexample", 10);
  j["bounds"] = {{"y_star_norm", true}};
  EXPECT_THROW(parse_run_config(j), ConfigError);
  j = base_config("counterexample", 10);
  j["problem"]["extra"] = 1;
  EXPECT_THROW(parse_run_config(j), ConfigError);
}

TEST(Config, BuildersAndParams) {
  for (const char* b : {"counterexample", "quadratic_box", "clustering", "rpca", "game"}) {
    ProblemSpec s;
    s.builder = b;
    s.seed = 2;
    if (std::string(b) == "clustering") s.params = {{"n", 9}};
    if (std::string(b) == "rpca") s.params = {{"rows", 6}, {"cols", 5}, {"rank", 2}};
    const ProblemInstance inst = build_instance(s);
    EXPECT_TRUE(self_check(inst).ok) << b;
  }
  ProblemSpec g;
  g.builder = "game";
  g.params["matrix"] = nlohmann::json::array({nlohmann::json::array({1, -1}), nlohmann::json::array({-1, 1})});
  EXPECT_NEAR(*build_instance(g).known_optimum, 0.0, 1e-14);
  ProblemSpec bad;
  bad.builder = "nope";
  EXPECT_THROW(build_instance(bad), ConfigError);
  bad.builder = "rpca";
  bad.params["loss"] = "huber";
  EXPECT_THROW(build_instance(bad), ConfigError);
}

// Trace CSV -----------------------------------------------------------------------------

TEST(TraceCsv, RoundTripIsExact) {
  const ProblemInstance inst = build_default_quadratic_box(false);
  SolverConfig cfg;
  cfg.max_iter = 40;
  const SolveResult r = solve(inst.problem, cfg);
  std::stringstream ss;
  write_trace_csv(ss, r.trace, inst.problem.terms.size());
  const auto back = read_trace_csv(ss);
  ASSERT_EQ(back.size(), r.trace.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].k, r.trace[i].k);
    EXPECT_EQ(back[i].beta, r.trace[i].beta);
    EXPECT_EQ(back[i].F_beta, r.trace[i].F_beta);
    EXPECT_EQ(back[i].f_value, r.trace[i].f_value);
    EXPECT_EQ(back[i].feas_gaps, r.trace[i].feas_gaps);
  }
}

TEST(TraceCsv, SpecialValuesAndBadInput) {
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(parse_double(format_double(0.1)), 0.1);
  EXPECT_TRUE(std::isnan(parse_double("nan")));
  EXPECT_THROW(parse_double("1.5x"), std::invalid_argument);
  std::stringstream bad("k,eta\n1,2\n");
  EXPECT_THROW(read_trace_csv(bad), std::runtime_error);
  std::stringstream empty;
  EXPECT_THROW(read_trace_csv(empty), std::runtime_error);
}

TEST(TraceCsv, HeaderLayout) {
  const auto h = trace_header(2);
  EXPECT_EQ(h.front(), "k");
  EXPECT_EQ(h[7], "feas_gap_1");
  EXPECT_EQ(h[8], "feas_gap_2");
  EXPECT_EQ(h.back(), "elapsed_ms");
}

// solve -----------------------------------------------------------------------------------

TEST(Solve, WritesDeterministicTrace) {
  const fs::path dir = scratch("solve");
  write_json(dir / "c.json", base_config("counterexample", 100));
  Captured a, b;
  ASSERT_EQ(cli::cmd_solve((dir / "c.json").string(), (dir / "a.csv").string(), a.io()), cli::kExitOk);
  ASSERT_EQ(cli::cmd_solve((dir / "c.json").string(), (dir / "b.csv").string(), b.io()), cli::kExitOk);
  const std::string ta = slurp(dir / "a.csv");
  EXPECT_EQ(ta, slurp(dir / "b.csv"));
  EXPECT_EQ(read_trace_csv((dir / "a.csv").string()).size(), 100u);
}

TEST(Solve, ConfigErrorsExitTwo) {
  const fs::path dir = scratch("solve_err");
  Captured c;
  EXPECT_EQ(cli::cmd_solve((dir / "missing.json").string(), (dir / "x.csv").string(), c.io()), cli::kExitConfig);
  write_json(dir / "c.json", base_config("counterexample", 10));
  EXPECT_EQ(cli::cmd_solve((dir / "c.json").string(), "", c.io()), cli::kExitConfig);
  EXPECT_EQ(cli::cmd_solve((dir / "c.json").string(), (dir / "no_dir" / "x.csv").string(), c.io()), cli::kExitConfig);
}

TEST(Solve, BatchRunsEveryConfig) {
  const fs::path dir = scratch("batch");
  std::vector<std::string> paths;
  for (int i = 0; i < 3; ++i) {
    const fs::path c = dir / ("c" + std::to_string(i) + ".json");
    write_json(c, base_config("quadratic_box", 20 + i, (dir / ("t" + std::to_string(i) + ".csv")).string()));
    paths.push_back(c.string());
  }
  Captured cap;
  ASSERT_EQ(cli::cmd_solve_batch(paths, 2, cap.io()), cli::kExitOk);
  for (int i = 0; i < 3; ++i)
    EXPECT_EQ(read_trace_csv((dir / ("t" + std::to_string(i) + ".csv")).string()).size(), static_cast<std::size_t>(20 + i));
}

TEST(Solve, BatchRejectsSharedOutput) {
  const fs::path dir = scratch("batch_dup");
  const std::string out = (dir / "same.csv").string();
  write_json(dir / "a.json", base_config("counterexample", 5, out));
  write_json(dir / "b.json", base_config("quadratic_box", 5, (dir / "." / "same.csv").string()));
  Captured cap;
  EXPECT_EQ(cli::cmd_solve_batch({(dir / "a.json").string(), (dir / "b.json").string()}, 2, cap.io()), cli::kExitConfig);
  EXPECT_FALSE(fs::exists(out));
}

// bounds-check ------------------------------------------------------------------------------

TEST(BoundsCheck, CounterexampleHolds) {
  const fs::path dir = scratch("bc_ok");
  write_json(dir / "c.json", base_config("counterexample", 300));
  Captured s, b;
  ASSERT_EQ(cli::cmd_solve((dir / "c.json").string(), (dir / "t.csv").string(), s.io()), cli::kExitOk);
  ASSERT_EQ(cli::cmd_bounds_check((dir / "c.json").string(), (dir / "t.csv").string(), b.io()), cli::kExitOk);
  EXPECT_NE(b.out.str().find("ALL BOUNDS HOLD"), std::string::npos);
  EXPECT_NE(b.out.str().find("smoothed-gap: 300 rows"), std::string::npos);
  EXPECT_NE(b.out.str().find("lipschitz-gap: 300 rows"), std::string::npos);
}

TEST(BoundsCheck, InflatedValueIsReported) {
  const fs::path dir = scratch("bc_bad");
  write_json(dir / "c.json", base_config("counterexample", 50));
  Captured s, b;
  ASSERT_EQ(cli::cmd_solve((dir / "c.json").string(), (dir / "t.csv").string(), s.io()), cli::kExitOk);
  auto trace = read_trace_csv((dir / "t.csv").string());
  trace[9].F_beta += 100.0;
  write_trace_csv((dir / "t.csv").string(), trace, 1);
  EXPECT_EQ(cli::cmd_bounds_check((dir / "c.json").string(), (dir / "t.csv").string(), b.io()), cli::kExitViolation);
  EXPECT_NE(b.out.str().find("VIOLATED smoothed-gap at k=10"), std::string::npos);
}

TEST(BoundsCheck, ScheduleMismatchIsAConfigError) {
  const fs::path dir = scratch("bc_mismatch");
  write_json(dir / "exact.json", base_config("quadratic_box", 30));
  nlohmann::json m = base_config("quadratic_box", 30);
  m["solver"]["oracle"] = {{"kind", "multiplicative"}, {"delta", 0.5}};
  write_json(dir / "mult.json", m);
  Captured s, b;
  ASSERT_EQ(cli::cmd_solve((dir / "exact.json").string(), (dir / "t.csv").string(), s.io()), cli::kExitOk);
  EXPECT_EQ(cli::cmd_bounds_check((dir / "mult.json").string(), (dir / "t.csv").string(), b.io()), cli::kExitConfig);
}

TEST(BoundsCheck, MultiplicativeOracleRun) {
  const fs::path dir = scratch("bc_mult");
  nlohmann::json m = base_config("quadratic_box", 500);
  m["solver"]["oracle"] = {{"kind", "multiplicative"}, {"delta", 0.5}};
  write_json(dir / "c.json", m);
  Captured s, b;
  ASSERT_EQ(cli::cmd_solve((dir / "c.json").string(), (dir / "t.csv").string(), s.io()), cli::kExitOk);
  ASSERT_EQ(cli::cmd_bounds_check((dir / "c.json").string(), (dir / "t.csv").string(), b.io()), cli::kExitOk)
      << b.out.str() << b.err.str();
  EXPECT_NE(b.out.str().find("ALL BOUNDS HOLD"), std::string::npos);
}

TEST(BoundsCheck, IndicatorProblemWithEstimatedDualNorm) {
  const fs::path dir = scratch("bc_ind");
  nlohmann::json c = base_config("clustering", 200);
  c["problem"]["params"] = {{"n", 12}};
  c["bounds"] = {{"y_star_norm", "estimate"}};
  write_json(dir / "c.json", c);
  Captured s, b;
  ASSERT_EQ(cli::cmd_solve((dir / "c.json").string(), (dir / "t.csv").string(), s.io()), cli::kExitOk);
  ASSERT_EQ(cli::cmd_bounds_check((dir / "c.json").string(), (dir / "t.csv").string(), b.io()), cli::kExitOk)
      << b.out.str() << b.err.str();
  EXPECT_NE(b.out.str().find("feasibility-gap: 200 rows"), std::string::npos);
  EXPECT_NE(b.out.str().find("skipped: objective bounds"), std::string::npos);
}

// demo ---------------------------------------------------------------------------------------

TEST(Demo, UnknownNameListsChoices) {
  Captured c;
  EXPECT_EQ(cli::cmd_demo("nonesuch", 0, 10, scratch("demo_bad").string(), c.io()), cli::kExitConfig);
  EXPECT_NE(c.err.str().find("counterexample"), std::string::npos);
}

TEST(Demo, CounterexampleWritesBothTraces) {
  const fs::path dir = scratch("demo_ce");
  Captured c;
  ASSERT_EQ(cli::cmd_demo("counterexample", 0, 200, dir.string(), c.io()), cli::kExitOk);
  EXPECT_EQ(read_trace_csv((dir / "counterexample.csv").string()).size(), 200u);
  EXPECT_TRUE(fs::exists(dir / "counterexample_config.json"));
  const std::string classical = slurp(dir / "classical.csv");
  EXPECT_EQ(classical.rfind("k,x1,x2,value,gap\n", 0), 0u);
  EXPECT_EQ(std::count(classical.begin(), classical.end(), '\n'), 202);
  // the written config reproduces the trace
  Captured r;
  ASSERT_EQ(cli::cmd_solve((dir / "counterexample_config.json").string(), (dir / "again.csv").string(), r.io()), cli::kExitOk);
  EXPECT_EQ(slurp(dir / "again.csv"), slurp(dir / "counterexample.csv"));
}

TEST(Demo, RpcaWritesBothLosses) {
  const fs::path dir = scratch("demo_rpca");
  Captured c;
  ASSERT_EQ(cli::cmd_demo("rpca", 4, 50, dir.string(), c.io()), cli::kExitOk);
  EXPECT_TRUE(fs::exists(dir / "rpca_ls.csv"));
  EXPECT_TRUE(fs::exists(dir / "rpca_lad.csv"));
  EXPECT_NE(slurp(dir / "rpca_summary.csv").find("lad,"), std::string::npos);
}

// executable -------------------------------------------------------------------------------------

TEST(Binary, ExitCodes) {
  const fs::path dir = scratch("binary");
  write_json(dir / "c.json", base_config("counterexample", 30));
  const std::string cfg = (dir / "c.json").string(), out = (dir / "t.csv").string();
  EXPECT_EQ(run_binary("solve --config " + cfg + " --out " + out), 0);
  EXPECT_EQ(run_binary("bounds-check --config " + cfg + " --trace " + out), 0);
  EXPECT_EQ(run_binary("demo nonesuch --out " + dir.string()), 2);
  EXPECT_EQ(run_binary("frobnicate"), 2);
  EXPECT_EQ(run_binary("solve"), 2);
  auto trace = read_trace_csv(out);
  trace.back().F_or_nan += 10.0;
  write_trace_csv(out, trace, 1);
  EXPECT_EQ(run_binary("bounds-check --config " + cfg + " --trace " + out), 1);
}

TEST(Binary, BatchWithJobs) {
  const fs::path dir = scratch("binary_batch");
  write_json(dir / "a.json", base_config("counterexample", 10, (dir / "a.csv").string()));
  write_json(dir / "b.json", base_config("quadratic_box", 10, (dir / "b.csv").string()));
  EXPECT_EQ(run_binary("solve --jobs 2 --config " + (dir / "a.json").string() + " --config " + (dir / "b.json").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "a.csv"));
  EXPECT_TRUE(fs::exists(dir / "b.csv"));
  EXPECT_EQ(run_binary("solve --jobs 2 --config " + (dir / "a.json").string() + " --out " + (dir / "x.csv").string()), 2);
}
