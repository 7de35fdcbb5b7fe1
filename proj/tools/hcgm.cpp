// hcgm command-line front end.

#include "hcgm/cli.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  namespace cli = hcgm::cli;
  CLI::App app{"Homotopy conditional gradient solver"};
  app.require_subcommand(1);
  int jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads for batch solves")->check(CLI::PositiveNumber);

  std::vector<std::string> configs;
  std::string out;
  auto* solve = app.add_subcommand("solve", "Run one or more configurations and write traces");
  solve->add_option("--config", configs, "Run configuration (repeat for a batch)")->required();
  solve->add_option("--out", out, "Trace CSV path (single config only)");
  solve->add_option("--jobs", jobs, "Worker threads for batch solves")->check(CLI::PositiveNumber);

  std::string demo_name, demo_out;
  std::uint64_t seed = 0;
  int iters = 1000;
  auto* demo = app.add_subcommand("demo", "Run a canned experiment");
  demo->add_option("name", demo_name, "counterexample | quadratic_box | clustering | rpca | game")->required();
  demo->add_option("--seed", seed, "Data and solver seed");
  demo->add_option("--iters", iters, "Iteration budget");
  demo->add_option("--out", demo_out, "Output directory")->required();

  std::string bc_config, bc_trace;
  auto* bounds = app.add_subcommand("bounds-check", "Check a trace against the convergence bounds");
  bounds->add_option("--config", bc_config, "Run configuration")->required();
  bounds->add_option("--trace", bc_trace, "Trace CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  cli::Streams io{std::cout, std::cerr, cli::log_level_from_env()};
  try {
    if (*solve) {
      if (configs.size() == 1 && jobs == 1) return cli::cmd_solve(configs[0], out, io);
      if (!out.empty()) {
        std::cerr << "error: --out applies to a single config; batch runs use output.trace\n";
        return cli::kExitConfig;
      }
      return cli::cmd_solve_batch(configs, jobs, io);
    }
    if (*demo) return cli::cmd_demo(demo_name, seed, iters, demo_out, io);
    if (*bounds) return cli::cmd_bounds_check(bc_config, bc_trace, io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitConfig;
  }
  return cli::kExitConfig;
}
