#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "config.hpp"
#include "pmllab/errors.hpp"
#include "pmllab/suite.hpp"
#include "runner.hpp"

using namespace pmllab;

int main(int argc, char** argv) {
  CLI::App app{"pmllab: PML experiments and verification checks for the split Pauli system"};
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  double tolerance_scale = -1.0;
  bool list = false;
  app.add_option("config", config_path, "experiment config file");
  app.add_option("--out", out, "output directory (overrides [experiment] output)");
  app.add_option("--seed", seed, "random seed (overrides [experiment] seed)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tolerance-scale", tolerance_scale, "multiplier for every residual tolerance")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--list", list, "list the available checks and suites");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kRuntimeError;
  }

  if (list) {
    std::cout << "kinds: timedomain, freqdomain, suite, check:<name>\n"
              << "suites: identities (1-6), solvers (7-12), all\n"
              << "checks:\n";
    for (const SuiteEntry& e : standard_checks()) {
      std::cout << fmt::format("  {:2d} {:20s} {} (budget {:g} s)\n", e.number, e.name, e.summary, e.budget_seconds);
    }
    return 0;
  }
  if (config_path.empty()) {
    std::cerr << "error: a config file is required (see --help)\n";
    return cli::kRuntimeError;
  }

  cli::ExperimentConfig config;
  try {
    config = cli::parse_config(config_path);
  } catch (const ParseError& e) {
    std::cerr << "config syntax errors:\n" << e.what() << "\n";
    return cli::kRuntimeError;
  } catch (const ValidationError& e) {
    std::cerr << "config validation errors:\n" << e.what() << "\n";
    return cli::kRuntimeError;
  }
  if (!out.empty()) config.output = out;
  if (app.count("--seed")) config.seed = seed;
  if (threads > 0) config.threads = threads;
  if (tolerance_scale >= 0.0) config.tolerance_scale = tolerance_scale;
  return cli::run_experiment(config, std::cout);
}
