// pmon: predictive monitoring experiments from the command line.
//
//   pmon simulate <experiment> [--traj k] [--output dir]
//   pmon run <experiment> [--output dir] [--quiet]
//   pmon coverage <report.csv> --epsilon e
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or parse error.

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pmon/cli.hpp"
#include "pmon/kv_config.hpp"

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kConfigError = 2;

pmon::cli::Experiment load(const std::string& path, const std::string& output) {
  auto e = pmon::cli::load_experiment(path);
  if (!output.empty()) e.output = output;
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive monitoring with conformal guarantees"};
  app.require_subcommand(1);

  std::string config, output, report;
  std::size_t traj = 1;
  double epsilon = 0.1;
  bool quiet = false;

  auto* sim = app.add_subcommand("simulate", "Simulate trajectories and label them with the oracle");
  sim->add_option("config", config, "Experiment file")->required();
  sim->add_option("--traj", traj, "Number of trajectories")->check(CLI::PositiveNumber);
  sim->add_option("--output", output, "Output directory (overrides the experiment file)");

  auto* run = app.add_subcommand("run", "Build, calibrate and evaluate a monitor");
  run->add_option("config", config, "Experiment file")->required();
  run->add_option("--output", output, "Output directory (overrides the experiment file)");
  run->add_flag("--quiet", quiet, "Suppress progress messages");

  auto* cov = app.add_subcommand("coverage", "Recompute coverage and efficiency from a report");
  cov->add_option("report", report, "Report CSV written by `run`")->required();
  cov->add_option("--epsilon", epsilon, "Significance level used to threshold p-values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*sim) {
      auto res = pmon::cli::cmd_simulate(load(config, output), traj);
      std::cout << "wrote " << res.trajectories.size() << " trajectories and " << res.labels.string() << "\n";
    } else if (*run) {
      std::ostringstream sink;
      auto res = pmon::cli::cmd_run(load(config, output), quiet ? static_cast<std::ostream&>(sink) : std::cerr);
      std::cout << res.manifest.string() << "\n";
    } else if (*cov) {
      std::cout << pmon::cli::cmd_coverage(report, epsilon).line() << "\n";
    }
  } catch (const pmon::ConfigError& e) {
    std::cerr << "pmon: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "pmon: error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return 0;
}
