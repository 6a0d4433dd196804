#pragma once

// Experiment configuration and the subcommands behind the `pmon` binary.
//
// Experiment file (key = value under section headers, `#` comments):
//
//   [experiment]  problem = fo | po-end2end | po-twostep | stochastic
//                 semantics = boolean | space | time-left | time-right
//                 system = builtin:avoid | builtin:avoid-stochastic |
//                          builtin:switching | <path to system file>
//                 formula = <STL text>        (builtin:avoid* default to the avoid property)
//                 seed = <uint64>   output = <dir>   threads = <n>
//   [data]        N, N_test, M, M_test, H_f, H_p, sampling, run_length
//   [observation] indices = 0,1   noise_std = 0.01,0.01
//   [conformal]   epsilon, split = train,cal,val, label_conditional, theta,
//                 normalizer = none|residual, cqr_calibration = single|all,
//                 conformal_estimator
//   [train]       learning_rate, epochs, batch_size, momentum, hidden = 64,64,
//                 collapsed_quantiles
//   [rejection]   enabled, error_kind = any|fp|fn
//   [active]      rounds, budget, pool
//   [avoid]       overrides for the builtin avoid parameters
//
// Relative paths are resolved against the experiment file's directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pmon/hybrid.hpp"
#include "pmon/monitor.hpp"
#include "pmon/sat.hpp"
#include "pmon/stl.hpp"

namespace pmon::cli {

enum class Problem { FullObs, PoEnd2End, PoTwoStep, Stochastic };
std::string_view to_string(Problem p);

struct Experiment {
  std::filesystem::path source;  // experiment file, empty when parsed from text
  Problem problem = Problem::FullObs;
  stl::RobustnessKind semantics = stl::RobustnessKind::Boolean;
  std::string system_ref;
  std::string formula_text;
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";
  std::size_t threads = 1;

  std::size_t n = 1000;
  std::size_t n_test = 1000;
  std::size_t m = 50;
  std::size_t m_test = 0;  // 0 means 10 * m
  std::size_t horizon = 50;
  sat::PoOptions po;

  std::vector<std::size_t> obs_indices;  // empty: identity
  std::vector<double> obs_noise;

  monitor::MonitorConfig monitor;
  bool rejection = true;
  monitor::ErrorKind error_kind = monitor::ErrorKind::Any;
  std::size_t active_rounds = 0;
  std::size_t active_budget = 100;
  std::size_t active_pool = 2000;

  hybrid::AvoidParams avoid;

  // Resolved by load/parse.
  hybrid::HybridSystem system;
  stl::Formula formula;
};

// Throws ConfigError for malformed or out-of-range settings; formula parse
// errors are reported with their character position.
Experiment parse_experiment(const std::string& text, const std::filesystem::path& base_dir,
                            const std::string& origin = "<string>");
Experiment load_experiment(const std::filesystem::path& path);

struct SimulateResult {
  std::vector<std::filesystem::path> trajectories;
  std::filesystem::path labels;
};
// Writes traj_<i>.csv for i < k plus labels.csv (trajectory index, initial
// mode and state, oracle value) into the output directory.
SimulateResult cmd_simulate(const Experiment& e, std::size_t k);

struct RunResult {
  std::filesystem::path report;
  std::filesystem::path manifest;
  monitor::Evaluation evaluation;
};
// Full pipeline: data, training, calibration, optional rejection rule and
// active learning, evaluation on a fresh test set. Writes report.csv,
// manifest.txt, calibration.csv and the model checkpoints.
RunResult cmd_run(const Experiment& e, std::ostream& log);

struct CoverageSummary {
  double coverage = 0.0;
  double efficiency = 0.0;
  std::size_t n = 0;
  std::string line() const;  // coverage=<v> efficiency=<w> n=<k>
};
// Recomputes coverage and efficiency from a report. Classification rows are
// re-thresholded at epsilon from their stored p-values. Throws
// std::runtime_error on malformed or empty reports.
CoverageSummary cmd_coverage(const std::filesystem::path& report, double epsilon);

}  // namespace pmon::cli
