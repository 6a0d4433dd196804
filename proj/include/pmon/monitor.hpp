#pragma once

// Predictive monitors: a learned predictor plus conformal calibration, for
// full observability, partial observability (end-to-end or through a state
// estimator) and stochastic systems (conformalized quantile regression).
// Also the uncertainty-based rejection rule and active learning.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pmon/conformal.hpp"
#include "pmon/hybrid.hpp"
#include "pmon/learn.hpp"
#include "pmon/sat.hpp"

namespace pmon::monitor {

enum class MonitorKind { FoClassifier, FoRegressor, PoEnd2End, PoTwoStep, Stochastic };
std::string_view to_string(MonitorKind k);

struct SplitFractions {
  double train = 0.6;
  double cal = 0.2;
  double val = 0.2;
  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train, cal, val;
  // Throws std::logic_error unless the three parts partition [0, n).
  void check_partition(std::size_t n) const;
};

// Seeded shuffle of [0, n) cut into consecutive parts.
SplitIndices make_split(std::size_t n, const SplitFractions& f, std::uint64_t seed);

enum class NormalizerKind { None, Residual };
// Calibration targets for the stochastic monitor: one rollout per state
// (exchangeable with a fresh rollout) or every stored rollout.
enum class CalibrationSamples { Single, All };

struct MonitorConfig {
  double epsilon = 0.1;
  SplitFractions split;
  learn::TrainConfig train;
  bool label_conditional = false;
  conformal::ThetaMode theta = conformal::ThetaMode::Shared;
  NormalizerKind normalizer = NormalizerKind::None;
  CalibrationSamples cqr_calibration = CalibrationSamples::Single;
  // Two-step PO: also calibrate the state estimator on the last state.
  bool conformal_estimator = false;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct Query {
  bool classification = false;
  double prediction = 0.0;  // p(satisfied), point estimate, or median quantile
  int label = -1;           // classification only
  conformal::ClassRegion region;
  conformal::UncertaintyScore uncertainty;
  conformal::Interval interval;
  std::array<double, 3> quantiles{};  // stochastic quantile monitor
  std::vector<conformal::Interval> state_intervals;  // two-step with conformal_estimator
};

class Monitor {
 public:
  MonitorKind kind = MonitorKind::FoClassifier;
  bool classification = true;
  double epsilon = 0.1;
  conformal::ThetaMode theta = conformal::ThetaMode::Shared;
  learn::Model predictor;
  std::optional<learn::Model> normalizer;
  std::optional<learn::Model> estimator;
  std::size_t state_dim = 0;  // two-step: width of one reconstructed state
  conformal::ClassifierCalibration class_cal;
  conformal::CalibrationScores reg_cal;
  std::vector<conformal::CalibrationScores> estimator_cal;

  // theta_rng is only used by smoothed classifiers.
  Query query(std::span<const double> x, Rng* theta_rng) const;
  // Predictor input after the optional state-estimation step.
  std::vector<double> predictor_input(std::span<const double> x) const;
};

// Trains on `train`, calibrates on `cal`. The datasets must match the kind.
Monitor fit_monitor(MonitorKind kind, const sat::Dataset& train, const sat::Dataset& cal, const MonitorConfig& cfg);

struct Build {
  Monitor monitor;
  sat::Dataset data;  // full generated dataset
  SplitIndices split;
  sat::Dataset train, cal, val;
  bool coverage_guaranteed = true;  // false under sequential PO sampling
};

Build build_from_dataset(MonitorKind kind, sat::Dataset data, const MonitorConfig& cfg);
Build build_fo_monitor(const hybrid::HybridSystem& sys, const stl::Formula& phi, stl::RobustnessKind kind,
                       std::size_t n, std::size_t horizon, const MonitorConfig& cfg);
enum class PoMode { End2End, TwoStep };
Build build_po_monitor(const hybrid::HybridSystem& sys, const stl::Formula& phi, const hybrid::ObservationProcess& obs,
                       PoMode mode, stl::RobustnessKind kind, std::size_t n, const sat::PoOptions& po,
                       const MonitorConfig& cfg);
Build build_stochastic_monitor(const hybrid::HybridSystem& sys, const stl::Formula& phi, stl::RobustnessKind kind,
                               std::size_t n, std::size_t m, std::size_t horizon, const MonitorConfig& cfg);

// --- evaluation -----------------------------------------------------------------

struct EvalRow {
  std::size_t index = 0;
  Query query;
  double truth = 0.0;    // label, robustness, or mean over rollouts
  double covered = 0.0;  // 0/1, or fraction of rollouts inside the interval
  bool correct = true;   // classification: predicted label == truth
  bool rejected = false;
};

struct Evaluation {
  std::vector<EvalRow> rows;
  double coverage = 0.0;
  double efficiency = 0.0;  // mean region size or mean interval width
  double accuracy = 0.0;    // classification; sign agreement for regression
  double rejection_rate = 0.0;
  double retained_error = 0.0;  // error rate among non-rejected rows
};

struct RejectionRule;
// Coverage is the row mean of `covered` and efficiency the row mean of region
// size / width, summed in row order (cmd_coverage reproduces both exactly).
Evaluation evaluate(const Monitor& m, const sat::Dataset& test, std::uint64_t theta_seed,
                    const RejectionRule* rule = nullptr, std::size_t threads = 1);

// --- rejection --------------------------------------------------------------------

enum class ErrorKind { Any, FalsePositive, FalseNegative };
std::string_view to_string(ErrorKind k);
ErrorKind parse_error_kind(std::string_view s);

// Positive means "predicted satisfied": label 1 or point prediction > 0.
bool is_error(const Query& q, double truth, ErrorKind kind);

struct RejectionRule {
  bool classification = true;
  ErrorKind error_kind = ErrorKind::Any;
  // Classification: reject when confidence < min_confidence or credibility < min_credibility.
  double min_confidence = 0.0;
  double min_credibility = 0.0;
  // Regression: reject when the interval is wider than max_width.
  double max_width = std::numeric_limits<double>::infinity();
  double detection_error = 0.0;  // on the validation set it was fitted on

  bool rejects(const Query& q) const;
};

// Grid search over thresholds minimizing the empirical rate of
// (is_error != rejects); ties go to the rule rejecting more.
RejectionRule fit_rejection_rule(const Monitor& m, const sat::Dataset& val, ErrorKind kind, std::uint64_t theta_seed);

// --- active learning ------------------------------------------------------------------

// Indices of the k most uncertain pool inputs: lowest confidence then lowest
// credibility for classifiers, widest interval for regressors. Stable order.
std::vector<std::size_t> most_uncertain(const Monitor& m, const std::vector<std::vector<double>>& pool, std::size_t k,
                                        std::uint64_t theta_seed);

using Oracle = std::function<sat::SatLabel(const hybrid::State&)>;

struct ActiveRound {
  Monitor monitor;
  sat::Dataset train;  // augmented
  std::vector<std::size_t> selected;  // indices into the pool
};

// Labels the k most uncertain pool states, retrains on train + queried points
// and recalibrates on the untouched calibration set.
ActiveRound active_learning_round(const Monitor& m, const hybrid::HybridSystem& sys, const sat::Dataset& train,
                                  const sat::Dataset& cal, const std::vector<hybrid::State>& pool, std::size_t k,
                                  const Oracle& oracle, const MonitorConfig& cfg);

// --- manifest -----------------------------------------------------------------------

constexpr const char* kManifestHeader = "pmon-manifest v1";

struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;  // insertion order
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::size_t value);
  const std::string* find(const std::string& key) const;
  void write(std::ostream& out) const;
  static Manifest parse(const std::string& text);
};

}  // namespace pmon::monitor
