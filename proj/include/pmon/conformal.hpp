#pragma once

// Split conformal prediction: smoothed and label-conditional p-values,
// classification regions with confidence/credibility, and regression
// intervals (plain, normalized, conformalized quantile regression).

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmon/rng.hpp"

namespace pmon::conformal {

// Nonconformity scores of a calibration set, kept sorted in descending order.
class CalibrationScores {
 public:
  CalibrationScores() = default;
  explicit CalibrationScores(std::vector<double> scores, std::string description = {});

  std::size_t size() const { return desc_.size(); }
  bool empty() const { return desc_.empty(); }
  const std::vector<double>& descending() const { return desc_; }
  const std::string& description() const { return description_; }
  // Exact comparisons; ties count as equal only when bit-for-bit equal values.
  std::size_t count_greater(double a) const;
  std::size_t count_equal(double a) const;

 private:
  std::vector<double> desc_;
  std::string description_;
};

// delta(x, t^j) = 1 - f_d^j(x)
double ncf_classification(std::span<const double> likelihoods, std::size_t label);

// (#{a_i > a*} + theta (#{a_i = a*} + 1)) / (n + 1)
double p_value_smoothed(const CalibrationScores& cal, double alpha_star, double theta);

// One score set per label, built from (score, true label) pairs.
class LabelConditionalScores {
 public:
  LabelConditionalScores() = default;
  LabelConditionalScores(std::span<const double> scores, std::span<const std::size_t> labels,
                         std::size_t num_labels);
  std::size_t num_labels() const { return per_label_.size(); }
  const CalibrationScores& for_label(std::size_t j) const { return per_label_.at(j); }

 private:
  std::vector<CalibrationScores> per_label_;
};

double p_value_label_conditional(const LabelConditionalScores& cal, double alpha_star, std::size_t label,
                                 double theta);

// Calibration for a classifier: scores of the true labels, either pooled or
// split by label.
struct ClassifierCalibration {
  bool label_conditional = false;
  std::size_t num_labels = 2;
  CalibrationScores pooled;
  LabelConditionalScores by_label;

  static ClassifierCalibration build(const std::vector<std::vector<double>>& likelihoods,
                                     std::span<const std::size_t> labels, bool label_conditional);
  // One p-value per label for a test point; thetas holds one value per label.
  std::vector<double> p_values(std::span<const double> likelihoods, std::span<const double> thetas) const;
};

// Tie-breaking draws for one test point. Shared uses a single theta for all
// labels, which keeps p-values ordered like the likelihoods (a singleton
// region is then always the most likely label). Conservative fixes theta = 1.
enum class ThetaMode { Shared, PerLabel, Conservative };
std::string_view to_string(ThetaMode m);
ThetaMode parse_theta_mode(std::string_view s);
std::vector<double> draw_thetas(std::size_t num_labels, ThetaMode mode, Rng* rng);

struct ClassRegion {
  double epsilon = 0.0;
  std::vector<double> p_values;
  std::vector<std::size_t> labels;  // ascending

  bool contains(std::size_t label) const;
  std::size_t size() const { return labels.size(); }
};

ClassRegion region_from_p_values(std::vector<double> p_values, double epsilon);
// rng is required unless mode is Conservative.
ClassRegion class_region(std::span<const double> likelihoods, const ClassifierCalibration& cal, double epsilon,
                         ThetaMode mode, Rng* theta_rng);

struct UncertaintyScore {
  double confidence = 0.0;   // 1 - second largest p-value
  double credibility = 0.0;  // largest p-value
};
UncertaintyScore confidence_credibility(std::span<const double> p_values);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double t) const { return lower <= t && t <= upper; }
};

// floor(eps (n + 1))-th largest score. Throws std::invalid_argument when that
// index is 0 (calibration set too small for the requested coverage) or > n.
double critical_score(const CalibrationScores& cal, double epsilon);

// |t - f(x)|
CalibrationScores residual_scores(std::span<const double> predictions, std::span<const double> targets);
Interval interval_plain(double prediction, const CalibrationScores& cal, double epsilon);

constexpr double kNormalizerFloor = 1e-6;
// |t - f(x)| / max(u(x), floor)
CalibrationScores normalized_scores(std::span<const double> predictions, std::span<const double> normalizers,
                                    std::span<const double> targets);
Interval interval_normalized(double prediction, double normalizer, const CalibrationScores& cal, double epsilon);

// max(q_lo(x) - t, t - q_hi(x))
double cqr_score(double q_lo, double q_hi, double t);
CalibrationScores cqr_scores(std::span<const double> q_lo, std::span<const double> q_hi,
                             std::span<const double> targets);
// ceil((1 - eps)(n + 1))-th smallest score; may be negative.
double cqr_tau(const CalibrationScores& cal, double epsilon);
Interval cqr_interval(double q_lo, double q_hi, const CalibrationScores& cal, double epsilon);

// CSV: a `# n=<n> delta=<description>` line, a `score` header, one score per
// line in descending order.
void write_scores_csv(const std::filesystem::path& path, const CalibrationScores& cal);
CalibrationScores read_scores_csv(const std::filesystem::path& path);

}  // namespace pmon::conformal
