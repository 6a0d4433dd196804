#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "pmon/conformal.hpp"

namespace pmon::conformal {

CalibrationScores::CalibrationScores(std::vector<double> scores, std::string description)
    : desc_(std::move(scores)), description_(std::move(description)) {
  for (double s : desc_) {
    if (!std::isfinite(s)) throw std::invalid_argument("calibration scores must be finite");
  }
  std::sort(desc_.begin(), desc_.end(), std::greater<>());
}

std::size_t CalibrationScores::count_greater(double a) const {
  return static_cast<std::size_t>(std::lower_bound(desc_.begin(), desc_.end(), a, std::greater<>()) - desc_.begin());
}

std::size_t CalibrationScores::count_equal(double a) const {
  auto [lo, hi] = std::equal_range(desc_.begin(), desc_.end(), a, std::greater<>());
  return static_cast<std::size_t>(hi - lo);
}

double ncf_classification(std::span<const double> likelihoods, std::size_t label) {
  if (label >= likelihoods.size()) throw std::out_of_range("label index out of range");
  return 1.0 - likelihoods[label];
}

double p_value_smoothed(const CalibrationScores& cal, double alpha_star, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0,1]");
  const double n1 = static_cast<double>(cal.size() + 1);
  const double greater = static_cast<double>(cal.count_greater(alpha_star));
  const double equal = static_cast<double>(cal.count_equal(alpha_star));
  return greater / n1 + theta * (equal + 1.0) / n1;
}

LabelConditionalScores::LabelConditionalScores(std::span<const double> scores, std::span<const std::size_t> labels,
                                               std::size_t num_labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  std::vector<std::vector<double>> split(num_labels);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] >= num_labels) throw std::out_of_range("calibration label out of range");
    split[labels[i]].push_back(scores[i]);
  }
  for (auto& s : split) per_label_.emplace_back(std::move(s));
}

double p_value_label_conditional(const LabelConditionalScores& cal, double alpha_star, std::size_t label,
                                 double theta) {
  if (label >= cal.num_labels()) throw std::out_of_range("label index out of range");
  return p_value_smoothed(cal.for_label(label), alpha_star, theta);
}

}  // namespace pmon::conformal
