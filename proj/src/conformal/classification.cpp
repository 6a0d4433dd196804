#include <algorithm>
#include <stdexcept>

#include "pmon/conformal.hpp"

namespace pmon::conformal {

ClassifierCalibration ClassifierCalibration::build(const std::vector<std::vector<double>>& likelihoods,
                                                   std::span<const std::size_t> labels, bool label_conditional) {
  if (likelihoods.size() != labels.size()) throw std::invalid_argument("likelihoods and labels differ in length");
  ClassifierCalibration c;
  c.label_conditional = label_conditional;
  c.num_labels = likelihoods.empty() ? 2 : likelihoods.front().size();
  std::vector<double> scores;
  scores.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (likelihoods[i].size() != c.num_labels) throw std::invalid_argument("ragged likelihood vectors");
    scores.push_back(ncf_classification(likelihoods[i], labels[i]));
  }
  if (label_conditional) {
    c.by_label = LabelConditionalScores(scores, labels, c.num_labels);
  } else {
    c.pooled = CalibrationScores(std::move(scores), "1 - f_d(true label)");
  }
  return c;
}

std::vector<double> ClassifierCalibration::p_values(std::span<const double> likelihoods,
                                                    std::span<const double> thetas) const {
  if (likelihoods.size() != num_labels || thetas.size() != num_labels) {
    throw std::invalid_argument("need one likelihood and one theta per label");
  }
  std::vector<double> p(num_labels);
  for (std::size_t j = 0; j < num_labels; ++j) {
    const double a = ncf_classification(likelihoods, j);
    p[j] = label_conditional ? p_value_label_conditional(by_label, a, j, thetas[j])
                             : p_value_smoothed(pooled, a, thetas[j]);
  }
  return p;
}

std::string_view to_string(ThetaMode m) {
  switch (m) {
    case ThetaMode::Shared: return "shared";
    case ThetaMode::PerLabel: return "per-label";
    case ThetaMode::Conservative: return "conservative";
  }
  return "?";
}

ThetaMode parse_theta_mode(std::string_view s) {
  for (ThetaMode m : {ThetaMode::Shared, ThetaMode::PerLabel, ThetaMode::Conservative}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("theta mode must be shared|per-label|conservative");
}

std::vector<double> draw_thetas(std::size_t num_labels, ThetaMode mode, Rng* rng) {
  std::vector<double> t(num_labels, 1.0);
  if (mode == ThetaMode::Conservative) return t;
  if (!rng) throw std::invalid_argument("smoothed p-values need a theta stream");
  if (mode == ThetaMode::Shared) {
    std::fill(t.begin(), t.end(), rng->uniform());
  } else {
    for (double& v : t) v = rng->uniform();
  }
  return t;
}

bool ClassRegion::contains(std::size_t label) const {
  return std::binary_search(labels.begin(), labels.end(), label);
}

ClassRegion region_from_p_values(std::vector<double> p_values, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  ClassRegion r;
  r.epsilon = epsilon;
  for (std::size_t j = 0; j < p_values.size(); ++j) {
    if (p_values[j] > epsilon) r.labels.push_back(j);
  }
  r.p_values = std::move(p_values);
  return r;
}

ClassRegion class_region(std::span<const double> likelihoods, const ClassifierCalibration& cal, double epsilon,
                         ThetaMode mode, Rng* theta_rng) {
  const auto thetas = draw_thetas(cal.num_labels, mode, theta_rng);
  return region_from_p_values(cal.p_values(likelihoods, thetas), epsilon);
}

UncertaintyScore confidence_credibility(std::span<const double> p_values) {
  if (p_values.size() < 2) throw std::invalid_argument("confidence needs at least two labels");
  std::vector<double> p(p_values.begin(), p_values.end());
  std::partial_sort(p.begin(), p.begin() + 2, p.end(), std::greater<>());
  return {1.0 - p[1], p[0]};
}

}  // namespace pmon::conformal
