#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pmon/conformal.hpp"

namespace pmon::conformal {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("prediction and target vectors differ in length");
}

// eps * (n + 1) computed in floating point can land a hair below an integer
// (0.7 * 10 = 6.999...); round those back up before taking floor/ceil.
double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

}  // namespace

double critical_score(const CalibrationScores& cal, double epsilon) {
  check_epsilon(epsilon);
  const double n1 = static_cast<double>(cal.size() + 1);
  const auto k = static_cast<std::size_t>(std::floor(snap(epsilon * n1)));
  if (k == 0) {
    throw std::invalid_argument("calibration set of size " + std::to_string(cal.size()) +
                                " is too small for epsilon " + std::to_string(epsilon));
  }
  if (k > cal.size()) throw std::invalid_argument("critical score index exceeds calibration size");
  return cal.descending()[k - 1];
}

CalibrationScores residual_scores(std::span<const double> predictions, std::span<const double> targets) {
  check_lengths(predictions.size(), targets.size());
  std::vector<double> s(targets.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::abs(targets[i] - predictions[i]);
  return CalibrationScores(std::move(s), "|t - f(x)|");
}

Interval interval_plain(double prediction, const CalibrationScores& cal, double epsilon) {
  const double a = critical_score(cal, epsilon);
  return {prediction - a, prediction + a};
}

CalibrationScores normalized_scores(std::span<const double> predictions, std::span<const double> normalizers,
                                    std::span<const double> targets) {
  check_lengths(predictions.size(), targets.size());
  check_lengths(normalizers.size(), targets.size());
  std::vector<double> s(targets.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = std::abs(targets[i] - predictions[i]) / std::max(normalizers[i], kNormalizerFloor);
  }
  return CalibrationScores(std::move(s), "|t - f(x)| / u(x)");
}

Interval interval_normalized(double prediction, double normalizer, const CalibrationScores& cal, double epsilon) {
  const double half = critical_score(cal, epsilon) * std::max(normalizer, kNormalizerFloor);
  return {prediction - half, prediction + half};
}

double cqr_score(double q_lo, double q_hi, double t) { return std::max(q_lo - t, t - q_hi); }

CalibrationScores cqr_scores(std::span<const double> q_lo, std::span<const double> q_hi,
                             std::span<const double> targets) {
  check_lengths(q_lo.size(), targets.size());
  check_lengths(q_hi.size(), targets.size());
  std::vector<double> s(targets.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = cqr_score(q_lo[i], q_hi[i], targets[i]);
  return CalibrationScores(std::move(s), "max(q_lo(x) - t, t - q_hi(x))");
}

double cqr_tau(const CalibrationScores& cal, double epsilon) {
  check_epsilon(epsilon);
  const double n1 = static_cast<double>(cal.size() + 1);
  const auto k = static_cast<std::size_t>(std::ceil(snap((1.0 - epsilon) * n1)));
  if (k == 0 || k > cal.size()) {
    throw std::invalid_argument("calibration set of size " + std::to_string(cal.size()) +
                                " is too small for epsilon " + std::to_string(epsilon));
  }
  // k-th smallest in a descending array
  return cal.descending()[cal.size() - k];
}

Interval cqr_interval(double q_lo, double q_hi, const CalibrationScores& cal, double epsilon) {
  const double tau = cqr_tau(cal, epsilon);
  Interval iv{q_lo - tau, q_hi + tau};
  // a negative tau larger than half the band would invert it
  if (iv.lower > iv.upper) iv.lower = iv.upper = 0.5 * (iv.lower + iv.upper);
  return iv;
}

}  // namespace pmon::conformal
