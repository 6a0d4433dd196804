#include <algorithm>
#include <cmath>
#include <numeric>

#include "pmon/sat.hpp"

namespace pmon::sat {

SatLabel SatLabel::samples(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("sample label must be non-empty");
  return {Kind::Samples, std::move(v)};
}

double SatLabel::scalar() const {
  if (kind == Kind::Samples) throw std::logic_error("sample-vector label has no scalar value");
  return values.front();
}

double SatLabel::mean() const {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

namespace {

void check_horizon(const stl::Formula& phi, std::size_t horizon) {
  if (static_cast<std::size_t>(stl::horizon(phi)) > horizon) {
    throw std::invalid_argument("formula horizon " + std::to_string(stl::horizon(phi)) +
                                " exceeds simulation horizon " + std::to_string(horizon));
  }
}

}  // namespace

double sat_value(const HybridSystem& sys, const State& s0, const stl::Formula& phi, std::size_t horizon,
                 RobustnessKind kind, Rng* rng) {
  check_horizon(phi, horizon);
  stl::Signal traj = hybrid::simulate(sys, s0, horizon, rng);
  return stl::eval(phi, traj, 0, kind);
}

SatLabel sat_deterministic(const HybridSystem& sys, const State& s0, const stl::Formula& phi,
                           std::size_t horizon, RobustnessKind kind) {
  if (sys.is_stochastic()) throw std::invalid_argument("sat_deterministic needs a deterministic system");
  double v = sat_value(sys, s0, phi, horizon, kind, nullptr);
  return kind == RobustnessKind::Boolean ? SatLabel::boolean(v > 0.5) : SatLabel::real(v);
}

std::vector<double> ssat_empirical(const HybridSystem& sys, const State& s0, const stl::Formula& phi,
                                   std::size_t horizon, std::size_t m, RobustnessKind kind, Rng& rng) {
  if (m == 0) throw std::invalid_argument("need at least one rollout (M >= 1)");
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = sat_value(sys, s0, phi, horizon, kind, &rng);
  return out;
}

double empirical_quantile(std::span<const double> values, double level) {
  if (values.empty()) throw std::invalid_argument("empirical quantile of an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(level * m));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

std::vector<double> encode_state(const HybridSystem& sys, const State& s) {
  std::vector<double> x(s.values);
  if (sys.modes.size() > 1) x.push_back(static_cast<double>(s.mode));
  return x;
}

std::string_view to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::FullObs: return "FO";
    case DatasetKind::PartialObs: return "PO";
    case DatasetKind::Stochastic: return "stochastic";
  }
  return "?";
}

std::string_view to_string(Sampling s) { return s == Sampling::Independent ? "independent" : "sequential"; }

Sampling parse_sampling(std::string_view s) {
  if (s == "independent") return Sampling::Independent;
  if (s == "sequential") return Sampling::Sequential;
  throw std::invalid_argument("sampling must be independent|sequential");
}

}  // namespace pmon::sat
