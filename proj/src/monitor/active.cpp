#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "pmon/monitor.hpp"

namespace pmon::monitor {

std::vector<std::size_t> most_uncertain(const Monitor& m, const std::vector<std::vector<double>>& pool, std::size_t k,
                                        std::uint64_t theta_seed) {
  if (pool.empty()) throw std::invalid_argument("active learning pool is empty");
  if (k == 0) throw std::invalid_argument("query budget must be at least 1");
  if (k > pool.size()) throw std::invalid_argument("query budget exceeds pool size");
  std::vector<Query> qs;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    Rng theta(derive_seed(theta_seed, i));
    qs.push_back(m.query(pool[i], &theta));
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  if (m.classification) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ua = qs[a].uncertainty;
      const auto& ub = qs[b].uncertainty;
      if (ua.confidence != ub.confidence) return ua.confidence < ub.confidence;
      return ua.credibility < ub.credibility;
    });
  } else {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return qs[a].interval.width() > qs[b].interval.width();
    });
  }
  order.resize(k);
  return order;
}

ActiveRound active_learning_round(const Monitor& m, const hybrid::HybridSystem& sys, const sat::Dataset& train,
                                  const sat::Dataset& cal, const std::vector<hybrid::State>& pool, std::size_t k,
                                  const Oracle& oracle, const MonitorConfig& cfg) {
  if (m.kind != MonitorKind::FoClassifier && m.kind != MonitorKind::FoRegressor) {
    throw std::invalid_argument("active learning works on full-observability monitors");
  }
  std::vector<std::vector<double>> inputs;
  for (const auto& s : pool) inputs.push_back(sat::encode_state(sys, s));
  ActiveRound round;
  round.selected = most_uncertain(m, inputs, k, derive_seed(cfg.seed, 31));
  round.train = train;
  for (std::size_t i : round.selected) {
    round.train.inputs.push_back(inputs[i]);
    round.train.labels.push_back(oracle(pool[i]));
    round.train.origins.push_back(pool[i]);
  }
  round.train.meta.n = round.train.size();
  round.monitor = fit_monitor(m.kind, round.train, cal, cfg);
  return round;
}

}  // namespace pmon::monitor
