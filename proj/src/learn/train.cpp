#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pmon/learn.hpp"

namespace pmon::learn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0,1)");
  if (!(eps_lo > 0.0 && eps_lo < 0.5 && eps_hi > 0.5 && eps_hi < 1.0)) {
    throw std::invalid_argument("quantile levels need 0 < eps_lo < 0.5 < eps_hi < 1");
  }
  for (std::size_t h : hidden) {
    if (h == 0) throw std::invalid_argument("hidden widths must be positive");
  }
}

std::string_view to_string(Task t) {
  switch (t) {
    case Task::Classifier: return "classifier";
    case Task::Regressor: return "regressor";
    case Task::Quantile: return "quantile";
    case Task::StateEstimator: return "state-estimator";
  }
  return "?";
}

Standardizer Standardizer::fit(const Matrix& rows) {
  if (rows.empty()) throw std::invalid_argument("cannot standardise an empty set");
  const std::size_t d = rows.front().size();
  Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < d; ++k) s.mean[k] += r[k];
  }
  const double n = static_cast<double>(rows.size());
  for (double& m : s.mean) m /= n;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < d; ++k) s.scale[k] += (r[k] - s.mean[k]) * (r[k] - s.mean[k]);
  }
  for (double& v : s.scale) {
    v = std::sqrt(v / n);
    if (!(v > 1e-12)) v = 1.0;  // constant column
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

std::vector<double> Standardizer::apply(std::span<const double> v) const {
  if (v.size() != mean.size()) throw std::invalid_argument("standardiser: dimension mismatch");
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = (v[k] - mean[k]) / scale[k];
  return out;
}

std::vector<double> Standardizer::invert(std::span<const double> v) const {
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] * scale[k] + mean[k];
  return out;
}

namespace {

void require_task(const Model& m, Task t) {
  if (m.task != t) {
    throw std::logic_error("model is a " + std::string(to_string(m.task)) + ", not a " + std::string(to_string(t)));
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Matrix standardise_rows(const Standardizer& s, const Matrix& rows) {
  Matrix out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(s.apply(r));
  return out;
}

void check_rows(const Matrix& x, std::size_t n_targets) {
  if (x.empty()) throw std::invalid_argument("training set is empty");
  if (x.size() != n_targets) throw std::invalid_argument("inputs and targets differ in length");
  for (const auto& r : x) {
    if (r.size() != x.front().size()) throw std::invalid_argument("ragged training inputs");
  }
}

std::vector<std::size_t> layer_widths(std::size_t in, const TrainConfig& cfg, std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), cfg.hidden.begin(), cfg.hidden.end());
  w.push_back(out);
  return w;
}

}  // namespace

double Model::predict_proba(std::span<const double> x) const {
  require_task(*this, Task::Classifier);
  return sigmoid(net.forward(input.apply(x))[0]);
}

std::array<double, 2> Model::f_d(std::span<const double> x) const {
  const double p = predict_proba(x);
  return {1.0 - p, p};
}

int Model::predict_label(std::span<const double> x) const { return predict_proba(x) > 0.5 ? 1 : 0; }

double Model::predict(std::span<const double> x) const {
  require_task(*this, Task::Regressor);
  return target.invert(net.forward(input.apply(x)))[0];
}

std::array<double, 3> Model::predict_quantiles(std::span<const double> x) const {
  require_task(*this, Task::Quantile);
  auto raw = net.forward(input.apply(x));
  std::array<double, 3> q{};
  for (std::size_t j = 0; j < 3; ++j) q[j] = raw[j] * target.scale[0] + target.mean[0];
  std::sort(q.begin(), q.end());
  return q;
}

std::vector<double> Model::predict_vector(std::span<const double> x) const {
  require_task(*this, Task::StateEstimator);
  return target.invert(net.forward(input.apply(x)));
}

TrainLog fit(MLP& net, const Loss& loss, const Matrix& x, const Matrix& t, const TrainConfig& cfg) {
  cfg.validate();
  check_rows(x, t.size());
  TrainLog log;
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  auto& p = net.params();
  std::vector<double> grad(p.size()), velocity(p.size(), 0.0);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double total = 0.0;
    for (std::size_t lo = 0; lo < n; lo += cfg.batch_size) {
      const std::size_t hi = std::min(n, lo + cfg.batch_size);
      std::span<const std::size_t> rows(order.data() + lo, hi - lo);
      total += batch_loss(net, loss, x, t, rows, grad) * static_cast<double>(rows.size());
      bool finite = true;
      for (std::size_t k = 0; k < p.size(); ++k) {
        velocity[k] = cfg.momentum * velocity[k] - cfg.learning_rate * grad[k];
        p[k] += velocity[k];
        finite = finite && std::isfinite(p[k]);
      }
      if (!finite) {
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                                 " (non-finite parameter); lower the learning rate");
      }
    }
    log.epoch_loss.push_back(total / static_cast<double>(n));
  }
  return log;
}

Model train_classifier(const Matrix& x, std::span<const double> labels, const TrainConfig& cfg, TrainLog* log) {
  check_rows(x, labels.size());
  bool has0 = false, has1 = false;
  Matrix t;
  for (double l : labels) {
    if (l != 0.0 && l != 1.0) throw std::invalid_argument("classifier labels must be 0 or 1");
    (l == 1.0 ? has1 : has0) = true;
    t.push_back({l});
  }
  if (!has0 || !has1) throw std::invalid_argument("classifier training set contains a single class");
  Model m;
  m.task = Task::Classifier;
  m.input = Standardizer::fit(x);
  m.target = Standardizer::identity(1);
  m.net = MLP(layer_widths(x.front().size(), cfg, 1), derive_seed(cfg.seed, 0));
  TrainLog l = fit(m.net, Loss{Loss::Kind::CrossEntropy, {}, false}, standardise_rows(m.input, x), t, cfg);
  if (log) *log = std::move(l);
  return m;
}

Model train_regressor(const Matrix& x, std::span<const double> targets, const TrainConfig& cfg, TrainLog* log) {
  check_rows(x, targets.size());
  Matrix t;
  for (double v : targets) t.push_back({v});
  Model m;
  m.task = Task::Regressor;
  m.input = Standardizer::fit(x);
  m.target = Standardizer::fit(t);
  m.net = MLP(layer_widths(x.front().size(), cfg, 1), derive_seed(cfg.seed, 0));
  TrainLog l = fit(m.net, Loss{Loss::Kind::Squared, {}, false}, standardise_rows(m.input, x),
                   standardise_rows(m.target, t), cfg);
  if (log) *log = std::move(l);
  return m;
}

Model train_quantile_regressor(const Matrix& x, const Matrix& samples, const TrainConfig& cfg, TrainLog* log) {
  check_rows(x, samples.size());
  cfg.validate();
  Model m;
  m.task = Task::Quantile;
  m.levels = {cfg.eps_lo, 0.5, cfg.eps_hi};
  m.input = Standardizer::fit(x);

  // one scalar scale shared by every sample; pinball loss is equivariant under it
  Matrix flat;
  for (const auto& s : samples) {
    if (s.empty()) throw std::invalid_argument("quantile regression needs at least one sample per input");
    for (double v : s) flat.push_back({v});
  }
  m.target = Standardizer::fit(flat);
  Matrix t;
  for (const auto& s : samples) {
    std::vector<double> z(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) z[k] = (s[k] - m.target.mean[0]) / m.target.scale[0];
    if (cfg.collapsed_quantiles) {
      std::vector<double> q;
      for (double a : m.levels) q.push_back(sat::empirical_quantile(z, a));
      z = std::move(q);
    }
    t.push_back(std::move(z));
  }
  m.net = MLP(layer_widths(x.front().size(), cfg, 3), derive_seed(cfg.seed, 0));
  TrainLog l = fit(m.net, Loss{Loss::Kind::Pinball, m.levels, cfg.collapsed_quantiles}, standardise_rows(m.input, x),
                   t, cfg);
  if (log) *log = std::move(l);
  return m;
}

Model train_state_estimator(const Matrix& x, const Matrix& targets, const TrainConfig& cfg, TrainLog* log) {
  check_rows(x, targets.size());
  Model m;
  m.task = Task::StateEstimator;
  m.input = Standardizer::fit(x);
  m.target = Standardizer::fit(targets);
  m.net = MLP(layer_widths(x.front().size(), cfg, targets.front().size()), derive_seed(cfg.seed, 0));
  TrainLog l = fit(m.net, Loss{Loss::Kind::Squared, {}, false}, standardise_rows(m.input, x),
                   standardise_rows(m.target, targets), cfg);
  if (log) *log = std::move(l);
  return m;
}

Model train_classifier(const sat::Dataset& data, const TrainConfig& cfg, TrainLog* log) {
  for (const auto& l : data.labels) {
    if (l.kind != sat::SatLabel::Kind::Boolean) throw std::invalid_argument("classifier needs boolean labels");
  }
  return train_classifier(data.inputs, data.scalar_labels(), cfg, log);
}

Model train_regressor(const sat::Dataset& data, const TrainConfig& cfg, TrainLog* log) {
  // sample-vector labels regress on their mean (satisfaction probability for boolean samples)
  return train_regressor(data.inputs, data.scalar_labels(), cfg, log);
}

Model train_quantile_regressor(const sat::Dataset& data, const TrainConfig& cfg, TrainLog* log) {
  Matrix samples;
  for (const auto& l : data.labels) samples.push_back(l.values);
  return train_quantile_regressor(data.inputs, samples, cfg, log);
}

Model train_state_estimator(const sat::Dataset& data, const TrainConfig& cfg, TrainLog* log) {
  if (data.states.size() != data.size()) throw std::invalid_argument("state estimator needs stored state windows");
  return train_state_estimator(data.inputs, data.states, cfg, log);
}

}  // namespace pmon::learn
