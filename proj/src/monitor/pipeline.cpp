#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pmon/monitor.hpp"
#include "pmon/parallel.hpp"

namespace pmon::monitor {

std::string_view to_string(MonitorKind k) {
  switch (k) {
    case MonitorKind::FoClassifier: return "fo-classifier";
    case MonitorKind::FoRegressor: return "fo-regressor";
    case MonitorKind::PoEnd2End: return "po-end2end";
    case MonitorKind::PoTwoStep: return "po-twostep";
    case MonitorKind::Stochastic: return "stochastic";
  }
  return "?";
}

void SplitFractions::validate() const {
  if (!(train > 0.0) || !(cal > 0.0) || !(val >= 0.0)) {
    throw std::invalid_argument("split fractions: train and cal must be positive, val non-negative");
  }
  if (std::abs(train + cal + val - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
}

void SplitIndices::check_partition(std::size_t n) const {
  std::vector<char> seen(n, 0);
  for (const auto* part : {&train, &cal, &val}) {
    for (std::size_t i : *part) {
      if (i >= n || seen[i]) throw std::logic_error("split parts overlap or leave the index range");
      seen[i] = 1;
    }
  }
  if (train.size() + cal.size() + val.size() != n) throw std::logic_error("split parts do not cover every record");
}

SplitIndices make_split(std::size_t n, const SplitFractions& f, std::uint64_t seed) {
  f.validate();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng.engine());
  const auto n_train = static_cast<std::size_t>(std::floor(f.train * static_cast<double>(n)));
  const auto n_cal = static_cast<std::size_t>(std::floor(f.cal * static_cast<double>(n)));
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.cal.assign(order.begin() + n_train, order.begin() + n_train + n_cal);
  s.val.assign(order.begin() + n_train + n_cal, order.end());
  s.check_partition(n);
  return s;
}

namespace {

bool boolean_labels(const sat::Dataset& d) {
  return !d.labels.empty() && d.labels.front().kind == sat::SatLabel::Kind::Boolean;
}

std::vector<std::size_t> label_indices(const sat::Dataset& d) {
  std::vector<std::size_t> out;
  for (double v : d.scalar_labels()) out.push_back(v > 0.5 ? 1 : 0);
  return out;
}

learn::Matrix last_states(const sat::Dataset& d, std::size_t state_dim) {
  learn::Matrix out;
  for (const auto& s : d.states) out.emplace_back(s.end() - static_cast<std::ptrdiff_t>(state_dim), s.end());
  return out;
}

learn::Matrix predictor_inputs(const Monitor& m, const sat::Dataset& d) {
  learn::Matrix out;
  out.reserve(d.size());
  for (const auto& x : d.inputs) out.push_back(m.predictor_input(x));
  return out;
}

void calibrate(Monitor& m, const sat::Dataset& cal, const MonitorConfig& cfg) {
  const learn::Matrix x = predictor_inputs(m, cal);
  if (m.classification) {
    std::vector<std::vector<double>> lik;
    for (const auto& row : x) {
      auto fd = m.predictor.f_d(row);
      lik.emplace_back(fd.begin(), fd.end());
    }
    m.class_cal = conformal::ClassifierCalibration::build(lik, label_indices(cal), cfg.label_conditional);
    return;
  }
  if (m.predictor.task == learn::Task::Quantile) {
    std::vector<double> lo, hi, t;
    for (std::size_t i = 0; i < cal.size(); ++i) {
      const auto q = m.predictor.predict_quantiles(x[i]);
      const auto& samples = cal.labels[i].values;
      const std::size_t use = cfg.cqr_calibration == CalibrationSamples::Single ? 1 : samples.size();
      for (std::size_t k = 0; k < use; ++k) {
        lo.push_back(q[0]);
        hi.push_back(q[2]);
        t.push_back(samples[k]);
      }
    }
    m.reg_cal = conformal::cqr_scores(lo, hi, t);
    return;
  }
  const std::vector<double> t = cal.scalar_labels();
  std::vector<double> f;
  for (const auto& row : x) f.push_back(m.predictor.predict(row));
  if (m.normalizer) {
    std::vector<double> u;
    for (const auto& row : x) u.push_back(m.normalizer->predict(row));
    m.reg_cal = conformal::normalized_scores(f, u, t);
  } else {
    m.reg_cal = conformal::residual_scores(f, t);
  }
}

}  // namespace

std::vector<double> Monitor::predictor_input(std::span<const double> x) const {
  if (!estimator) return {x.begin(), x.end()};
  auto window = estimator->predict_vector(x);
  return {window.end() - static_cast<std::ptrdiff_t>(state_dim), window.end()};
}

Query Monitor::query(std::span<const double> x, Rng* theta_rng) const {
  Query q;
  q.classification = classification;
  const auto in = predictor_input(x);
  if (classification) {
    const auto fd = predictor.f_d(in);
    q.prediction = fd[1];
    q.label = fd[1] > 0.5 ? 1 : 0;
    q.region = conformal::class_region(fd, class_cal, epsilon, theta, theta_rng);
    q.uncertainty = conformal::confidence_credibility(q.region.p_values);
  } else if (predictor.task == learn::Task::Quantile) {
    q.quantiles = predictor.predict_quantiles(in);
    q.prediction = q.quantiles[1];
    q.interval = conformal::cqr_interval(q.quantiles[0], q.quantiles[2], reg_cal, epsilon);
  } else {
    q.prediction = predictor.predict(in);
    q.interval = normalizer ? conformal::interval_normalized(q.prediction, normalizer->predict(in), reg_cal, epsilon)
                            : conformal::interval_plain(q.prediction, reg_cal, epsilon);
  }
  if (!estimator_cal.empty()) {
    for (std::size_t k = 0; k < state_dim; ++k) {
      q.state_intervals.push_back(conformal::interval_plain(in[k], estimator_cal[k], epsilon));
    }
  }
  return q;
}

Monitor fit_monitor(MonitorKind kind, const sat::Dataset& train, const sat::Dataset& cal, const MonitorConfig& cfg) {
  if (train.size() == 0 || cal.size() == 0) throw std::invalid_argument("training and calibration sets must be non-empty");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  Monitor m;
  m.kind = kind;
  m.epsilon = cfg.epsilon;
  m.theta = cfg.theta;
  m.classification = boolean_labels(train);

  switch (kind) {
    case MonitorKind::FoClassifier:
    case MonitorKind::FoRegressor:
    case MonitorKind::PoEnd2End:
      if (kind == MonitorKind::FoClassifier && !m.classification) throw std::invalid_argument("classifier needs boolean labels");
      if (kind == MonitorKind::FoRegressor && m.classification) throw std::invalid_argument("regressor needs real labels");
      m.predictor = m.classification ? learn::train_classifier(train, cfg.train) : learn::train_regressor(train, cfg.train);
      break;
    case MonitorKind::PoTwoStep: {
      if (train.meta.kind != sat::DatasetKind::PartialObs || train.states.size() != train.size()) {
        throw std::invalid_argument("two-step monitor needs a PO dataset with stored states");
      }
      m.estimator = learn::train_state_estimator(train, cfg.train);
      m.state_dim = train.states.front().size() / (train.meta.past_horizon + 1);
      const auto xs = last_states(train, m.state_dim);
      const auto y = train.scalar_labels();
      learn::TrainConfig second = cfg.train;
      second.seed = derive_seed(cfg.train.seed, 7);
      m.predictor = m.classification ? learn::train_classifier(xs, y, second) : learn::train_regressor(xs, y, second);
      break;
    }
    case MonitorKind::Stochastic:
      if (train.meta.kind != sat::DatasetKind::Stochastic) throw std::invalid_argument("stochastic monitor needs sample labels");
      m.classification = false;
      // Boolean semantics: regress the satisfaction probability (sample mean).
      m.predictor = train.meta.semantics == stl::RobustnessKind::Boolean ? learn::train_regressor(train, cfg.train)
                                                                         : learn::train_quantile_regressor(train, cfg.train);
      break;
  }

  if (!m.classification && cfg.normalizer == NormalizerKind::Residual && m.predictor.task == learn::Task::Regressor) {
    // u(x) regresses |t - f(x)| on the training set
    const learn::Matrix x = predictor_inputs(m, train);
    const auto t = train.scalar_labels();
    std::vector<double> r;
    for (std::size_t i = 0; i < x.size(); ++i) r.push_back(std::abs(t[i] - m.predictor.predict(x[i])));
    learn::TrainConfig ncfg = cfg.train;
    ncfg.seed = derive_seed(cfg.train.seed, 11);
    m.normalizer = learn::train_regressor(x, r, ncfg);
  }

  calibrate(m, cal, cfg);

  if (kind == MonitorKind::PoTwoStep && cfg.conformal_estimator) {
    const auto truth = last_states(cal, m.state_dim);
    for (std::size_t k = 0; k < m.state_dim; ++k) {
      std::vector<double> pred, t;
      for (std::size_t i = 0; i < cal.size(); ++i) {
        pred.push_back(m.predictor_input(cal.inputs[i])[k]);
        t.push_back(truth[i][k]);
      }
      m.estimator_cal.push_back(conformal::residual_scores(pred, t));
    }
  }
  return m;
}

Build build_from_dataset(MonitorKind kind, sat::Dataset data, const MonitorConfig& cfg) {
  data.validate();
  Build b;
  b.split = make_split(data.size(), cfg.split, derive_seed(cfg.seed, 2));
  b.train = data.subset(b.split.train);
  b.cal = data.subset(b.split.cal);
  b.val = data.subset(b.split.val);
  b.coverage_guaranteed = !(data.meta.kind == sat::DatasetKind::PartialObs && data.meta.sampling == sat::Sampling::Sequential);
  b.monitor = fit_monitor(kind, b.train, b.cal, cfg);
  b.data = std::move(data);
  return b;
}

Build build_fo_monitor(const hybrid::HybridSystem& sys, const stl::Formula& phi, stl::RobustnessKind kind,
                       std::size_t n, std::size_t horizon, const MonitorConfig& cfg) {
  auto data = sat::gen_dataset_fo(sys, phi, n, horizon, kind, derive_seed(cfg.seed, 1), {cfg.threads});
  return build_from_dataset(kind == stl::RobustnessKind::Boolean ? MonitorKind::FoClassifier : MonitorKind::FoRegressor,
                            std::move(data), cfg);
}

Build build_po_monitor(const hybrid::HybridSystem& sys, const stl::Formula& phi, const hybrid::ObservationProcess& obs,
                       PoMode mode, stl::RobustnessKind kind, std::size_t n, const sat::PoOptions& po,
                       const MonitorConfig& cfg) {
  sat::PoOptions opt = po;
  opt.threads = cfg.threads;
  auto data = sat::gen_dataset_po(sys, phi, obs, n, kind, derive_seed(cfg.seed, 1), opt);
  return build_from_dataset(mode == PoMode::End2End ? MonitorKind::PoEnd2End : MonitorKind::PoTwoStep, std::move(data),
                            cfg);
}

Build build_stochastic_monitor(const hybrid::HybridSystem& sys, const stl::Formula& phi, stl::RobustnessKind kind,
                               std::size_t n, std::size_t m, std::size_t horizon, const MonitorConfig& cfg) {
  auto data = sat::gen_dataset_stochastic(sys, phi, n, m, horizon, kind, derive_seed(cfg.seed, 1), {cfg.threads});
  return build_from_dataset(MonitorKind::Stochastic, std::move(data), cfg);
}

Evaluation evaluate(const Monitor& m, const sat::Dataset& test, std::uint64_t theta_seed, const RejectionRule* rule,
                    std::size_t threads) {
  if (test.size() == 0) throw std::invalid_argument("test set is empty");
  Evaluation ev;
  ev.rows.resize(test.size());
  parallel_for(test.size(), threads, [&](std::size_t i) {
    Rng theta(derive_seed(theta_seed, i));
    EvalRow& r = ev.rows[i];
    r.index = i;
    r.query = m.query(test.inputs[i], &theta);
    const auto& label = test.labels[i];
    if (label.kind == sat::SatLabel::Kind::Samples) {
      r.truth = label.mean();
      if (m.predictor.task == learn::Task::Quantile) {
        std::size_t in = 0;
        for (double v : label.values) in += r.query.interval.contains(v) ? 1 : 0;
        r.covered = static_cast<double>(in) / static_cast<double>(label.values.size());
      } else {
        r.covered = r.query.interval.contains(r.truth) ? 1.0 : 0.0;
      }
    } else {
      r.truth = label.scalar();
      if (m.classification) {
        r.covered = r.query.region.contains(r.truth > 0.5 ? 1 : 0) ? 1.0 : 0.0;
      } else {
        r.covered = r.query.interval.contains(r.truth) ? 1.0 : 0.0;
      }
    }
    r.correct = !is_error(r.query, r.truth, ErrorKind::Any);
    r.rejected = rule && rule->rejects(r.query);
  });

  double cov = 0.0, eff = 0.0;
  std::size_t correct = 0, rejected = 0, retained_err = 0;
  const ErrorKind ek = rule ? rule->error_kind : ErrorKind::Any;
  for (const auto& r : ev.rows) {
    cov += r.covered;
    eff += m.classification ? static_cast<double>(r.query.region.size()) : r.query.interval.width();
    correct += r.correct ? 1 : 0;
    if (r.rejected) {
      ++rejected;
    } else if (is_error(r.query, r.truth, ek)) {
      ++retained_err;
    }
  }
  const double n = static_cast<double>(ev.rows.size());
  ev.coverage = cov / n;
  ev.efficiency = eff / n;
  ev.accuracy = static_cast<double>(correct) / n;
  ev.rejection_rate = static_cast<double>(rejected) / n;
  const std::size_t kept = ev.rows.size() - rejected;
  ev.retained_error = kept == 0 ? 0.0 : static_cast<double>(retained_err) / static_cast<double>(kept);
  return ev;
}

}  // namespace pmon::monitor
