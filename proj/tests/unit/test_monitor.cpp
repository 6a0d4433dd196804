#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pmon/monitor.hpp"
#include "toy_monitor.hpp"

using namespace pmon;
using namespace pmon::monitor;

namespace {

MonitorConfig small_config(std::size_t epochs = 40) {
  MonitorConfig c;
  c.train.epochs = epochs;
  c.train.hidden = {16, 16};
  c.train.seed = 3;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("splits partition the records", "[monitor][split]") {
  for (std::size_t n : {0u, 1u, 7u, 100u, 1001u}) {
    auto s = make_split(n, {}, 9);
    CHECK_NOTHROW(s.check_partition(n));
    CHECK(s.train.size() == static_cast<std::size_t>(std::floor(0.6 * n)));
    CHECK(s.cal.size() == static_cast<std::size_t>(std::floor(0.2 * n)));
    auto again = make_split(n, {}, 9);
    CHECK(again.train == s.train);
    CHECK(again.cal == s.cal);
  }
  SplitIndices bad{{0, 1}, {1}, {2}};
  CHECK_THROWS_AS(bad.check_partition(3), std::logic_error);
  SplitIndices missing{{0}, {1}, {}};
  CHECK_THROWS_AS(missing.check_partition(3), std::logic_error);
  CHECK_THROWS(make_split(10, {0.5, 0.5, 0.5}, 1));
  CHECK_THROWS(make_split(10, {0.8, 0.0, 0.2}, 1));
}

TEST_CASE("built monitors keep train, calibration and validation apart", "[monitor][split]") {
  auto b = build_from_dataset(MonitorKind::FoClassifier, toy::noisy_sign(500, 0.2, 1), small_config(5));
  CHECK_NOTHROW(b.split.check_partition(500));
  std::set<std::vector<double>> train(b.train.inputs.begin(), b.train.inputs.end());
  for (const auto& x : b.cal.inputs) CHECK(train.count(x) == 0);
  for (const auto& x : b.val.inputs) CHECK(train.count(x) == 0);
  CHECK(b.monitor.class_cal.pooled.size() == b.cal.size());
  CHECK(b.coverage_guaranteed);
}

TEST_CASE("error kinds", "[monitor][rejection]") {
  Query pos;
  pos.classification = true;
  pos.label = 1;
  CHECK(is_error(pos, 0.0, ErrorKind::Any));
  CHECK(is_error(pos, 0.0, ErrorKind::FalsePositive));
  CHECK_FALSE(is_error(pos, 0.0, ErrorKind::FalseNegative));
  CHECK_FALSE(is_error(pos, 1.0, ErrorKind::Any));
  Query reg;
  reg.prediction = -0.2;
  CHECK(is_error(reg, 0.3, ErrorKind::FalseNegative));
  CHECK_FALSE(is_error(reg, 0.3, ErrorKind::FalsePositive));
  CHECK_FALSE(is_error(reg, -1.0, ErrorKind::Any));
  CHECK(parse_error_kind("fp") == ErrorKind::FalsePositive);
  CHECK_THROWS(parse_error_kind("both"));
}

TEST_CASE("a perfect predictor gets a rule that rejects nothing", "[monitor][rejection]") {
  auto b = build_from_dataset(MonitorKind::FoClassifier, toy::noisy_sign(2000, 0.0, 2), small_config(60));
  auto ev = evaluate(b.monitor, b.val, 5);
  REQUIRE(ev.accuracy >= 0.995);
  auto clean = b.val;
  // keep only the points it gets right so the validation set is error-free
  std::vector<std::size_t> keep;
  for (const auto& r : ev.rows) {
    if (r.correct) keep.push_back(r.index);
  }
  clean = b.val.subset(keep);
  auto rule = fit_rejection_rule(b.monitor, clean, ErrorKind::Any, 5);
  CHECK(rule.detection_error == 0.0);
  auto ev2 = evaluate(b.monitor, clean, 5, &rule);
  CHECK(ev2.rejection_rate == 0.0);
  CHECK_THROWS(fit_rejection_rule(b.monitor, b.val.subset(std::vector<std::size_t>{}), ErrorKind::Any, 5));
}

TEST_CASE("rejection concentrates on low-confidence mistakes", "[monitor][rejection]") {
  auto b = build_from_dataset(MonitorKind::FoClassifier, toy::noisy_sign(4000, 0.2, 3), small_config(30));
  auto rule = fit_rejection_rule(b.monitor, b.val, ErrorKind::Any, 7);
  auto test = toy::noisy_sign(4000, 0.2, 4);
  auto plain = evaluate(b.monitor, test, 8);
  auto ev = evaluate(b.monitor, test, 8, &rule);
  const double overall = 1.0 - plain.accuracy;
  INFO("overall " << overall << " retained " << ev.retained_error << " rejected " << ev.rejection_rate);
  CHECK(ev.retained_error < overall);
  CHECK(ev.rejection_rate > 0.0);
}

TEST_CASE("raising a threshold never lowers the rejection rate", "[monitor][rejection][property]") {
  auto b = build_from_dataset(MonitorKind::FoClassifier, toy::noisy_sign(1500, 0.3, 5), small_config(10));
  std::vector<Query> qs;
  Rng rng(1);
  for (const auto& x : b.val.inputs) qs.push_back(b.monitor.query(x, &rng));
  for (double cred : {0.0, 0.1, 0.3}) {
    std::size_t prev = 0;
    for (double conf = 0.0; conf <= 1.0001; conf += 0.02) {
      RejectionRule r;
      r.min_confidence = conf;
      r.min_credibility = cred;
      std::size_t rej = 0;
      for (const auto& q : qs) rej += r.rejects(q);
      REQUIRE(rej >= prev);
      prev = rej;
    }
  }
  RejectionRule w;
  w.classification = false;
  Query q;
  q.interval = {0.0, 1.0};
  w.max_width = 1.0;
  CHECK_FALSE(w.rejects(q));
  w.max_width = 0.99;
  CHECK(w.rejects(q));
}

TEST_CASE("regression monitors: plain and normalized intervals", "[monitor]") {
  auto cfg = small_config(60);
  auto plain = build_from_dataset(MonitorKind::FoRegressor, toy::noisy_line(3000, 6), cfg);
  cfg.normalizer = NormalizerKind::Residual;
  auto norm = build_from_dataset(MonitorKind::FoRegressor, toy::noisy_line(3000, 6), cfg);
  auto test = toy::noisy_line(4000, 7);
  auto ep = evaluate(plain.monitor, test, 1);
  auto en = evaluate(norm.monitor, test, 1);
  CHECK(ep.coverage >= 0.87);
  CHECK(en.coverage >= 0.87);
  CHECK(norm.monitor.normalizer.has_value());
  const double w_lo = norm.monitor.query(std::vector<double>{-0.8}, nullptr).interval.width();
  const double w_hi = norm.monitor.query(std::vector<double>{0.8}, nullptr).interval.width();
  CHECK(w_hi > w_lo);
  CHECK(plain.monitor.query(std::vector<double>{-0.8}, nullptr).interval.width() ==
        plain.monitor.query(std::vector<double>{0.8}, nullptr).interval.width());

  auto rule = fit_rejection_rule(plain.monitor, plain.val, ErrorKind::Any, 2);
  CHECK_FALSE(rule.classification);
}

TEST_CASE("most uncertain points come first", "[monitor][active]") {
  auto b = build_from_dataset(MonitorKind::FoClassifier, toy::noisy_sign(800, 0.2, 8), small_config(10));
  std::vector<std::vector<double>> pool;
  Rng rng(3);
  for (int i = 0; i < 300; ++i) pool.push_back({rng.uniform(-1, 1)});
  auto pick = most_uncertain(b.monitor, pool, 40, 11);
  REQUIRE(pick.size() == 40);
  std::vector<conformal::UncertaintyScore> u;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    Rng theta(derive_seed(11, i));
    u.push_back(b.monitor.query(pool[i], &theta).uncertainty);
  }
  auto less = [](const conformal::UncertaintyScore& a, const conformal::UncertaintyScore& c) {
    return a.confidence != c.confidence ? a.confidence < c.confidence : a.credibility < c.credibility;
  };
  for (std::size_t i = 0; i + 1 < pick.size(); ++i) REQUIRE_FALSE(less(u[pick[i + 1]], u[pick[i]]));
  std::set<std::size_t> chosen(pick.begin(), pick.end());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (chosen.count(i)) continue;
    REQUIRE_FALSE(less(u[i], u[pick.back()]));
  }
  CHECK_THROWS(most_uncertain(b.monitor, pool, 301, 1));
  CHECK_THROWS(most_uncertain(b.monitor, pool, 0, 1));

  auto reg = build_from_dataset(MonitorKind::FoRegressor, toy::noisy_line(800, 9), [] {
    auto c = small_config(10);
    c.normalizer = NormalizerKind::Residual;
    return c;
  }());
  auto wide = most_uncertain(reg.monitor, pool, 30, 1);
  for (std::size_t i = 0; i + 1 < wide.size(); ++i) {
    REQUIRE(reg.monitor.query(pool[wide[i]], nullptr).interval.width() >=
            reg.monitor.query(pool[wide[i + 1]], nullptr).interval.width());
  }
}

TEST_CASE("active learning bookkeeping", "[monitor][active]") {
  auto cfg = small_config(10);
  auto b = build_from_dataset(MonitorKind::FoClassifier, toy::noisy_sign(600, 0.2, 10), cfg);
  hybrid::HybridSystem sys;
  sys.dim = 1;
  sys.modes.resize(1);
  std::vector<hybrid::State> pool;
  Rng rng(4);
  for (int i = 0; i < 200; ++i) pool.push_back({0, {rng.uniform(-1, 1)}});
  std::size_t calls = 0;
  Oracle oracle = [&](const hybrid::State& s) {
    ++calls;
    return sat::SatLabel::boolean(s.values[0] > 0);
  };
  auto round = active_learning_round(b.monitor, sys, b.train, b.cal, pool, 25, oracle, cfg);
  CHECK(calls == 25);
  CHECK(round.selected.size() == 25);
  CHECK(round.train.size() == b.train.size() + 25);
  CHECK(round.monitor.class_cal.pooled.size() == b.cal.size());
  std::vector<std::vector<double>> inputs;
  for (const auto& s : pool) inputs.push_back({s.values[0]});
  CHECK(round.selected == most_uncertain(b.monitor, inputs, 25, derive_seed(cfg.seed, 31)));
  std::set<std::vector<double>> cal(b.cal.inputs.begin(), b.cal.inputs.end());
  for (std::size_t i : round.selected) CHECK(cal.count(inputs[i]) == 0);
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(round.train.inputs[b.train.size() + i] == inputs[round.selected[i]]);
  }
}

TEST_CASE("evaluation summaries match their rows", "[monitor]") {
  auto b = build_from_dataset(MonitorKind::FoClassifier, toy::noisy_sign(600, 0.2, 12), small_config(10));
  auto ev = evaluate(b.monitor, toy::noisy_sign(500, 0.2, 13), 4);
  double cov = 0.0, size = 0.0;
  for (const auto& r : ev.rows) {
    cov += r.covered;
    size += r.query.region.size();
  }
  CHECK(ev.coverage == cov / 500.0);
  CHECK(ev.efficiency == size / 500.0);
  auto again = evaluate(b.monitor, toy::noisy_sign(500, 0.2, 13), 4, nullptr, 3);
  CHECK(again.coverage == ev.coverage);
  CHECK_THROWS(evaluate(b.monitor, b.val.subset(std::vector<std::size_t>{}), 1));
}

TEST_CASE("stochastic monitors", "[monitor]") {
  auto ex = hybrid::build_avoid_example(true);
  auto cfg = small_config(20);
  auto b = build_stochastic_monitor(ex.system, ex.property, stl::RobustnessKind::Space, 300, 10, ex.horizon, cfg);
  CHECK(b.monitor.predictor.task == learn::Task::Quantile);
  CHECK(b.monitor.reg_cal.size() == b.cal.size());
  auto q = b.monitor.query(b.val.inputs[0], nullptr);
  const double tau = conformal::cqr_tau(b.monitor.reg_cal, cfg.epsilon);
  if (tau >= 0) {
    CHECK(q.interval.lower <= q.quantiles[0]);
    CHECK(q.interval.upper >= q.quantiles[2]);
  } else {
    CHECK(q.interval.lower >= q.quantiles[0]);
    CHECK(q.interval.upper <= q.quantiles[2]);
  }
  cfg.cqr_calibration = CalibrationSamples::All;
  auto all = build_stochastic_monitor(ex.system, ex.property, stl::RobustnessKind::Space, 300, 10, ex.horizon, cfg);
  CHECK(all.monitor.reg_cal.size() == 10 * all.cal.size());

  auto boolean = build_stochastic_monitor(ex.system, ex.property, stl::RobustnessKind::Boolean, 300, 10, ex.horizon,
                                          small_config(20));
  CHECK(boolean.monitor.predictor.task == learn::Task::Regressor);
  auto ev = evaluate(boolean.monitor, boolean.val, 1);
  CHECK(ev.rows.front().truth == boolean.val.labels.front().mean());
}

TEST_CASE("partial observability monitors", "[monitor]") {
  auto ex = hybrid::build_avoid_example(false);
  sat::PoOptions po;
  po.past_horizon = 3;
  po.future_horizon = ex.horizon;
  auto cfg = small_config(30);
  cfg.conformal_estimator = true;
  auto obs = hybrid::ObservationProcess::select({0, 1}, {0.01, 0.01});
  auto two = build_po_monitor(ex.system, ex.property, obs, PoMode::TwoStep, stl::RobustnessKind::Boolean, 800, po, cfg);
  CHECK(two.monitor.estimator.has_value());
  CHECK(two.monitor.state_dim == 3);
  Rng theta(1);
  auto q = two.monitor.query(two.val.inputs[0], &theta);
  CHECK(q.state_intervals.size() == 3);
  CHECK(two.coverage_guaranteed);

  po.sampling = sat::Sampling::Sequential;
  po.run_length = 40;
  auto seq = build_po_monitor(ex.system, ex.property, obs, PoMode::End2End, stl::RobustnessKind::Boolean, 800, po,
                              small_config(5));
  CHECK_FALSE(seq.coverage_guaranteed);
  CHECK_FALSE(seq.monitor.estimator.has_value());
}

TEST_CASE("identical seeds give identical monitors", "[monitor]") {
  auto a = build_from_dataset(MonitorKind::FoClassifier, toy::noisy_sign(400, 0.2, 14), small_config(5));
  auto b = build_from_dataset(MonitorKind::FoClassifier, toy::noisy_sign(400, 0.2, 14), small_config(5));
  CHECK(a.monitor.predictor.net.params() == b.monitor.predictor.net.params());
  CHECK(a.monitor.class_cal.pooled.descending() == b.monitor.class_cal.pooled.descending());
  auto ra = fit_rejection_rule(a.monitor, a.val, ErrorKind::Any, 1);
  auto rb = fit_rejection_rule(b.monitor, b.val, ErrorKind::Any, 1);
  CHECK(ra.min_confidence == rb.min_confidence);
  CHECK(ra.min_credibility == rb.min_credibility);
}

TEST_CASE("manifest round-trip", "[monitor][io]") {
  Manifest m;
  m.set("seed", std::size_t{7});
  m.set("coverage", 0.9);
  m.set("formula", std::string("G[0,50](x0 > 1)"));
  m.set("seed", std::size_t{8});
  std::ostringstream out;
  m.write(out);
  auto back = Manifest::parse(out.str());
  CHECK(back.entries == m.entries);
  CHECK(*back.find("seed") == "8");
  CHECK(back.find("nope") == nullptr);
  CHECK_THROWS(Manifest::parse("something else\n"));
  CHECK_THROWS(m.set("bad", std::string("two\nlines")));
}

TEST_CASE("noise-free two-step monitoring tracks full observability", "[monitor]") {
  auto ex = hybrid::build_avoid_example(false);
  auto cfg = small_config(60);
  auto fo = build_fo_monitor(ex.system, ex.property, stl::RobustnessKind::Boolean, 3000, ex.horizon, cfg);
  sat::PoOptions po;
  po.past_horizon = 3;
  po.future_horizon = ex.horizon;
  auto obs = hybrid::ObservationProcess::select({0, 1}, {0.0, 0.0});
  auto two = build_po_monitor(ex.system, ex.property, obs, PoMode::TwoStep, stl::RobustnessKind::Boolean, 3000, po, cfg);
  const double a_fo = evaluate(fo.monitor, fo.val, 1).accuracy;
  const double a_two = evaluate(two.monitor, two.val, 1).accuracy;
  INFO("fo " << a_fo << " two-step " << a_two);
  CHECK(a_two >= a_fo - 0.02);
}
