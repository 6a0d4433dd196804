#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "pmon/conformal.hpp"
#include "synthetic.hpp"

using namespace pmon;
using namespace pmon::conformal;

namespace {

ClassifierCalibration gaussian_calibration(std::size_t n, double prior1, bool conditional, Rng& rng) {
  auto pts = synth::gaussian_classes(n, prior1, rng);
  std::vector<std::vector<double>> lik;
  std::vector<std::size_t> labels;
  for (const auto& p : pts) {
    lik.push_back(synth::bayes_likelihoods(p));
    labels.push_back(p.label);
  }
  return ClassifierCalibration::build(lik, labels, conditional);
}

std::vector<double> ladder(int n) {
  std::vector<double> v;
  for (int i = 1; i <= n; ++i) v.push_back(i / 100.0);
  return v;
}

}  // namespace

TEST_CASE("nonconformity of classification", "[conformal]") {
  std::vector<double> f{0.9, 0.1};
  CHECK(ncf_classification(f, 0) == Catch::Approx(0.1));
  CHECK(ncf_classification(f, 1) == Catch::Approx(0.9));
  std::vector<double> u{0.5, 0.5};
  CHECK(ncf_classification(u, 0) == 0.5);
  CHECK(ncf_classification(u, 1) == 0.5);
  CHECK_THROWS(ncf_classification(f, 2));
}

TEST_CASE("smoothed p-values", "[conformal]") {
  CalibrationScores cal({0.9, 0.5, 0.4, 0.2});
  CHECK(p_value_smoothed(cal, 0.4, 0.5) == Catch::Approx(0.6));
  CalibrationScores empty;
  CHECK(p_value_smoothed(empty, 0.3, 0.37) == Catch::Approx(0.37));
  CHECK(p_value_smoothed(cal, 5.0, 0.0) == 0.0);
  CHECK(p_value_smoothed(cal, 5.0, 1.0) == Catch::Approx(0.2));
  CHECK_THROWS(p_value_smoothed(cal, 0.1, 1.5));
  CHECK(cal.count_greater(0.4) == 2);
  CHECK(cal.count_equal(0.4) == 1);
  CHECK_THROWS(CalibrationScores({0.1, std::nan("")}));
}

TEST_CASE("label-conditional p-values", "[conformal]") {
  std::vector<double> scores{0.3, 0.1, 0.8};
  std::vector<std::size_t> labels{0, 0, 1};
  LabelConditionalScores cal(scores, labels, 3);
  CHECK(p_value_label_conditional(cal, 0.2, 0, 0.0) == Catch::Approx(1.0 / 3.0));
  CHECK(p_value_label_conditional(cal, 0.2, 2, 0.4) == Catch::Approx(0.4));
  CalibrationScores only0({0.3, 0.1});
  for (double theta : {0.0, 0.3, 1.0}) {
    for (double a : {0.05, 0.1, 0.2, 0.3, 0.9}) {
      CHECK(p_value_label_conditional(cal, a, 0, theta) == p_value_smoothed(only0, a, theta));
    }
  }
}

TEST_CASE("classification regions", "[conformal]") {
  CalibrationScores pooled({0.9, 0.5, 0.4, 0.2});
  auto both = region_from_p_values({0.6, 0.3}, 0.1);
  CHECK(both.size() == 2);
  auto none = region_from_p_values({0.6, 0.3}, 0.6);
  CHECK(none.size() == 0);
  auto one = region_from_p_values({0.6, 0.3}, 0.3);
  CHECK(one.labels == std::vector<std::size_t>{0});
  CHECK(one.contains(0));
  CHECK_FALSE(one.contains(1));
  CHECK_THROWS(region_from_p_values({0.5, 0.5}, 0.0));
}

TEST_CASE("confidence and credibility", "[conformal]") {
  auto a = confidence_credibility(std::vector<double>{0.7, 0.2});
  CHECK(a.confidence == Catch::Approx(0.8));
  CHECK(a.credibility == Catch::Approx(0.7));
  auto b = confidence_credibility(std::vector<double>{1.0, 0.0});
  CHECK(b.confidence == 1.0);
  CHECK(b.credibility == 1.0);
  auto c = confidence_credibility(std::vector<double>{0.5, 0.5});
  CHECK(c.confidence == 0.5);
  CHECK(c.credibility == 0.5);
  CHECK_THROWS(confidence_credibility(std::vector<double>{0.5}));
}

TEST_CASE("theta draws", "[conformal]") {
  Rng rng(3);
  auto s = draw_thetas(3, ThetaMode::Shared, &rng);
  CHECK(s[0] == s[1]);
  CHECK(s[1] == s[2]);
  auto p = draw_thetas(3, ThetaMode::PerLabel, &rng);
  CHECK(p[0] != p[1]);
  CHECK(draw_thetas(2, ThetaMode::Conservative, nullptr) == std::vector<double>{1.0, 1.0});
  CHECK_THROWS(draw_thetas(2, ThetaMode::Shared, nullptr));
  CHECK(parse_theta_mode("per-label") == ThetaMode::PerLabel);
  CHECK_THROWS(parse_theta_mode("random"));
}

TEST_CASE("critical score order statistics", "[conformal]") {
  std::vector<double> v = ladder(99);
  std::reverse(v.begin(), v.end());  // input order does not matter
  CalibrationScores cal(v);
  CHECK(critical_score(cal, 0.1) == 0.90);
  CalibrationScores nine(ladder(9));
  CHECK_THROWS_AS(critical_score(nine, 0.05), std::invalid_argument);
  CHECK(critical_score(nine, 0.5) == 0.05);
  // 0.7 * 10 evaluates to 6.999... in floating point and must still pick the 7th
  CHECK(critical_score(nine, 0.7) == 0.03);
}

TEST_CASE("plain and normalized intervals", "[conformal]") {
  // five residuals, eps = 1/3 selects the 2nd largest
  CalibrationScores cal(residual_scores(std::vector<double>{0, 0, 0, 0, 0}, std::vector<double>{0.1, -0.5, 0.7, 0.2, 0.3}));
  auto iv = interval_plain(2.0, cal, 1.0 / 3.0);
  CHECK(iv.lower == Catch::Approx(1.5));
  CHECK(iv.upper == Catch::Approx(2.5));
  CHECK(interval_plain(-7.0, cal, 1.0 / 3.0).width() == iv.width());
  CalibrationScores zero(std::vector<double>(20, 0.0));
  CHECK(interval_plain(1.0, zero, 0.1).width() == 0.0);

  Rng rng(5);
  std::vector<double> pred(50), targ(50), ones(50, 1.0), twos(50, 2.0);
  for (int i = 0; i < 50; ++i) {
    pred[i] = rng.normal();
    targ[i] = pred[i] + rng.normal();
  }
  auto plain = residual_scores(pred, targ);
  auto norm1 = normalized_scores(pred, ones, targ);
  auto norm2 = normalized_scores(pred, twos, targ);
  CHECK(norm1.descending() == plain.descending());
  auto a = interval_plain(0.3, plain, 0.1);
  auto b = interval_normalized(0.3, 1.0, norm1, 0.1);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  auto c = interval_normalized(0.3, 2.0, norm2, 0.1);
  CHECK(c.lower == Catch::Approx(a.lower));
  CHECK(c.upper == Catch::Approx(a.upper));
  // the floor keeps a zero normalizer finite
  auto z = normalized_scores(std::vector<double>{0.0}, std::vector<double>{0.0}, std::vector<double>{1e-6});
  CHECK(z.descending()[0] == Catch::Approx(1.0));
}

TEST_CASE("conformalized quantile regression", "[conformal]") {
  CHECK(cqr_score(1, 3, 4) == 1);
  CHECK(cqr_score(1, 3, 2) == -1);
  CHECK(cqr_score(1, 3, 0) == 1);

  // ceil(0.9 * 100) = 90th smallest
  CalibrationScores cal(ladder(99));
  CHECK(cqr_tau(cal, 0.1) == 0.90);
  CHECK_THROWS(cqr_tau(CalibrationScores(ladder(5)), 0.1));

  CalibrationScores zeros(std::vector<double>(30, 0.0));
  auto same = cqr_interval(1.0, 2.0, zeros, 0.1);
  CHECK(same.lower == 1.0);
  CHECK(same.upper == 2.0);

  // every calibration target sits 0.2 inside its band
  std::vector<double> lo(40), hi(40), t(40);
  for (int i = 0; i < 40; ++i) {
    lo[i] = i;
    hi[i] = i + 1.0;
    t[i] = (i % 2 == 0) ? lo[i] + 0.2 : hi[i] - 0.2;
  }
  auto inside = cqr_scores(lo, hi, t);
  CHECK(cqr_tau(inside, 0.1) == Catch::Approx(-0.2));
  auto tight = cqr_interval(0.0, 1.0, inside, 0.1);
  CHECK(tight.lower == Catch::Approx(0.2));
  CHECK(tight.upper == Catch::Approx(0.8));
  // shrinking past the midpoint collapses instead of inverting
  auto collapsed = cqr_interval(0.0, 0.2, inside, 0.1);
  CHECK(collapsed.lower == collapsed.upper);
  CHECK(collapsed.lower == Catch::Approx(0.1));
}

TEST_CASE("regions shrink as epsilon grows under shared draws", "[conformal][property]") {
  Rng rng(1);
  auto cal = gaussian_calibration(500, 0.5, false, rng);
  auto test = synth::gaussian_classes(2000, 0.5, rng);
  for (const auto& p : test) {
    auto lik = synth::bayes_likelihoods(p);
    auto thetas = draw_thetas(2, ThetaMode::PerLabel, &rng);
    auto pv = cal.p_values(lik, thetas);
    double e_prev = 0.01;
    auto prev = region_from_p_values(pv, e_prev);
    for (double e = 0.02; e < 1.0; e += 0.01) {
      auto cur = region_from_p_values(pv, e);
      for (auto l : cur.labels) REQUIRE(prev.contains(l));
      prev = cur;
    }
  }
}

TEST_CASE("singleton regions hold the most likely label", "[conformal][property]") {
  Rng rng(2);
  for (bool conditional : {false}) {
    auto cal = gaussian_calibration(1000, 0.5, conditional, rng);
    auto test = synth::gaussian_classes(10000, 0.5, rng);
    std::size_t singletons = 0;
    for (const auto& p : test) {
      auto lik = synth::bayes_likelihoods(p);
      for (double eps : {0.05, 0.1, 0.2, 0.4}) {
        auto r = class_region(lik, cal, eps, ThetaMode::Shared, &rng);
        if (r.size() != 1) continue;
        ++singletons;
        const std::size_t argmax = lik[1] > lik[0] ? 1 : 0;
        REQUIRE(r.labels[0] == argmax);
      }
    }
    CHECK(singletons > 10000);
  }
}

TEST_CASE("smoothed regions are calibrated on exchangeable data", "[conformal][property]") {
  for (double eps : {0.05, 0.1, 0.2}) {
    Rng rng(static_cast<std::uint64_t>(eps * 1000));
    auto cal = gaussian_calibration(1000, 0.5, false, rng);
    auto test = synth::gaussian_classes(10000, 0.5, rng);
    std::size_t hit = 0;
    for (const auto& p : test) hit += class_region(synth::bayes_likelihoods(p), cal, eps, ThetaMode::Shared, &rng).contains(p.label);
    const double cov = hit / 10000.0;
    INFO("eps " << eps << " coverage " << cov);
    CHECK(cov >= 1 - eps - 0.02);
    CHECK(cov <= 1 - eps + 0.02);
  }
}

TEST_CASE("label-conditional regions cover each class", "[conformal][property]") {
  Rng rng(4);
  // 9:1 imbalance with enough minority points for a stable per-class rate
  auto cal = gaussian_calibration(10000, 0.1, true, rng);
  auto test = synth::gaussian_classes(20000, 0.1, rng);
  std::size_t n[2] = {0, 0}, hit[2] = {0, 0};
  for (const auto& p : test) {
    ++n[p.label];
    hit[p.label] += class_region(synth::bayes_likelihoods(p), cal, 0.1, ThetaMode::PerLabel, &rng).contains(p.label);
  }
  for (int j = 0; j < 2; ++j) {
    INFO("class " << j << " n " << n[j]);
    CHECK(std::fabs(static_cast<double>(hit[j]) / n[j] - 0.9) <= 0.03);
  }
}

TEST_CASE("regression intervals cover heteroscedastic data", "[conformal][property]") {
  Rng rng(6);
  auto cal = synth::heteroscedastic(2000, rng);
  auto test = synth::heteroscedastic(10000, rng);
  auto sd = [](double x) { return 0.05 + 0.2 * x; };
  std::vector<double> mean, scale, lo, hi;
  for (const auto& x : cal.x) {
    mean.push_back(x[0]);
    scale.push_back(sd(x[0]));
    lo.push_back(x[0] - 1.645 * sd(x[0]) * 0.5);  // deliberately too narrow
    hi.push_back(x[0] + 1.645 * sd(x[0]) * 0.5);
  }
  auto plain = residual_scores(mean, cal.t);
  auto norm = normalized_scores(mean, scale, cal.t);
  auto cqr = cqr_scores(lo, hi, cal.t);
  std::size_t c_plain = 0, c_norm = 0, c_cqr = 0;
  for (std::size_t i = 0; i < test.t.size(); ++i) {
    const double x = test.x[i][0], t = test.t[i];
    c_plain += interval_plain(x, plain, 0.1).contains(t);
    c_norm += interval_normalized(x, sd(x), norm, 0.1).contains(t);
    c_cqr += cqr_interval(x - 0.8225 * sd(x), x + 0.8225 * sd(x), cqr, 0.1).contains(t);
  }
  for (std::size_t c : {c_plain, c_norm, c_cqr}) {
    const double cov = c / 10000.0;
    CHECK(cov >= 0.88);
    CHECK(cov <= 0.93);
  }
}

TEST_CASE("true-label p-values are uniform", "[conformal][property]") {
  // Exact uniformity is a statement about the joint draw of calibration set
  // and test point, so every test point gets its own calibration sample and
  // the 10^4 p-values are independent.
  Rng rng(8);
  std::vector<double> p;
  for (int i = 0; i < 10000; ++i) {
    auto cal = gaussian_calibration(99, 0.5, false, rng);
    auto t = synth::gaussian_classes(1, 0.5, rng)[0];
    auto thetas = draw_thetas(2, ThetaMode::Shared, &rng);
    p.push_back(cal.p_values(synth::bayes_likelihoods(t), thetas)[t.label]);
  }
  std::sort(p.begin(), p.end());
  double d = 0.0;
  const double n = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) d = std::max({d, (i + 1) / n - p[i], p[i] - i / n});
  CHECK(d < 1.628 / std::sqrt(n));
}

TEST_CASE("calibration scores round-trip through CSV", "[conformal][io]") {
  Rng rng(9);
  std::vector<double> v(123);
  for (auto& x : v) x = rng.normal();
  CalibrationScores cal(v, "|t - f(x)|");
  auto path = std::filesystem::temp_directory_path() / "pmon_test_scores.csv";
  write_scores_csv(path, cal);
  auto back = read_scores_csv(path);
  CHECK(back.descending() == cal.descending());
  CHECK(back.description() == cal.description());
}
