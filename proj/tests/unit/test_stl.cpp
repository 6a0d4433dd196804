#include <catch_amalgamated.hpp>

#include <cmath>

#include "naive_stl.hpp"
#include "pmon/stl.hpp"

using namespace pmon;
using namespace pmon::stl;

namespace {

Signal scalar_signal(std::vector<double> xs, double dt = 1.0) {
  std::vector<std::vector<double>> rows;
  for (double x : xs) rows.push_back({x});
  return Signal::from_rows(dt, rows);
}

struct Case {
  Formula f;
  Signal s;
};

std::vector<Case> random_cases(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<Case> out;
  while (out.size() < n) {
    Formula f = naive::random_formula(rng, 3, 2);
    const std::size_t len = 1 + rng.index(30);
    if (static_cast<std::size_t>(horizon(f)) >= len) continue;
    out.push_back({f, naive::random_signal(rng, len, 2)});
  }
  return out;
}

}  // namespace

TEST_CASE("parser builds the expected trees", "[stl][parse]") {
  CHECK(parse_formula("true")->kind == FormulaNode::Kind::True);
  CHECK(equal(parse_formula("G[0,10](x0 > 0.5)"), always(0, 10, atom(var(0) - constant(0.5)))));
  CHECK(equal(parse_formula("x1 < 2"), atom(constant(2) - var(1))));
  CHECK(equal(parse_formula("x0 > 0"), atom(var(0))));
  CHECK(equal(parse_formula("x0 > 1 U[1,3] x1 > 0"), until(1, 3, atom(var(0) - constant(1)), atom(var(1)))));
}

TEST_CASE("parser reports malformed input with a position", "[stl][parse]") {
  try {
    parse_formula("G[5,2](x0>0)");
    FAIL("inverted interval accepted");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
    CHECK(std::string(e.what()).find("inverted interval") != std::string::npos);
    CHECK(std::string(e.what()).find("at position 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_formula(""), ParseError);
  CHECK_THROWS_AS(parse_formula("x0 > "), ParseError);
  CHECK_THROWS_AS(parse_formula("F[0,-1](x0 > 0)"), ParseError);
  CHECK_THROWS_AS(parse_formula("(x0 > 0"), ParseError);
  CHECK_THROWS_AS(parse_formula("loc == warp", std::vector<std::string>{"a", "b"}), ParseError);
  try {
    parse_formula("x0 > 1 $");
  } catch (const ParseError& e) {
    CHECK(e.position() == 7);
  }
}

TEST_CASE("location atoms accept names and indices", "[stl][parse]") {
  std::vector<std::string> modes{"cruise", "avoid"};
  CHECK(equal(parse_formula("loc == avoid", modes), loc(1)));
  CHECK(equal(parse_formula("loc == 0", modes), loc(0)));
}

TEST_CASE("print then parse is the identity on random formulas", "[stl][parse][property]") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    Formula f = naive::random_formula(rng, 3, 3);
    const std::string text = to_string(f);
    INFO(text);
    CHECK(equal(parse_formula(text), f));
  }
}

TEST_CASE("Boolean semantics examples", "[stl][eval]") {
  CHECK(eval_boolean(parse_formula("x0 > 0.5"), scalar_signal({0.7}), 0));
  CHECK_FALSE(eval_boolean(parse_formula("G[0,2](x0 > 0.5)"), scalar_signal({0.7, 0.6, 0.4}), 0));
  CHECK(eval_boolean(parse_formula("F[0,2](x0 > 0.5)"), scalar_signal({0.1, 0.1, 0.6}), 0));
  // g = 0 is not satisfied
  CHECK_FALSE(eval_boolean(parse_formula("x0 > 0.5"), scalar_signal({0.5}), 0));
}

TEST_CASE("space robustness examples", "[stl][eval]") {
  CHECK(eval_space_robustness(parse_formula("x0 > 1"), scalar_signal({3.0}), 0) == 2.0);
  CHECK(eval_space_robustness(parse_formula("G[0,2](x0 > 0.5)"), scalar_signal({0.7, 0.6, 0.4}), 0) ==
        Catch::Approx(-0.1).margin(1e-15));
  CHECK(eval_space_robustness(parse_formula("!(x0 > 1)"), scalar_signal({3.0}), 0) == -2.0);
  CHECK(eval(parse_formula("true"), scalar_signal({0.0}), 0, RobustnessKind::Space) == kSentinel);
}

TEST_CASE("until holds the left operand on a half-open prefix", "[stl][eval]") {
  // right first holds at step 2, left holds on steps 0 and 1 only
  Signal s(1.0, 2);
  s.push_back(0, std::vector<double>{1.0, -1.0});
  s.push_back(0, std::vector<double>{1.0, -1.0});
  s.push_back(0, std::vector<double>{-1.0, 1.0});
  s.push_back(0, std::vector<double>{-1.0, -1.0});
  auto f = parse_formula("(x0 > 0) U[0,3] (x1 > 0)");
  CHECK(eval_boolean(f, s, 0));
  CHECK(eval_space_robustness(f, s, 0) == 1.0);
  CHECK_FALSE(eval_boolean(parse_formula("(x0 > 0) U[3,3] (x1 > 0)"), s, 0));
}

TEST_CASE("time robustness examples", "[stl][eval]") {
  auto f = parse_formula("x0 > 0");
  Signal ones = scalar_signal(std::vector<double>(11, 1.0));
  CHECK(eval_time_robustness(f, ones, 3, RobustnessKind::TimeRight) == 7.0);
  CHECK(eval_time_robustness(f, ones, 3, RobustnessKind::TimeLeft) == 3.0);
  Signal alt = scalar_signal({1, -1, 1, -1, 1, -1, 1});
  CHECK(eval_time_robustness(f, alt, 3, RobustnessKind::TimeRight) == -0.0);
  CHECK(std::signbit(eval_time_robustness(f, alt, 3, RobustnessKind::TimeRight)));
  CHECK(eval_time_robustness(f, alt, 2, RobustnessKind::TimeLeft) == 0.0);
  CHECK_FALSE(std::signbit(eval_time_robustness(f, alt, 2, RobustnessKind::TimeLeft)));
  // dt scales the shift
  Signal slow = scalar_signal({-1, -1, -1, 1}, 0.5);
  CHECK(eval(f, slow, 0, RobustnessKind::TimeRight) == -1.0);
  CHECK(eval(f, slow, 0, RobustnessKind::Boolean) == 0.0);
}

TEST_CASE("evaluation beyond the signal raises a horizon error", "[stl][eval]") {
  auto f = parse_formula("G[0,5](x0 > 0)");
  CHECK_THROWS_AS(eval_boolean(f, scalar_signal({1, 1, 1}), 0), HorizonError);
  CHECK_THROWS_AS(eval_space_robustness(f, scalar_signal(std::vector<double>(6, 1.0)), 1), HorizonError);
  CHECK_NOTHROW(eval_space_robustness(f, scalar_signal(std::vector<double>(6, 1.0)), 0));
}

TEST_CASE("column engine matches the naive recursive evaluator", "[stl][oracle][property]") {
  for (const auto& c : random_cases(21, 1000)) {
    const auto chi = boolean_signal(c.f, c.s);
    const auto rho = robustness_signal(c.f, c.s);
    INFO(to_string(c.f));
    REQUIRE(chi.size() == c.s.size() - horizon(c.f));
    for (std::size_t t = 0; t < chi.size(); ++t) {
      CHECK((chi[t] > 0.5) == naive::sat(c.f, c.s, t));
      CHECK(std::fabs(rho[t] - naive::rob(c.f, c.s, t)) <= 1e-9);
    }
  }
}

TEST_CASE("robustness sign is sound with respect to Boolean satisfaction", "[stl][property]") {
  std::size_t positive = 0, negative = 0;
  for (const auto& c : random_cases(22, 10000)) {
    const auto chi = boolean_signal(c.f, c.s);
    const auto rho = robustness_signal(c.f, c.s);
    for (std::size_t t = 0; t < chi.size(); ++t) {
      if (rho[t] > 0) {
        ++positive;
        REQUIRE(chi[t] == 1.0);
      }
      if (rho[t] < 0) {
        ++negative;
        REQUIRE(chi[t] == 0.0);
      }
    }
  }
  CHECK(positive > 1000);
  CHECK(negative > 1000);
}

TEST_CASE("negation, De Morgan and derived-operator identities", "[stl][property]") {
  const RobustnessKind kinds[] = {RobustnessKind::Boolean, RobustnessKind::Space, RobustnessKind::TimeLeft,
                                  RobustnessKind::TimeRight};
  Rng rng(23);
  for (const auto& c : random_cases(24, 500)) {
    const auto rho = robustness_signal(c.f, c.s);
    const auto neg = robustness_signal(negation(c.f), c.s);
    for (std::size_t t = 0; t < rho.size(); ++t) REQUIRE(neg[t] == -rho[t]);

    Formula g = naive::random_formula(rng, 2, 2);
    if (static_cast<std::size_t>(horizon(g)) >= c.s.size()) continue;
    Formula lhs = disjunction(c.f, g);
    Formula rhs = negation(conjunction(negation(c.f), negation(g)));
    const std::size_t n = c.s.size() - horizon(lhs);
    for (std::size_t t = 0; t < n; ++t) {
      for (auto k : kinds) REQUIRE(eval(lhs, c.s, t, k) == eval(rhs, c.s, t, k));
    }

    const int a = static_cast<int>(rng.index(3)), b = a + static_cast<int>(rng.index(3));
    if (static_cast<std::size_t>(horizon(c.f) + b) >= c.s.size()) continue;
    Formula ev = eventually(a, b, c.f);
    Formula ev_core = until(a, b, make_true(), c.f);
    Formula al = always(a, b, c.f);
    Formula al_core = negation(eventually(a, b, negation(c.f)));
    const std::size_t m = c.s.size() - horizon(ev);
    for (std::size_t t = 0; t < m; ++t) {
      for (auto k : kinds) {
        REQUIRE(eval(ev, c.s, t, k) == eval(ev_core, c.s, t, k));
        REQUIRE(eval(al, c.s, t, k) == eval(al_core, c.s, t, k));
        REQUIRE(eval(c.f, c.s, t, k) == eval(desugar(c.f), c.s, t, k));
      }
    }
  }
}

TEST_CASE("time robustness agrees with a naive scan of the Boolean signal", "[stl][oracle]") {
  for (const auto& c : random_cases(25, 300)) {
    const std::size_t n = c.s.size() - horizon(c.f);
    for (std::size_t t = 0; t < n; ++t) {
      const bool v = naive::sat(c.f, c.s, t);
      std::size_t right = 0, left = 0;
      while (t + right + 1 < n && naive::sat(c.f, c.s, t + right + 1) == v) ++right;
      while (left < t && naive::sat(c.f, c.s, t - left - 1) == v) ++left;
      const double sign = v ? 1.0 : -1.0;
      REQUIRE(eval(c.f, c.s, t, RobustnessKind::TimeRight) == sign * right * c.s.dt());
      REQUIRE(eval(c.f, c.s, t, RobustnessKind::TimeLeft) == sign * left * c.s.dt());
    }
  }
}

TEST_CASE("structural helpers", "[stl]") {
  auto f = parse_formula("G[0,5](F[1,3](x2 > 0) & x0 > 1) | loc == 1", std::vector<std::string>{"a", "b"});
  CHECK(horizon(f) == 8);
  CHECK(max_var_index(f) == 2);
  CHECK_FALSE(is_state_predicate(f));
  CHECK(is_state_predicate(parse_formula("x0 > 1 & !(x1 < 0)")));
  CHECK(holds_at(parse_formula("x0 > 1 & loc == 0"), 0, std::vector<double>{2.0}));
  CHECK_FALSE(holds_at(parse_formula("x0 > 1 & loc == 0"), 1, std::vector<double>{2.0}));
}
