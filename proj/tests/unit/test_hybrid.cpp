#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pmon/hybrid.hpp"
#include "pmon/kv_config.hpp"
#include "pmon/sat.hpp"

using namespace pmon;
using namespace pmon::hybrid;

namespace {

const char* kResetSystem = R"(
[system]
name = reset
dim = 2
dt = 0.5

[mode]
name = run

[mode]
name = done
c = 0, 1

[transition]
source = run
target = done
guard = x0 >= 1
reset_A = 0, 0; 0, 1

[init]
lo = 0, 0
hi = 1, 1
)";

bool same_signal(const stl::Signal& a, const stl::Signal& b) {
  return a.size() == b.size() && a.modes() == b.modes() && a.raw_values() == b.raw_values();
}

}  // namespace

TEST_CASE("single steps", "[hybrid]") {
  AvoidParams p;
  p.dt = 0.1;
  auto ex = build_avoid_example(false, p);
  State s = step(ex.system, State{0, {0.0, 0.0, 0.0}}, nullptr);
  CHECK(s.mode == 0);
  CHECK(s.values[0] == Catch::Approx(0.1).margin(1e-15));
  CHECK(s.values[1] == Catch::Approx(0.0).margin(1e-15));

  auto still = parse_system("[system]\ndim = 2\ndt = 1\n[mode]\nname = a\n[init]\nlo = 0,0\nhi = 1,1\n");
  State z{0, {0.3, -2.0}};
  CHECK(step(still, z, nullptr).values == z.values);

  auto sys = parse_system(kResetSystem);
  State r = step(sys, State{0, {1.2, 5.0}}, nullptr);
  CHECK(r.mode == 1);
  CHECK(r.values == Vec{0.0, 5.0});
  // the new mode's update applies from the next step on
  CHECK(step(sys, r, nullptr).values == Vec{0.0, 6.0});
}

TEST_CASE("simulate", "[hybrid]") {
  auto ex = build_avoid_example(false);
  State s0{0, {0.1, 0.2, 0.3}};
  auto h0 = simulate(ex.system, s0, 0, nullptr);
  REQUIRE(h0.size() == 1);
  CHECK(std::vector<double>(h0.values(0).begin(), h0.values(0).end()) == s0.values);
  CHECK(same_signal(simulate(ex.system, s0, 40, nullptr), simulate(ex.system, s0, 40, nullptr)));

  auto st = build_avoid_example(true);
  Rng a(17), b(17), c(18);
  auto ra = simulate(st.system, s0, 40, &a);
  CHECK(same_signal(ra, simulate(st.system, s0, 40, &b)));
  CHECK_FALSE(same_signal(ra, simulate(st.system, s0, 40, &c)));
  CHECK_THROWS(simulate(st.system, s0, 5, nullptr));
}

TEST_CASE("deterministic trajectories have the Markov property", "[hybrid][property]") {
  auto ex = build_avoid_example(false);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    State s0 = ex.system.init.sample(rng);
    const std::size_t h1 = rng.index(30), h2 = rng.index(30);
    auto whole = simulate(ex.system, s0, h1 + h2, nullptr);
    auto first = simulate(ex.system, s0, h1, nullptr);
    const std::size_t last = first.size() - 1;
    State mid{first.mode(last), Vec(first.values(last).begin(), first.values(last).end())};
    auto second = simulate(ex.system, mid, h2, nullptr);
    REQUIRE(same_signal(whole.slice(h1, h2 + 1), second));
    REQUIRE(same_signal(whole.slice(0, h1 + 1), first));
  }
}

TEST_CASE("stochastic branching partitions the state space", "[hybrid][property]") {
  std::vector<HybridSystem> systems{build_switching_example(), build_avoid_example(true).system};
  Rng rng(8);
  for (const auto& sys : systems) {
    for (int i = 0; i < 10000; ++i) {
      State s;
      s.mode = static_cast<ModeId>(rng.index(sys.modes.size()));
      for (std::size_t k = 0; k < sys.dim; ++k) s.values.push_back(rng.uniform(-0.5, 1.5));
      auto m = branch_mass(sys, s);
      double moving = 0.0;
      for (auto& [_, w] : m.transitions) moving += w;
      REQUIRE((m.stay > 0.0) != (moving > 0.0));
    }
  }
}

TEST_CASE("sampled branch frequencies follow the weights", "[hybrid][property]") {
  auto sys = build_switching_example();
  Rng rng(99);
  const int n = 20000;
  int high = 0;
  for (int i = 0; i < n; ++i) {
    State next = step(sys, State{0, {0.95}}, &rng);
    REQUIRE(next.values == Vec{0.0});
    high += next.mode == 1;
  }
  const double p = 0.75, sigma = std::sqrt(n * p * (1 - p));
  CHECK(std::fabs(high - n * p) <= 3 * sigma);
  // below the guard nothing fires
  State below = step(sys, State{1, {0.5}}, &rng);
  CHECK(below.mode == 1);
  CHECK(below.values[0] == Catch::Approx(0.75));
}

TEST_CASE("overlapping guards in a deterministic system are rejected", "[hybrid]") {
  // run drifts right; both guards hold once x0 >= 1
  std::string text = std::string(kResetSystem) + "[transition]\nsource = run\ntarget = done\nguard = x0 >= 0.5\n";
  text.replace(text.find("name = run\n"), 11, "name = run\nc = 0.25, 0\n");
  auto sys = parse_system(text);
  CHECK_THROWS_AS(step(sys, State{0, {2.0, 0.0}}, nullptr), NondeterminismError);
  Rng rng(1);
  CHECK(probe_determinism(sys, 500, 5, rng) > 0);
  auto ex = build_avoid_example(false);
  CHECK(probe_determinism(ex.system, 500, 20, rng) == 0);
}

TEST_CASE("system files are validated", "[hybrid][config]") {
  CHECK_THROWS_AS(parse_system("[system]\ndim = 0\ndt = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_system("[system]\ndim = 1\ndt = 1\n[init]\nlo = 0\nhi = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_system("[system]\ndim = 1\ndt = 1\n[mode]\nname = a\n[transition]\nsource = a\ntarget = b\n"
                               "guard = x0 > 0\n[init]\nlo = 0\nhi = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_system("[system]\ndim = 1\ndt = 1\n[mode]\nname = a\n[transition]\nsource = a\ntarget = a\n"
                               "guard = F[0,1](x0 > 0)\n[init]\nlo = 0\nhi = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_system("[system]\ndim = 1\ndt = 1\n[mode]\nname = a\nA = 1, 2\n[init]\nlo = 0\nhi = 1\n"),
                  ConfigError);
}

TEST_CASE("observations", "[hybrid]") {
  auto ex = build_avoid_example(false);
  auto traj = simulate(ex.system, State{0, {0.1, 0.1, 0.0}}, 10, nullptr);
  Rng rng(3);
  auto y = observe(traj, ObservationProcess::identity(3, 0.0), rng);
  REQUIRE(y.size() == traj.size());
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == Vec(traj.values(i).begin(), traj.values(i).end()));

  auto proj = ObservationProcess::select({0, 2}, {0.1, 0.1});
  Rng r1(5), r2(5);
  auto y1 = observe(traj, proj, r1);
  CHECK(y1.front().size() == 2);
  CHECK(y1 == observe(traj, proj, r2));
  CHECK(y1[3][0] != traj.value(3, 0));
}

TEST_CASE("avoid example labels", "[hybrid][sat]") {
  auto ex = build_avoid_example(false);
  // far from both obstacles, heading west away from them
  State safe{0, {0.1, 0.9, std::numbers::pi}};
  CHECK(sat::sat_value(ex.system, safe, ex.property, ex.horizon, stl::RobustnessKind::Boolean) == 1.0);
  State inside{0, {0.4, 0.5, 0.0}};
  auto traj = simulate(ex.system, inside, ex.horizon, nullptr);
  CHECK_FALSE(stl::eval_boolean(ex.property, traj, 0));
  CHECK(sat::sat_value(ex.system, inside, ex.property, ex.horizon, stl::RobustnessKind::Space) < 0.0);
}

TEST_CASE("stochastic avoid has uncertain outcomes near an obstacle", "[hybrid][sat]") {
  auto det = build_avoid_example(false);
  auto sto = build_avoid_example(true);
  // heading east towards obstacle 1, pick the offset whose noise-free
  // robustness is closest to zero
  State best;
  double best_abs = 1e9;
  for (int k = 0; k <= 80; ++k) {
    State s{0, {0.05, 0.3 + 0.005 * k, 0.0}};
    double r = std::fabs(sat::sat_value(det.system, s, det.property, det.horizon, stl::RobustnessKind::Space));
    if (r < best_abs) {
      best_abs = r;
      best = s;
    }
  }
  Rng rng(12);
  auto v = sat::ssat_empirical(sto.system, best, sto.property, sto.horizon, 100, stl::RobustnessKind::Boolean, rng);
  double mean = 0.0;
  for (double x : v) mean += x / v.size();
  CHECK(mean > 0.0);
  CHECK(mean < 1.0);
}

TEST_CASE("trajectory CSV", "[hybrid][io]") {
  auto sys = build_switching_example();
  Rng rng(1);
  auto traj = simulate(sys, State{0, {0.0}}, 2, &rng);
  std::ostringstream out;
  write_trajectory_csv(out, traj);
  CHECK(out.str() == "t,mode,x0\n0.0,0,0.0\n0.1,0,0.1\n0.2,0,0.2\n");
}
