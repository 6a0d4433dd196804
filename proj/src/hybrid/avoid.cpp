#include <cmath>
#include <numbers>
#include <sstream>

#include "pmon/hybrid.hpp"
#include "pmon/text.hpp"

namespace pmon::hybrid {

namespace {

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

struct Obstacle {
  double x, y, trigger_sq;
};

}  // namespace

AvoidExample build_avoid_example(bool stochastic, const AvoidParams& p) {
  const Obstacle obs[2] = {
      {p.ox1, p.oy1, (p.r1 + p.trigger_margin) * (p.r1 + p.trigger_margin)},
      {p.ox2, p.oy2, (p.r2 + p.trigger_margin) * (p.r2 + p.trigger_margin)},
  };
  auto dist_sq = [](const Obstacle& o, std::span<const double> v) {
    return (v[0] - o.x) * (v[0] - o.x) + (v[1] - o.y) * (v[1] - o.y);
  };
  auto near = [=](std::span<const double> v) {
    return dist_sq(obs[0], v) < obs[0].trigger_sq || dist_sq(obs[1], v) < obs[1].trigger_sq;
  };
  const double dt = p.dt;
  const double speed = p.speed;
  const double turn = p.turn_rate * dt;

  auto advance = [=](std::span<const double> v, double heading) {
    return Vec{v[0] + dt * speed * std::cos(heading), v[1] + dt * speed * std::sin(heading), heading};
  };

  HybridSystem sys;
  sys.name = stochastic ? "avoid-stochastic" : "avoid";
  sys.dim = 3;  // x, y, heading
  sys.dt = dt;

  Mode cruise{"cruise", [=](std::span<const double> v, std::span<const double> noise) {
                double heading = v[2];
                if (!noise.empty()) heading = wrap_angle(heading + noise[2]);
                return advance(v, heading);
              }};
  Mode avoid{"avoid", [=](std::span<const double> v, std::span<const double> noise) {
               // turn away from the nearer obstacle: opposite sign of the cross
               // product between heading and direction to its centre
               const Obstacle& o = dist_sq(obs[0], v) <= dist_sq(obs[1], v) ? obs[0] : obs[1];
               double cross = std::cos(v[2]) * (o.y - v[1]) - std::sin(v[2]) * (o.x - v[0]);
               double heading = wrap_angle(v[2] + (cross > 0.0 ? -turn : turn));
               if (!noise.empty()) heading = wrap_angle(heading + noise[2]);
               return advance(v, heading);
             }};
  sys.modes = {std::move(cruise), std::move(avoid)};
  sys.transitions = {
      Transition{0, 1, near, {}, 1.0, "near obstacle"},
      Transition{1, 0, [=](std::span<const double> v) { return !near(v); }, {}, 1.0, "clear of obstacles"},
  };
  if (stochastic) sys.process_noise_std = {0.0, 0.0, p.heading_noise};
  sys.init = InitialDistribution::uniform_box({0.0, 0.0, -std::numbers::pi}, {1.0, 1.0, std::numbers::pi}, 0);

  std::ostringstream fp;
  fp << sys.name << ";o1=" << format_double(p.ox1) << "," << format_double(p.oy1) << "," << format_double(p.r1)
     << ";o2=" << format_double(p.ox2) << "," << format_double(p.oy2) << "," << format_double(p.r2)
     << ";speed=" << format_double(p.speed) << ";turn=" << format_double(p.turn_rate)
     << ";margin=" << format_double(p.trigger_margin) << ";noise=" << format_double(p.heading_noise)
     << ";dt=" << format_double(p.dt);
  sys.fingerprint = fp.str();

  // G[0,H]((x-ox1)^2 + (y-oy1)^2 > r1^2 & (x-ox2)^2 + (y-oy2)^2 > r2^2)
  using stl::constant;
  using stl::var;
  auto clearance = [](double ox, double oy, double r) {
    auto dx = var(0) - constant(ox);
    auto dy = var(1) - constant(oy);
    return stl::atom((dx * dx + dy * dy) - constant(r * r));
  };
  auto property = stl::always(0, p.horizon,
                              stl::conjunction(clearance(p.ox1, p.oy1, p.r1), clearance(p.ox2, p.oy2, p.r2)));
  return AvoidExample{std::move(sys), std::move(property), p.horizon};
}

HybridSystem build_switching_example() {
  HybridSystem sys;
  sys.name = "switching";
  sys.dim = 1;
  sys.dt = 0.1;
  auto drift = [](double rate) {
    return [rate](std::span<const double> v, std::span<const double>) { return Vec{v[0] + rate}; };
  };
  sys.modes = {Mode{"low", drift(0.1)}, Mode{"high", drift(0.25)}};
  auto at_top = [](std::span<const double> v) { return v[0] >= 1.0; };
  auto to_zero = [](std::span<const double>) { return Vec{0.0}; };
  for (ModeId src : {0, 1}) {
    sys.transitions.push_back(Transition{src, 0, at_top, to_zero, 1.0, "x0 >= 1"});
    sys.transitions.push_back(Transition{src, 1, at_top, to_zero, 3.0, "x0 >= 1"});
  }
  sys.stochastic_transitions = true;
  sys.init = InitialDistribution::uniform_box({0.0}, {1.0}, 0);
  sys.fingerprint = "switching;low=0.1;high=0.25;w=1,3";
  return sys;
}

}  // namespace pmon::hybrid
