#include <cmath>
#include <numeric>

#include "pmon/hybrid.hpp"

namespace pmon::hybrid {

InitialDistribution InitialDistribution::uniform_box(Vec lo, Vec hi, ModeId mode) {
  return mixture({Box{std::move(lo), std::move(hi), mode}}, {1.0});
}

InitialDistribution InitialDistribution::mixture(std::vector<Box> boxes, std::vector<double> weights) {
  if (boxes.empty() || boxes.size() != weights.size()) {
    throw std::invalid_argument("initial mixture needs one weight per box");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    if (b.lo.size() != b.hi.size()) throw std::invalid_argument("box bounds differ in dimension");
    for (std::size_t k = 0; k < b.lo.size(); ++k) {
      if (!(b.lo[k] <= b.hi[k])) throw std::invalid_argument("box lower bound exceeds upper bound");
    }
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("negative mixture weight");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mixture weights must sum to 1");
  InitialDistribution d;
  d.boxes_ = std::move(boxes);
  d.weights_ = std::move(weights);
  return d;
}

State InitialDistribution::sample(Rng& rng) const {
  if (boxes_.empty()) throw std::logic_error("initial distribution not set");
  std::size_t pick = 0;
  if (boxes_.size() > 1) {
    double u = rng.uniform();
    double acc = 0.0;
    pick = boxes_.size() - 1;
    for (std::size_t i = 0; i < boxes_.size(); ++i) {
      acc += weights_[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
  }
  const Box& b = boxes_[pick];
  State s{b.mode, Vec(b.lo.size())};
  for (std::size_t k = 0; k < b.lo.size(); ++k) {
    s.values[k] = b.lo[k] == b.hi[k] ? b.lo[k] : rng.uniform(b.lo[k], b.hi[k]);
  }
  return s;
}

std::vector<std::string> HybridSystem::mode_names() const {
  std::vector<std::string> out;
  for (const auto& m : modes) out.push_back(m.name);
  return out;
}

void HybridSystem::validate() const {
  if (dim == 0) throw std::invalid_argument("system dimension must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("system time step must be positive");
  if (modes.empty()) throw std::invalid_argument("system needs at least one mode");
  const auto n_modes = static_cast<ModeId>(modes.size());
  for (const auto& m : modes) {
    if (!m.update) throw std::invalid_argument("mode '" + m.name + "' has no update map");
    if (!(m.stay_weight >= 0.0)) throw std::invalid_argument("negative stay weight");
  }
  for (const auto& t : transitions) {
    if (t.source < 0 || t.source >= n_modes || t.target < 0 || t.target >= n_modes) {
      throw std::invalid_argument("transition references an unknown mode");
    }
    if (!t.guard) throw std::invalid_argument("transition without guard");
    if (!(t.weight >= 0.0)) throw std::invalid_argument("negative transition weight");
  }
  if (!process_noise_std.empty() && process_noise_std.size() != dim) {
    throw std::invalid_argument("process noise dimension mismatch");
  }
  for (double s : process_noise_std) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("invalid process noise std");
  }
  for (const auto& b : init.boxes()) {
    if (b.lo.size() != dim) throw std::invalid_argument("initial box dimension mismatch");
    if (b.mode < 0 || b.mode >= n_modes) throw std::invalid_argument("initial box mode unknown");
  }
}

BranchMass branch_mass(const HybridSystem& sys, const State& post) {
  BranchMass m;
  for (std::size_t i = 0; i < sys.transitions.size(); ++i) {
    const auto& t = sys.transitions[i];
    if (t.source == post.mode && t.weight > 0.0 && t.guard(post.values)) {
      m.transitions.emplace_back(i, t.weight);
    }
  }
  m.stay = m.transitions.empty() ? 1.0 : sys.modes[post.mode].stay_weight;
  return m;
}

namespace {

State fire(const HybridSystem& sys, const State& post, std::size_t ti) {
  const auto& t = sys.transitions[ti];
  State next{t.target, t.reset ? t.reset(post.values) : post.values};
  if (next.values.size() != sys.dim) throw std::runtime_error("reset map changed the state dimension");
  return next;
}

}  // namespace

State step(const HybridSystem& sys, const State& s, Rng* rng) {
  if (s.values.size() != sys.dim) {
    throw std::invalid_argument("state dimension " + std::to_string(s.values.size()) +
                                " does not match system dimension " + std::to_string(sys.dim));
  }
  if (s.mode < 0 || static_cast<std::size_t>(s.mode) >= sys.modes.size()) {
    throw std::invalid_argument("state mode out of range");
  }
  const bool stochastic = sys.is_stochastic();
  if (stochastic && rng == nullptr) throw std::invalid_argument("stochastic system requires a random stream");

  Vec noise;
  if (!sys.process_noise_std.empty()) {
    noise.resize(sys.dim);
    for (std::size_t k = 0; k < sys.dim; ++k) {
      noise[k] = sys.process_noise_std[k] > 0.0 ? rng->normal(0.0, sys.process_noise_std[k]) : 0.0;
    }
  }
  State post{s.mode, sys.modes[s.mode].update(s.values, noise)};
  if (post.values.size() != sys.dim) throw std::runtime_error("update map changed the state dimension");

  BranchMass mass = branch_mass(sys, post);
  if (mass.transitions.empty()) return post;

  if (!sys.stochastic_transitions) {
    if (mass.transitions.size() > 1) {
      throw NondeterminismError("two transitions enabled at once in deterministic system '" + sys.name +
                                "' (mode " + sys.modes[post.mode].name + ")");
    }
    return fire(sys, post, mass.transitions.front().first);
  }

  double total = mass.stay;
  for (const auto& [i, w] : mass.transitions) total += w;
  if (!(total > 0.0)) throw std::runtime_error("transition weights are not normalisable");
  double u = rng->uniform(0.0, total);
  if (u < mass.stay) return post;
  u -= mass.stay;
  for (const auto& [i, w] : mass.transitions) {
    if (u < w) return fire(sys, post, i);
    u -= w;
  }
  return fire(sys, post, mass.transitions.back().first);
}

stl::Signal simulate(const HybridSystem& sys, const State& s0, std::size_t horizon, Rng* rng) {
  stl::Signal sig(sys.dt, sys.dim);
  if (s0.values.size() != sys.dim) throw std::invalid_argument("initial state dimension mismatch");
  sig.push_back(s0.mode, s0.values);
  State cur = s0;
  for (std::size_t i = 0; i < horizon; ++i) {
    cur = step(sys, cur, rng);
    sig.push_back(cur.mode, cur.values);
  }
  return sig;
}

std::size_t probe_determinism(const HybridSystem& sys, std::size_t probes, std::size_t depth, Rng& rng) {
  std::size_t violations = 0;
  for (std::size_t p = 0; p < probes; ++p) {
    State cur = sys.init.sample(rng);
    for (std::size_t d = 0; d <= depth; ++d) {
      if (branch_mass(sys, cur).transitions.size() > 1) {
        ++violations;
        break;
      }
      Vec noise;
      if (!sys.process_noise_std.empty()) {
        noise.resize(sys.dim);
        for (std::size_t k = 0; k < sys.dim; ++k) {
          noise[k] = sys.process_noise_std[k] > 0.0 ? rng.normal(0.0, sys.process_noise_std[k]) : 0.0;
        }
      }
      State post{cur.mode, sys.modes[cur.mode].update(cur.values, noise)};
      auto mass = branch_mass(sys, post);
      if (mass.transitions.size() > 1) {
        ++violations;
        break;
      }
      cur = mass.transitions.empty() ? post : fire(sys, post, mass.transitions.front().first);
    }
  }
  return violations;
}

ObservationProcess ObservationProcess::identity(std::size_t dim, double noise_std) {
  ObservationProcess o;
  o.proj = [](std::span<const double> v) { return Vec(v.begin(), v.end()); };
  o.out_dim = dim;
  o.noise_std.assign(dim, noise_std);
  return o;
}

ObservationProcess ObservationProcess::select(std::vector<std::size_t> indices, Vec noise_std) {
  if (noise_std.size() != indices.size()) throw std::invalid_argument("one noise std per observed component");
  ObservationProcess o;
  o.out_dim = indices.size();
  o.proj = [idx = std::move(indices)](std::span<const double> v) {
    Vec out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx.at(i)];
    return out;
  };
  o.noise_std = std::move(noise_std);
  return o;
}

std::vector<Vec> observe(const stl::Signal& traj, const ObservationProcess& obs, Rng& rng) {
  for (double s : obs.noise_std) {
    if (!std::isfinite(s) || s < 0.0) throw std::invalid_argument("observation noise std must be finite");
  }
  std::vector<Vec> out;
  out.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    Vec y = obs.proj(traj.values(i));
    if (y.size() != obs.noise_std.size()) throw std::runtime_error("projection dimension mismatch");
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (obs.noise_std[k] > 0.0) y[k] += rng.normal(0.0, obs.noise_std[k]);
    }
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace pmon::hybrid
