#pragma once

// Discrete-time hybrid automata: per-mode update maps, guarded transitions
// with resets, optional transition weights and diagonal Gaussian process noise.
//
// A step applies the current mode's update and then resolves transitions on
// the updated vector. Mode invariants are implicit: a mode is left as soon as
// an outgoing guard holds.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmon/rng.hpp"
#include "pmon/stl.hpp"

namespace pmon::hybrid {

using stl::ModeId;
using Vec = std::vector<double>;

struct State {
  ModeId mode = 0;
  Vec values;
};

// noise is empty for systems without process noise
using UpdateFn = std::function<Vec(std::span<const double> v, std::span<const double> noise)>;
using GuardFn = std::function<bool(std::span<const double> v)>;
using ResetFn = std::function<Vec(std::span<const double> v)>;

struct Mode {
  std::string name;
  UpdateFn update;
  // Weight of staying put when some outgoing guard holds (stochastic systems).
  double stay_weight = 0.0;
};

struct Transition {
  ModeId source = 0;
  ModeId target = 0;
  GuardFn guard;
  ResetFn reset;  // identity when empty
  double weight = 1.0;
  std::string guard_text;
};

struct Box {
  Vec lo;
  Vec hi;
  ModeId mode = 0;
};

class InitialDistribution {
 public:
  InitialDistribution() = default;
  static InitialDistribution uniform_box(Vec lo, Vec hi, ModeId mode);
  static InitialDistribution mixture(std::vector<Box> boxes, std::vector<double> weights);

  State sample(Rng& rng) const;
  const std::vector<Box>& boxes() const { return boxes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<Box> boxes_;
  std::vector<double> weights_;
};

class NondeterminismError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HybridSystem {
  std::string name;
  std::size_t dim = 0;
  double dt = 1.0;
  std::vector<Mode> modes;
  std::vector<Transition> transitions;
  // Per-component standard deviation; empty means no process noise.
  Vec process_noise_std;
  // Sample among simultaneously enabled transitions instead of rejecting them.
  bool stochastic_transitions = false;
  InitialDistribution init;
  // Identifies the definition (config text hash or builtin parameters).
  std::string fingerprint;

  bool is_stochastic() const { return stochastic_transitions || !process_noise_std.empty(); }
  std::vector<std::string> mode_names() const;
  // Throws std::invalid_argument on inconsistent shapes or indices.
  void validate() const;
};

// Probability mass assigned to staying vs. each enabled transition at a
// post-update state. Exactly one side is positive for well-formed systems.
struct BranchMass {
  double stay = 0.0;
  std::vector<std::pair<std::size_t, double>> transitions;  // (transition index, weight)
};
BranchMass branch_mass(const HybridSystem& sys, const State& post_update);

// rng must be non-null for stochastic systems; it is ignored otherwise.
State step(const HybridSystem& sys, const State& s, Rng* rng);
stl::Signal simulate(const HybridSystem& sys, const State& s0, std::size_t horizon, Rng* rng);

// Randomised check that no reachable state enables two transitions at once.
// Returns the number of offending probe states.
std::size_t probe_determinism(const HybridSystem& sys, std::size_t probes, std::size_t depth, Rng& rng);

// Observation y = proj(v) + w, w ~ N(0, diag(noise_std^2)).
struct ObservationProcess {
  std::function<Vec(std::span<const double>)> proj;
  std::size_t out_dim = 0;
  Vec noise_std;

  static ObservationProcess identity(std::size_t dim, double noise_std);
  static ObservationProcess select(std::vector<std::size_t> indices, Vec noise_std);
};

std::vector<Vec> observe(const stl::Signal& traj, const ObservationProcess& obs, Rng& rng);

// --- running example ----------------------------------------------------------

struct AvoidParams {
  double ox1 = 0.4, oy1 = 0.5, r1 = 0.1;
  double ox2 = 0.7, oy2 = 0.2, r2 = 0.1;
  double speed = 1.0;
  double turn_rate = 6.0;        // rad/s while avoiding
  double trigger_margin = 0.1;   // avoid mode when closer than r + margin to a centre
  double heading_noise = 0.1;    // per-step std of heading noise (stochastic variant)
  double dt = 0.02;
  int horizon = 50;
};

struct AvoidExample {
  HybridSystem system;
  stl::Formula property;
  int horizon;
};

// Point at constant speed on the unit square with two circular obstacles;
// mode 0 cruises straight, mode 1 turns away from the nearest obstacle.
AvoidExample build_avoid_example(bool stochastic, const AvoidParams& p = {});

// Small stochastic system with weighted competing transitions, used to test
// branch sampling: x drifts up by 0.1 per step; at x >= 1 it is reset to 0
// into mode "low" (weight 1) or "high" (weight 3).
HybridSystem build_switching_example();

// --- declarative systems and I/O ------------------------------------------------

HybridSystem load_system(const std::filesystem::path& path);
HybridSystem parse_system(const std::string& text, const std::string& origin = "<string>");

void write_trajectory_csv(std::ostream& out, const stl::Signal& traj);

}  // namespace pmon::hybrid
