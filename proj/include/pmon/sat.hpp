#pragma once

// Satisfaction oracles (simulate + monitor) and the three dataset families:
// full observability, partial observability and stochastic sample labels.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pmon/hybrid.hpp"
#include "pmon/stl.hpp"

namespace pmon::sat {

using hybrid::HybridSystem;
using hybrid::State;
using stl::RobustnessKind;

struct SatLabel {
  enum class Kind { Boolean, Real, Samples };
  Kind kind = Kind::Real;
  std::vector<double> values;  // one entry unless kind == Samples

  static SatLabel boolean(bool v) { return {Kind::Boolean, {v ? 1.0 : 0.0}}; }
  static SatLabel real(double v) { return {Kind::Real, {v}}; }
  static SatLabel samples(std::vector<double> v);

  double scalar() const;
  double mean() const;
};

// Simulates horizon steps from s0 and evaluates the formula at t = 0.
SatLabel sat_deterministic(const HybridSystem& sys, const State& s0, const stl::Formula& phi,
                           std::size_t horizon, RobustnessKind kind);
double sat_value(const HybridSystem& sys, const State& s0, const stl::Formula& phi, std::size_t horizon,
                 RobustnessKind kind, Rng* rng = nullptr);

// M independent rollouts of a stochastic system from the same state.
std::vector<double> ssat_empirical(const HybridSystem& sys, const State& s0, const stl::Formula& phi,
                                   std::size_t horizon, std::size_t m, RobustnessKind kind, Rng& rng);

// ceil(level * M)-th smallest value (1-based, clamped to >= 1).
double empirical_quantile(std::span<const double> values, double level);

// Network input for a state: continuous values, plus the mode index when the
// system has more than one mode.
std::vector<double> encode_state(const HybridSystem& sys, const State& s);

enum class DatasetKind { FullObs, PartialObs, Stochastic };
enum class Sampling { Independent, Sequential };

std::string_view to_string(DatasetKind k);
std::string_view to_string(Sampling s);
Sampling parse_sampling(std::string_view s);

struct DatasetMeta {
  DatasetKind kind = DatasetKind::FullObs;
  RobustnessKind semantics = RobustnessKind::Boolean;
  std::size_t n = 0;
  std::size_t m = 1;
  std::size_t past_horizon = 0;    // H_p
  std::size_t future_horizon = 0;  // H_f
  Sampling sampling = Sampling::Independent;
  std::uint64_t seed = 0;
  std::string formula;
  std::string system;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<std::vector<double>> inputs;
  std::vector<SatLabel> labels;
  // State whose future the label describes (s for FO/stochastic, s_t for PO).
  std::vector<State> origins;
  // PO only: flattened true continuous states s_{t-H_p} .. s_t.
  std::vector<std::vector<double>> states;

  std::size_t size() const { return inputs.size(); }
  std::size_t input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
  // Throws std::logic_error when the record invariants are broken.
  void validate() const;
  Dataset subset(std::span<const std::size_t> indices) const;
  std::vector<double> scalar_labels() const;
};

struct GenOptions {
  std::size_t threads = 1;
};

Dataset gen_dataset_fo(const HybridSystem& sys, const stl::Formula& phi, std::size_t n, std::size_t horizon,
                       RobustnessKind kind, std::uint64_t seed, GenOptions opt = {});

struct PoOptions {
  std::size_t past_horizon = 10;
  std::size_t future_horizon = 50;
  Sampling sampling = Sampling::Independent;
  // Samples per simulated run in sequential mode (L); L - H_p windows each.
  std::size_t run_length = 100;
  std::size_t threads = 1;
};

Dataset gen_dataset_po(const HybridSystem& sys, const stl::Formula& phi, const hybrid::ObservationProcess& obs,
                       std::size_t n, RobustnessKind kind, std::uint64_t seed, const PoOptions& opt);

Dataset gen_dataset_stochastic(const HybridSystem& sys, const stl::Formula& phi, std::size_t n, std::size_t m,
                               std::size_t horizon, RobustnessKind kind, std::uint64_t seed, GenOptions opt = {});

// Fresh rollouts from given states (ground-truth test sets use m = 10 x training M).
Dataset resample_stochastic(const HybridSystem& sys, const stl::Formula& phi, std::span<const State> states,
                            std::size_t m, std::size_t horizon, RobustnessKind kind, std::uint64_t seed,
                            GenOptions opt = {});

// <stem>.csv with columns in0..in{d-1},label (or s0..s{M-1}), and
// <stem>.meta with `key = value` lines.
void write_dataset(const std::filesystem::path& stem, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& stem);

}  // namespace pmon::sat
