#include <stdexcept>

#include "pmon/parallel.hpp"
#include "pmon/sat.hpp"

namespace pmon::sat {

void Dataset::validate() const {
  if (inputs.size() != labels.size() || origins.size() != labels.size()) {
    throw std::logic_error("dataset: inputs, labels and origins differ in length");
  }
  if (!states.empty() && states.size() != inputs.size()) throw std::logic_error("dataset: state records mismatch");
  for (const auto& x : inputs) {
    if (x.size() != inputs.front().size()) throw std::logic_error("dataset: ragged inputs");
  }
  for (const auto& l : labels) {
    if (l.values.empty()) throw std::logic_error("dataset: empty label");
    if (l.kind == SatLabel::Kind::Samples && l.values.size() != meta.m) {
      throw std::logic_error("dataset: sample label length differs from M");
    }
    if (l.kind == SatLabel::Kind::Boolean && l.values[0] != 0.0 && l.values[0] != 1.0) {
      throw std::logic_error("dataset: boolean label outside {0,1}");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.meta = meta;
  out.meta.n = indices.size();
  for (std::size_t i : indices) {
    out.inputs.push_back(inputs.at(i));
    out.labels.push_back(labels.at(i));
    out.origins.push_back(origins.at(i));
    if (!states.empty()) out.states.push_back(states.at(i));
  }
  return out;
}

std::vector<double> Dataset::scalar_labels() const {
  std::vector<double> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(l.kind == SatLabel::Kind::Samples ? l.mean() : l.scalar());
  return out;
}

namespace {

DatasetMeta base_meta(DatasetKind kind, const HybridSystem& sys, const stl::Formula& phi, std::size_t n,
                      RobustnessKind semantics, std::uint64_t seed) {
  DatasetMeta m;
  m.kind = kind;
  m.semantics = semantics;
  m.n = n;
  m.seed = seed;
  m.formula = stl::to_string(phi);
  m.system = sys.fingerprint;
  return m;
}

void resize(Dataset& d, std::size_t n, bool with_states) {
  d.inputs.resize(n);
  d.labels.resize(n);
  d.origins.resize(n);
  if (with_states) d.states.resize(n);
}

std::vector<double> flatten(const std::vector<hybrid::Vec>& rows, std::size_t first, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = first; i < first + count; ++i) out.insert(out.end(), rows[i].begin(), rows[i].end());
  return out;
}

}  // namespace

Dataset gen_dataset_fo(const HybridSystem& sys, const stl::Formula& phi, std::size_t n, std::size_t horizon,
                       RobustnessKind kind, std::uint64_t seed, GenOptions opt) {
  if (sys.is_stochastic()) throw std::invalid_argument("FO datasets need a deterministic system");
  Dataset d;
  d.meta = base_meta(DatasetKind::FullObs, sys, phi, n, kind, seed);
  d.meta.future_horizon = horizon;
  resize(d, n, false);
  parallel_for(n, opt.threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    State s = sys.init.sample(rng);
    d.labels[i] = sat_deterministic(sys, s, phi, horizon, kind);
    d.inputs[i] = encode_state(sys, s);
    d.origins[i] = std::move(s);
  });
  return d;
}

Dataset gen_dataset_po(const HybridSystem& sys, const stl::Formula& phi, const hybrid::ObservationProcess& obs,
                       std::size_t n, RobustnessKind kind, std::uint64_t seed, const PoOptions& opt) {
  if (sys.is_stochastic()) throw std::invalid_argument("PO datasets need a deterministic system");
  const std::size_t hp = opt.past_horizon;
  Dataset d;
  d.meta = base_meta(DatasetKind::PartialObs, sys, phi, n, kind, seed);
  d.meta.past_horizon = hp;
  d.meta.future_horizon = opt.future_horizon;
  d.meta.sampling = opt.sampling;
  resize(d, n, true);

  if (opt.sampling == Sampling::Independent) {
    parallel_for(n, opt.threads, [&](std::size_t i) {
      Rng rng(derive_seed(seed, i));
      State s0 = sys.init.sample(rng);
      stl::Signal hist = hybrid::simulate(sys, s0, hp, nullptr);
      auto ys = observe(hist, obs, rng);
      std::vector<hybrid::Vec> xs;
      for (std::size_t t = 0; t <= hp; ++t) xs.emplace_back(hist.values(t).begin(), hist.values(t).end());
      State st{hist.mode(hp), xs.back()};
      d.inputs[i] = flatten(ys, 0, hp + 1);
      d.states[i] = flatten(xs, 0, hp + 1);
      d.labels[i] = sat_deterministic(sys, st, phi, opt.future_horizon, kind);
      d.origins[i] = std::move(st);
    });
    return d;
  }

  const std::size_t run_len = opt.run_length;
  if (hp >= run_len) throw std::invalid_argument("past horizon must be shorter than the run length");
  const std::size_t per_run = run_len - hp;
  const std::size_t runs = (n + per_run - 1) / per_run;
  parallel_for(runs, opt.threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    State s0 = sys.init.sample(rng);
    stl::Signal run = hybrid::simulate(sys, s0, run_len - 1, nullptr);
    auto ys = observe(run, obs, rng);
    std::vector<hybrid::Vec> xs;
    for (std::size_t t = 0; t < run.size(); ++t) xs.emplace_back(run.values(t).begin(), run.values(t).end());
    for (std::size_t w = 0; w < per_run; ++w) {
      const std::size_t i = r * per_run + w;
      if (i >= n) break;
      const std::size_t t = hp + w;
      State st{run.mode(t), xs[t]};
      d.inputs[i] = flatten(ys, t - hp, hp + 1);
      d.states[i] = flatten(xs, t - hp, hp + 1);
      d.labels[i] = sat_deterministic(sys, st, phi, opt.future_horizon, kind);
      d.origins[i] = std::move(st);
    }
  });
  return d;
}

Dataset gen_dataset_stochastic(const HybridSystem& sys, const stl::Formula& phi, std::size_t n, std::size_t m,
                               std::size_t horizon, RobustnessKind kind, std::uint64_t seed, GenOptions opt) {
  if (!sys.is_stochastic()) throw std::invalid_argument("stochastic datasets need a stochastic system");
  if (m == 0) throw std::invalid_argument("need at least one rollout (M >= 1)");
  std::vector<State> states(n);
  Rng init_rng(derive_seed(seed, 0x5eed));
  for (auto& s : states) s = sys.init.sample(init_rng);
  Dataset d = resample_stochastic(sys, phi, states, m, horizon, kind, seed, opt);
  d.meta.n = n;
  return d;
}

Dataset resample_stochastic(const HybridSystem& sys, const stl::Formula& phi, std::span<const State> states,
                            std::size_t m, std::size_t horizon, RobustnessKind kind, std::uint64_t seed,
                            GenOptions opt) {
  const std::size_t n = states.size();
  Dataset d;
  d.meta = base_meta(DatasetKind::Stochastic, sys, phi, n, kind, seed);
  d.meta.m = m;
  d.meta.future_horizon = horizon;
  resize(d, n, false);
  parallel_for(n, opt.threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    d.labels[i] = SatLabel::samples(ssat_empirical(sys, states[i], phi, horizon, m, kind, rng));
    d.inputs[i] = encode_state(sys, states[i]);
    d.origins[i] = states[i];
  });
  return d;
}

}  // namespace pmon::sat
