#include <cmath>
#include <stdexcept>

#include "pmon/cli.hpp"
#include "pmon/kv_config.hpp"
#include "pmon/text.hpp"

namespace pmon::cli {

std::string_view to_string(Problem p) {
  switch (p) {
    case Problem::FullObs: return "fo";
    case Problem::PoEnd2End: return "po-end2end";
    case Problem::PoTwoStep: return "po-twostep";
    case Problem::Stochastic: return "stochastic";
  }
  return "?";
}

namespace {

using Section = KvConfig::Section;

Problem parse_problem(const std::string& s) {
  for (Problem p : {Problem::FullObs, Problem::PoEnd2End, Problem::PoTwoStep, Problem::Stochastic}) {
    if (to_string(p) == s) return p;
  }
  throw ConfigError("[experiment] problem must be fo|po-end2end|po-twostep|stochastic");
}

bool get_bool(const Section* s, const std::string& key, bool fallback) {
  if (!s || !s->has(key)) return fallback;
  const std::string& v = s->get(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("[" + s->name + "] " + key + " must be true|false");
}

std::size_t get_count(const Section* s, const std::string& key, std::size_t fallback, std::size_t min = 0) {
  if (!s || !s->has(key)) return fallback;
  const long long v = s->get_int(key);
  if (v < static_cast<long long>(min)) {
    throw ConfigError("[" + s->name + "] " + key + " must be >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

double get_real(const Section* s, const std::string& key, double fallback) {
  return s && s->has(key) ? s->get_double(key) : fallback;
}

// Wraps std::invalid_argument from enum parsers into ConfigError.
template <typename Fn>
auto as_config(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

void read_avoid(const Section* s, hybrid::AvoidParams& p) {
  if (!s) return;
  p.ox1 = get_real(s, "ox1", p.ox1);
  p.oy1 = get_real(s, "oy1", p.oy1);
  p.r1 = get_real(s, "r1", p.r1);
  p.ox2 = get_real(s, "ox2", p.ox2);
  p.oy2 = get_real(s, "oy2", p.oy2);
  p.r2 = get_real(s, "r2", p.r2);
  p.speed = get_real(s, "speed", p.speed);
  p.turn_rate = get_real(s, "turn_rate", p.turn_rate);
  p.trigger_margin = get_real(s, "trigger_margin", p.trigger_margin);
  p.heading_noise = get_real(s, "heading_noise", p.heading_noise);
  p.dt = get_real(s, "dt", p.dt);
  if (!(p.dt > 0.0) || !(p.r1 > 0.0) || !(p.r2 > 0.0) || !(p.heading_noise >= 0.0)) {
    throw ConfigError("[avoid] dt and radii must be positive, heading_noise non-negative");
  }
}

}  // namespace

Experiment parse_experiment(const std::string& text, const std::filesystem::path& base_dir, const std::string& origin) {
  KvConfig cfg = KvConfig::parse(text, origin);
  Experiment e;
  const Section& ex = cfg.require("experiment");
  e.problem = parse_problem(ex.get("problem"));
  e.semantics = as_config("[experiment] semantics", [&] { return stl::parse_robustness_kind(ex.get_or("semantics", "boolean")); });
  e.system_ref = ex.get("system");
  e.formula_text = ex.get_or("formula", "");
  e.seed = as_config("[experiment] seed", [&] { return static_cast<std::uint64_t>(std::stoull(ex.get_or("seed", "1"))); });
  e.output = ex.get_or("output", "out");
  if (e.output.is_relative()) e.output = base_dir / e.output;
  e.threads = get_count(&ex, "threads", 1, 1);

  const Section* data = cfg.find("data");
  e.n = get_count(data, "N", e.n, 10);
  e.n_test = get_count(data, "N_test", e.n_test, 1);
  e.m = get_count(data, "M", e.m, 1);
  e.m_test = get_count(data, "M_test", 10 * e.m, 1);
  e.horizon = get_count(data, "H_f", e.horizon, 0);
  e.po.future_horizon = e.horizon;
  e.po.past_horizon = get_count(data, "H_p", e.po.past_horizon, 0);
  e.po.run_length = get_count(data, "run_length", e.po.run_length, 1);
  if (data && data->has("sampling")) {
    e.po.sampling = as_config("[data] sampling", [&] { return sat::parse_sampling(data->get("sampling")); });
  }
  if (e.po.sampling == sat::Sampling::Sequential && e.po.past_horizon >= e.po.run_length) {
    throw ConfigError("[data] H_p must be smaller than run_length for sequential sampling");
  }

  if (const Section* obs = cfg.find("observation")) {
    if (obs->has("indices")) {
      for (double v : obs->get_doubles("indices")) {
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
          throw ConfigError("[observation] indices must be non-negative integers");
        }
        e.obs_indices.push_back(static_cast<std::size_t>(v));
      }
    }
    if (obs->has("noise_std")) e.obs_noise = obs->get_doubles("noise_std");
  }

  auto& mc = e.monitor;
  const Section* cp = cfg.find("conformal");
  mc.epsilon = get_real(cp, "epsilon", mc.epsilon);
  if (!(mc.epsilon > 0.0 && mc.epsilon < 1.0)) throw ConfigError("[conformal] epsilon must lie in (0,1)");
  if (cp && cp->has("split")) {
    auto f = cp->get_doubles("split");
    if (f.size() != 3) throw ConfigError("[conformal] split needs three fractions train,cal,val");
    mc.split = {f[0], f[1], f[2]};
  }
  as_config("[conformal] split", [&] {
    mc.split.validate();
    return 0;
  });
  mc.label_conditional = get_bool(cp, "label_conditional", false);
  if (cp && cp->has("theta")) mc.theta = as_config("[conformal] theta", [&] { return conformal::parse_theta_mode(cp->get("theta")); });
  if (cp && cp->has("normalizer")) {
    const std::string& v = cp->get("normalizer");
    if (v != "none" && v != "residual") throw ConfigError("[conformal] normalizer must be none|residual");
    mc.normalizer = v == "residual" ? monitor::NormalizerKind::Residual : monitor::NormalizerKind::None;
  }
  if (cp && cp->has("cqr_calibration")) {
    const std::string& v = cp->get("cqr_calibration");
    if (v != "single" && v != "all") throw ConfigError("[conformal] cqr_calibration must be single|all");
    mc.cqr_calibration = v == "all" ? monitor::CalibrationSamples::All : monitor::CalibrationSamples::Single;
  }
  mc.conformal_estimator = get_bool(cp, "conformal_estimator", false);

  const Section* tr = cfg.find("train");
  auto& tc = mc.train;
  tc.learning_rate = get_real(tr, "learning_rate", tc.learning_rate);
  tc.epochs = get_count(tr, "epochs", tc.epochs, 1);
  tc.batch_size = get_count(tr, "batch_size", tc.batch_size, 1);
  tc.momentum = get_real(tr, "momentum", tc.momentum);
  if (tr && tr->has("hidden")) {
    tc.hidden.clear();
    for (double v : tr->get_doubles("hidden")) {
      if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw ConfigError("[train] hidden widths must be positive integers");
      }
      tc.hidden.push_back(static_cast<std::size_t>(v));
    }
  }
  tc.collapsed_quantiles = get_bool(tr, "collapsed_quantiles", false);
  tc.eps_lo = mc.epsilon / 2.0;
  tc.eps_hi = 1.0 - mc.epsilon / 2.0;
  as_config("[train]", [&] {
    tc.validate();
    return 0;
  });
  // every random stream below derives from the master seed
  tc.seed = derive_seed(e.seed, 3);
  mc.seed = e.seed;
  mc.threads = e.threads;

  const Section* rj = cfg.find("rejection");
  e.rejection = get_bool(rj, "enabled", true);
  if (rj && rj->has("error_kind")) e.error_kind = as_config("[rejection] error_kind", [&] { return monitor::parse_error_kind(rj->get("error_kind")); });

  const Section* al = cfg.find("active");
  e.active_rounds = get_count(al, "rounds", 0);
  e.active_budget = get_count(al, "budget", e.active_budget, 1);
  e.active_pool = get_count(al, "pool", e.active_pool, 1);
  if (e.active_rounds > 0 && e.problem != Problem::FullObs) throw ConfigError("[active] requires problem = fo");
  if (e.active_rounds > 0 && e.active_budget > e.active_pool) throw ConfigError("[active] budget exceeds pool");

  read_avoid(cfg.find("avoid"), e.avoid);
  e.avoid.horizon = static_cast<int>(e.horizon);

  // system
  bool avoid_builtin = false;
  if (e.system_ref == "builtin:avoid" || e.system_ref == "builtin:avoid-stochastic") {
    auto ex_avoid = hybrid::build_avoid_example(e.system_ref == "builtin:avoid-stochastic", e.avoid);
    e.system = std::move(ex_avoid.system);
    if (e.formula_text.empty()) e.formula = std::move(ex_avoid.property);
    avoid_builtin = true;
  } else if (e.system_ref == "builtin:switching") {
    e.system = hybrid::build_switching_example();
  } else {
    std::filesystem::path p = e.system_ref;
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) throw ConfigError("[experiment] system file not found: " + p.string());
    e.system = hybrid::load_system(p);
  }

  if (!e.formula_text.empty()) {
    try {
      e.formula = stl::parse_formula(e.formula_text, e.system.mode_names());
    } catch (const stl::ParseError& err) {
      throw ConfigError("[experiment] formula: " + std::string(err.what()));
    }
  } else if (!avoid_builtin) {
    throw ConfigError("[experiment] formula is required for this system");
  }
  if (stl::max_var_index(e.formula) >= static_cast<int>(e.system.dim)) {
    throw ConfigError("[experiment] formula references a variable beyond the system dimension");
  }
  if (static_cast<std::size_t>(stl::horizon(e.formula)) > e.horizon) {
    throw ConfigError("[experiment] formula horizon " + std::to_string(stl::horizon(e.formula)) + " exceeds H_f " +
                      std::to_string(e.horizon));
  }

  const bool stochastic = e.system.is_stochastic();
  if (e.problem == Problem::Stochastic && !stochastic) throw ConfigError("problem = stochastic needs a stochastic system");
  if (e.problem != Problem::Stochastic && stochastic) throw ConfigError("problem = " + std::string(to_string(e.problem)) + " needs a deterministic system");
  if (e.problem == Problem::FullObs || e.problem == Problem::Stochastic) {
    if (!e.obs_indices.empty() || !e.obs_noise.empty()) throw ConfigError("[observation] only applies to PO problems");
  }
  for (std::size_t i : e.obs_indices) {
    if (i >= e.system.dim) throw ConfigError("[observation] index beyond the system dimension");
  }
  const std::size_t obs_dim = e.obs_indices.empty() ? e.system.dim : e.obs_indices.size();
  if (!e.obs_noise.empty() && e.obs_noise.size() != obs_dim && e.obs_noise.size() != 1) {
    throw ConfigError("[observation] noise_std needs one value or one per observed component");
  }
  for (double s : e.obs_noise) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("[observation] noise_std must be finite and non-negative");
  }
  return e;
}

Experiment load_experiment(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& err) {
    throw ConfigError(err.what());
  }
  Experiment e = parse_experiment(text, path.parent_path(), path.string());
  e.source = path;
  return e;
}

}  // namespace pmon::cli
