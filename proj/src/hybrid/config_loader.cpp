#include <algorithm>

#include "pmon/hybrid.hpp"
#include "pmon/kv_config.hpp"
#include "pmon/text.hpp"

namespace pmon::hybrid {

namespace {

// "a, b; c, d" -> rows
std::vector<Vec> parse_matrix(const std::string& text, std::size_t dim, const std::string& what) {
  std::vector<Vec> rows;
  for (const auto& row : split(text, ';')) rows.push_back(parse_double_list(row));
  if (rows.size() != dim) throw ConfigError(what + ": expected " + std::to_string(dim) + " rows");
  for (const auto& r : rows) {
    if (r.size() != dim) throw ConfigError(what + ": expected " + std::to_string(dim) + " columns per row");
  }
  return rows;
}

struct Affine {
  std::vector<Vec> a;
  Vec c;

  Vec apply(std::span<const double> v) const {
    Vec out(c);
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t j = 0; j < v.size(); ++j) out[i] += a[i][j] * v[j];
    }
    return out;
  }
};

Affine read_affine(const KvConfig::Section& s, const std::string& a_key, const std::string& c_key,
                   std::size_t dim) {
  Affine f;
  if (s.has(a_key)) {
    try {
      f.a = parse_matrix(s.get(a_key), dim, "[" + s.name + "] " + a_key);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("[" + s.name + "] " + a_key + ": " + e.what());
    }
  } else {
    f.a.assign(dim, Vec(dim, 0.0));
    for (std::size_t i = 0; i < dim; ++i) f.a[i][i] = 1.0;
  }
  f.c = s.has(c_key) ? s.get_doubles(c_key) : Vec(dim, 0.0);
  if (f.c.size() != dim) throw ConfigError("[" + s.name + "] " + c_key + ": expected " + std::to_string(dim) + " values");
  return f;
}

ModeId mode_index(const std::vector<std::string>& names, const std::string& name, const std::string& ctx) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError(ctx + ": unknown mode '" + name + "'");
  return static_cast<ModeId>(it - names.begin());
}

}  // namespace

HybridSystem parse_system(const std::string& text, const std::string& origin) {
  KvConfig cfg = KvConfig::parse(text, origin);
  const auto& head = cfg.require("system");

  HybridSystem sys;
  sys.name = head.get_or("name", "system");
  const long long dim = head.get_int("dim");
  if (dim <= 0) throw ConfigError("[system] dim must be positive");
  sys.dim = static_cast<std::size_t>(dim);
  sys.dt = head.get_double("dt");
  if (!(sys.dt > 0.0)) throw ConfigError("[system] dt must be positive");
  const std::string stochastic = head.get_or("stochastic_transitions", "false");
  if (stochastic != "true" && stochastic != "false") throw ConfigError("[system] stochastic_transitions must be true|false");
  sys.stochastic_transitions = stochastic == "true";
  if (head.has("noise_std")) {
    sys.process_noise_std = head.get_doubles("noise_std");
    if (sys.process_noise_std.size() != sys.dim) throw ConfigError("[system] noise_std needs dim values");
    if (std::all_of(sys.process_noise_std.begin(), sys.process_noise_std.end(), [](double s) { return s == 0.0; })) {
      sys.process_noise_std.clear();
    }
  }

  std::vector<std::string> names;
  for (const auto* m : cfg.all("mode")) {
    std::string name = m->get("name");
    if (std::find(names.begin(), names.end(), name) != names.end()) throw ConfigError("duplicate mode '" + name + "'");
    names.push_back(name);
    Affine f = read_affine(*m, "A", "c", sys.dim);
    // v' = A v + c + w
    Mode mode{name, [f](std::span<const double> v, std::span<const double> noise) {
                Vec out = f.apply(v);
                for (std::size_t k = 0; k < noise.size(); ++k) out[k] += noise[k];
                return out;
              }};
    mode.stay_weight = m->get_double_or("stay_weight", 0.0);
    sys.modes.push_back(std::move(mode));
  }
  if (names.empty()) throw ConfigError(origin + ": at least one [mode] section required");

  for (const auto* t : cfg.all("transition")) {
    Transition tr;
    tr.source = mode_index(names, t->get("source"), "[transition]");
    tr.target = mode_index(names, t->get("target"), "[transition]");
    tr.guard_text = t->get("guard");
    stl::Formula g;
    try {
      g = stl::parse_formula(tr.guard_text, names);
    } catch (const stl::ParseError& e) {
      throw ConfigError("[transition] guard: " + std::string(e.what()));
    }
    if (!stl::is_state_predicate(g)) throw ConfigError("[transition] guard must not use temporal operators");
    if (stl::max_var_index(g) >= static_cast<int>(sys.dim)) throw ConfigError("[transition] guard references x beyond dim");
    const ModeId src = tr.source;
    tr.guard = [g, src](std::span<const double> v) { return stl::holds_at(g, src, v); };
    if (t->has("reset_A") || t->has("reset_c")) {
      Affine r = read_affine(*t, "reset_A", "reset_c", sys.dim);
      tr.reset = [r](std::span<const double> v) { return r.apply(v); };
    }
    tr.weight = t->get_double_or("weight", 1.0);
    if (!(tr.weight >= 0.0)) throw ConfigError("[transition] weight must be non-negative");
    sys.transitions.push_back(std::move(tr));
  }

  std::vector<Box> boxes;
  std::vector<double> weights;
  for (const auto* b : cfg.all("init")) {
    Box box{b->get_doubles("lo"), b->get_doubles("hi"), mode_index(names, b->get_or("mode", names.front()), "[init]")};
    if (box.lo.size() != sys.dim || box.hi.size() != sys.dim) throw ConfigError("[init] lo/hi need dim values");
    boxes.push_back(std::move(box));
    weights.push_back(b->get_double_or("weight", 1.0));
  }
  if (boxes.empty()) throw ConfigError(origin + ": at least one [init] section required");
  if (boxes.size() == 1) weights = {1.0};
  try {
    sys.init = InitialDistribution::mixture(std::move(boxes), std::move(weights));
    sys.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  sys.fingerprint = "config:" + std::to_string(fnv1a64(text));
  return sys;
}

HybridSystem load_system(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_system(text, path.string());
}

}  // namespace pmon::hybrid
