#include <fstream>
#include <sstream>

#include "pmon/kv_config.hpp"
#include "pmon/sat.hpp"
#include "pmon/text.hpp"

namespace pmon::sat {

namespace {

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  return std::filesystem::path(stem.string() + ext);
}

std::string_view label_kind_name(SatLabel::Kind k) {
  switch (k) {
    case SatLabel::Kind::Boolean: return "boolean";
    case SatLabel::Kind::Real: return "real";
    case SatLabel::Kind::Samples: return "samples";
  }
  return "?";
}

DatasetKind parse_kind(const std::string& s) {
  if (s == "FO") return DatasetKind::FullObs;
  if (s == "PO") return DatasetKind::PartialObs;
  if (s == "stochastic") return DatasetKind::Stochastic;
  throw ConfigError("dataset meta: unknown kind '" + s + "'");
}

void header_run(std::ostream& out, const char* prefix, std::size_t n, bool& first) {
  for (std::size_t k = 0; k < n; ++k) {
    out << (first ? "" : ",") << prefix << k;
    first = false;
  }
}

}  // namespace

// Columns: in0..in{d-1}, [st0..st{m-1}], mode, o0..o{n-1}, label | s0..s{M-1}
void write_dataset(const std::filesystem::path& stem, const Dataset& data) {
  data.validate();
  const std::size_t d = data.input_dim();
  const std::size_t sd = data.states.empty() ? 0 : data.states.front().size();
  const std::size_t od = data.origins.empty() ? 0 : data.origins.front().values.size();
  const bool samples = !data.labels.empty() && data.labels.front().kind == SatLabel::Kind::Samples;
  const std::size_t lw = samples ? data.meta.m : 1;

  write_file_atomic(with_ext(stem, ".meta"), [&](std::ostream& out) {
    const auto& m = data.meta;
    out << "kind = " << to_string(m.kind) << "\n"
        << "semantics = " << stl::to_string(m.semantics) << "\n"
        << "label_kind = " << (data.labels.empty() ? "real" : label_kind_name(data.labels.front().kind)) << "\n"
        << "N = " << data.size() << "\n"
        << "M = " << m.m << "\n"
        << "H_p = " << m.past_horizon << "\n"
        << "H_f = " << m.future_horizon << "\n"
        << "sampling = " << to_string(m.sampling) << "\n"
        << "seed = " << m.seed << "\n"
        << "formula = " << m.formula << "\n"
        << "system = " << m.system << "\n"
        << "input_dim = " << d << "\n"
        << "state_dim = " << sd << "\n"
        << "origin_dim = " << od << "\n";
  });

  write_file_atomic(with_ext(stem, ".csv"), [&](std::ostream& out) {
    bool first = true;
    header_run(out, "in", d, first);
    header_run(out, "st", sd, first);
    out << (first ? "" : ",") << "mode";
    first = false;
    header_run(out, "o", od, first);
    if (samples) {
      header_run(out, "s", lw, first);
    } else {
      out << ",label";
    }
    out << "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::string row;
      auto put = [&](std::span<const double> v) {
        for (double x : v) {
          if (!row.empty()) row += ',';
          row += format_double(x);
        }
      };
      put(data.inputs[i]);
      if (sd) put(data.states[i]);
      row += (row.empty() ? "" : ",") + std::to_string(data.origins[i].mode);
      put(data.origins[i].values);
      put(data.labels[i].values);
      out << row << "\n";
    }
  });
}

Dataset read_dataset(const std::filesystem::path& stem) {
  // The meta file uses the same key = value syntax as configs, without sections.
  KvConfig meta = KvConfig::parse(read_file(with_ext(stem, ".meta")), with_ext(stem, ".meta").string());
  const auto& s = meta.require("");
  Dataset data;
  auto& m = data.meta;
  m.kind = parse_kind(s.get("kind"));
  m.semantics = stl::parse_robustness_kind(s.get("semantics"));
  m.m = static_cast<std::size_t>(s.get_int("M"));
  m.past_horizon = static_cast<std::size_t>(s.get_int("H_p"));
  m.future_horizon = static_cast<std::size_t>(s.get_int("H_f"));
  m.sampling = parse_sampling(s.get("sampling"));
  m.seed = std::stoull(s.get("seed"));
  m.formula = s.get_or("formula", "");
  m.system = s.get_or("system", "");
  const std::string label_kind = s.get("label_kind");
  const auto d = static_cast<std::size_t>(s.get_int("input_dim"));
  const auto sd = static_cast<std::size_t>(s.get_int("state_dim"));
  const auto od = static_cast<std::size_t>(s.get_int("origin_dim"));
  const auto n = static_cast<std::size_t>(s.get_int("N"));
  const std::size_t lw = label_kind == "samples" ? m.m : 1;
  const std::size_t width = d + sd + 1 + od + lw;

  std::istringstream in(read_file(with_ext(stem, ".csv")));
  std::string line;
  std::getline(in, line);  // header
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> v;
    try {
      v = parse_double_list(line);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(stem.string() + ".csv:" + std::to_string(lineno) + ": " + e.what());
    }
    if (v.size() != width) {
      throw ConfigError(stem.string() + ".csv:" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                        " columns");
    }
    auto it = v.begin();
    data.inputs.emplace_back(it, it + d);
    it += d;
    if (sd) data.states.emplace_back(it, it + sd);
    it += sd;
    State st;
    st.mode = static_cast<stl::ModeId>(*it++);
    st.values.assign(it, it + od);
    it += od;
    data.origins.push_back(std::move(st));
    std::vector<double> lab(it, it + lw);
    if (label_kind == "samples") {
      data.labels.push_back(SatLabel::samples(std::move(lab)));
    } else if (label_kind == "boolean") {
      data.labels.push_back(SatLabel::boolean(lab[0] > 0.5));
    } else {
      data.labels.push_back(SatLabel::real(lab[0]));
    }
  }
  if (data.size() != n) throw ConfigError(stem.string() + ": meta says N = " + std::to_string(n));
  m.n = n;
  data.validate();
  return data;
}

}  // namespace pmon::sat
