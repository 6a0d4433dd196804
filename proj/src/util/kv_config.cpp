#include "pmon/kv_config.hpp"

#include "pmon/text.hpp"

namespace pmon {

const std::string& KvConfig::Section::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) {
    throw ConfigError("missing key '" + key + "' in section [" + name + "] (line " +
                      std::to_string(line) + ")");
  }
  return it->second;
}

std::string KvConfig::Section::get_or(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double KvConfig::Section::get_double(const std::string& key) const {
  try {
    return parse_double(get(key));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + name + "] " + key + ": " + e.what());
  }
}

double KvConfig::Section::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KvConfig::Section::get_int(const std::string& key) const {
  try {
    return parse_int(get(key));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + name + "] " + key + ": " + e.what());
  }
}

long long KvConfig::Section::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> KvConfig::Section::get_doubles(const std::string& key) const {
  try {
    return parse_double_list(get(key));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + name + "] " + key + ": " + e.what());
  }
}

KvConfig KvConfig::parse(const std::string& text, const std::string& origin) {
  KvConfig cfg;
  cfg.origin_ = origin;
  cfg.sections_.push_back(Section{"", 0, {}});
  int lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      }
      cfg.sections_.push_back(Section{std::string(trim(line.substr(1, line.size() - 2))), lineno, {}});
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    auto& sec = cfg.sections_.back();
    if (!sec.values.emplace(key, value).second) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse(text, path.string());
}

std::vector<const KvConfig::Section*> KvConfig::all(const std::string& name) const {
  std::vector<const Section*> out;
  for (const auto& s : sections_) {
    if (s.name == name) out.push_back(&s);
  }
  return out;
}

const KvConfig::Section* KvConfig::find(const std::string& name) const {
  auto found = all(name);
  if (found.size() > 1) throw ConfigError("section [" + name + "] given more than once");
  return found.empty() ? nullptr : found.front();
}

const KvConfig::Section& KvConfig::require(const std::string& name) const {
  if (auto* s = find(name)) return *s;
  throw ConfigError(origin_ + ": missing section [" + name + "]");
}

}  // namespace pmon
