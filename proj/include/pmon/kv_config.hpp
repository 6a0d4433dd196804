#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmon {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat `key = value` text grouped under `[section]` headers. Sections may
// repeat (one `[transition]` block per transition); `#` starts a comment.
// Keys before the first header land in the unnamed section "".
class KvConfig {
 public:
  struct Section {
    std::string name;
    int line = 0;
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
  };

  static KvConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KvConfig load(const std::filesystem::path& path);

  const std::vector<Section>& sections() const { return sections_; }
  std::vector<const Section*> all(const std::string& name) const;
  // Single section by name; empty if absent, ConfigError if repeated.
  const Section* find(const std::string& name) const;
  const Section& require(const std::string& name) const;
  const std::string& origin() const { return origin_; }

 private:
  std::vector<Section> sections_;
  std::string origin_;
};

}  // namespace pmon
