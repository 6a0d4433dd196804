#include <sstream>
#include <stdexcept>

#include "pmon/monitor.hpp"
#include "pmon/text.hpp"

namespace pmon::monitor {

void Manifest::set(const std::string& key, const std::string& value) {
  if (value.find('\n') != std::string::npos) throw std::invalid_argument("manifest values must be single-line");
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) { set(key, format_double(value)); }

void Manifest::set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }

const std::string* Manifest::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

void Manifest::write(std::ostream& out) const {
  out << kManifestHeader << "\n";
  for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

Manifest Manifest::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kManifestHeader) {
    throw std::runtime_error("not a manifest (expected '" + std::string(kManifestHeader) + "')");
  }
  Manifest m;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto eq = line.find(" = ");
    if (eq == std::string::npos) throw std::runtime_error("manifest: malformed line '" + line + "'");
    m.entries.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  return m;
}

}  // namespace pmon::monitor
