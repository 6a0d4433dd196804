#include <sstream>
#include <stdexcept>

#include "pmon/learn.hpp"
#include "pmon/text.hpp"

namespace pmon::learn {

namespace {

constexpr const char* kMagic = "PMON-MLP";
constexpr int kVersion = 1;

Task parse_task(const std::string& s) {
  for (Task t : {Task::Classifier, Task::Regressor, Task::Quantile, Task::StateEstimator}) {
    if (to_string(t) == s) return t;
  }
  throw std::runtime_error("checkpoint: unknown task '" + s + "'");
}

void write_row(std::ostream& out, const char* key, std::span<const double> v) {
  out << key << " " << v.size();
  for (double x : v) out << " " << format_double(x);
  out << "\n";
}

std::vector<double> read_row(std::istream& in, const char* key) {
  std::string k;
  std::size_t n = 0;
  if (!(in >> k >> n) || k != key) throw std::runtime_error(std::string("checkpoint: expected '") + key + "'");
  std::vector<double> v(n);
  for (auto& x : v) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error(std::string("checkpoint: truncated '") + key + "'");
    x = parse_double(tok);
  }
  return v;
}

}  // namespace

// PMON-MLP
// version 1
// task <name>
// widths <k> w0 .. w{k-1}
// levels / in_mean / in_scale / out_mean / out_scale <n> values..
// params <n>, then one value per line in buffer order
void save_model(const std::filesystem::path& path, const Model& m) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << kMagic << "\nversion " << kVersion << "\ntask " << to_string(m.task) << "\nwidths "
        << m.net.widths().size();
    for (std::size_t w : m.net.widths()) out << " " << w;
    out << "\n";
    write_row(out, "levels", m.levels);
    write_row(out, "in_mean", m.input.mean);
    write_row(out, "in_scale", m.input.scale);
    write_row(out, "out_mean", m.target.mean);
    write_row(out, "out_scale", m.target.scale);
    out << "params " << m.net.params().size() << "\n";
    for (double p : m.net.params()) out << format_double(p) << "\n";
  });
}

Model load_model(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string magic, key, task;
  int version = 0;
  if (!(in >> magic) || magic != kMagic) throw std::runtime_error(path.string() + ": not a model checkpoint");
  if (!(in >> key >> version) || key != "version") throw std::runtime_error("checkpoint: missing version");
  if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  if (!(in >> key >> task) || key != "task") throw std::runtime_error("checkpoint: missing task");
  Model m;
  m.task = parse_task(task);
  std::size_t nw = 0;
  if (!(in >> key >> nw) || key != "widths") throw std::runtime_error("checkpoint: missing widths");
  std::vector<std::size_t> widths(nw);
  for (auto& w : widths) {
    if (!(in >> w)) throw std::runtime_error("checkpoint: truncated widths");
  }
  m.levels = read_row(in, "levels");
  m.input.mean = read_row(in, "in_mean");
  m.input.scale = read_row(in, "in_scale");
  m.target.mean = read_row(in, "out_mean");
  m.target.scale = read_row(in, "out_scale");
  m.net = MLP(widths, 0);
  std::vector<double> params = read_row(in, "params");
  if (params.size() != m.net.params().size()) throw std::runtime_error("checkpoint: parameter count mismatch");
  m.net.params() = std::move(params);
  return m;
}

}  // namespace pmon::learn
