#include <sstream>
#include <stdexcept>

#include "pmon/conformal.hpp"
#include "pmon/text.hpp"

namespace pmon::conformal {

void write_scores_csv(const std::filesystem::path& path, const CalibrationScores& cal) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "# n=" << cal.size() << " delta=" << cal.description() << "\nscore\n";
    for (double s : cal.descending()) out << format_double(s) << "\n";
  });
}

CalibrationScores read_scores_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line, description;
  std::size_t declared = 0;
  bool have_n = false, have_header = false;
  std::vector<double> scores;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      auto n_pos = t.find("n=");
      auto d_pos = t.find(" delta=");
      if (n_pos != std::string_view::npos) {
        auto end = d_pos == std::string_view::npos ? t.size() : d_pos;
        declared = static_cast<std::size_t>(parse_int(t.substr(n_pos + 2, end - n_pos - 2)));
        have_n = true;
      }
      if (d_pos != std::string_view::npos) description = std::string(t.substr(d_pos + 7));
      continue;
    }
    if (!have_header) {
      if (t != "score") throw std::runtime_error(path.string() + ": expected 'score' header");
      have_header = true;
      continue;
    }
    scores.push_back(parse_double(t));
  }
  if (have_n && declared != scores.size()) {
    throw std::runtime_error(path.string() + ": header declares n=" + std::to_string(declared) + " but file has " +
                             std::to_string(scores.size()) + " scores");
  }
  return CalibrationScores(std::move(scores), description);
}

}  // namespace pmon::conformal
