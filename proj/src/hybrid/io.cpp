#include <ostream>

#include "pmon/hybrid.hpp"
#include "pmon/text.hpp"

namespace pmon::hybrid {

void write_trajectory_csv(std::ostream& out, const stl::Signal& traj) {
  out << "t,mode";
  for (std::size_t k = 0; k < traj.dim(); ++k) out << ",x" << k;
  out << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_double(static_cast<double>(i) * traj.dt()) << ',' << traj.mode(i);
    for (double v : traj.values(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace pmon::hybrid
