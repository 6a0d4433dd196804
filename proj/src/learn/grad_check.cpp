#include <algorithm>
#include <cmath>
#include <numeric>

#include "pmon/learn.hpp"

namespace pmon::learn {

namespace {

// ReLU on/off pattern of every hidden unit over the whole batch.
std::vector<bool> activation_pattern(const MLP& net, const Matrix& x) {
  std::vector<bool> out;
  MLP::Cache c;
  for (const auto& row : x) {
    net.forward(row, c);
    for (std::size_t l = 1; l + 1 < c.acts.size(); ++l) {
      for (double a : c.acts[l]) out.push_back(a > 0.0);
    }
  }
  return out;
}

}  // namespace

GradCheckResult grad_check(const MLP& net, const Loss& loss, const Matrix& x, Matrix t, Rng& rng,
                           std::size_t coords) {
  std::vector<std::size_t> rows(x.size());
  std::iota(rows.begin(), rows.end(), 0);

  if (loss.kind == Loss::Kind::Pinball) {
    for (std::size_t r = 0; r < x.size(); ++r) {
      auto out = net.forward(x[r]);
      for (std::size_t k = 0; k < t[r].size(); ++k) {
        // raw sample vectors face every head; collapsed targets face one
        for (std::size_t j = 0; j < out.size(); ++j) {
          if (loss.collapsed && j != k) continue;
          if (std::abs(t[r][k] - out[j]) <= 1e-3) t[r][k] = out[j] + (t[r][k] >= out[j] ? 2e-3 : -2e-3);
        }
      }
    }
  }

  MLP probe = net;
  auto& p = probe.params();
  std::vector<double> analytic(p.size());
  batch_loss(net, loss, x, t, rows, analytic);

  std::vector<std::size_t> which(p.size());
  std::iota(which.begin(), which.end(), 0);
  if (coords != 0 && coords < which.size()) {
    std::shuffle(which.begin(), which.end(), rng.engine());
    which.resize(coords);
    std::sort(which.begin(), which.end());
  }

  const auto base_pattern = activation_pattern(net, x);
  GradCheckResult res;
  for (std::size_t k : which) {
    const double orig = p[k];
    const double h = 1e-5 * std::max(1.0, std::abs(orig));
    p[k] = orig + h;
    const bool same_up = activation_pattern(probe, x) == base_pattern;
    const double up = batch_loss(probe, loss, x, t, rows, {});
    p[k] = orig - h;
    const bool same_down = activation_pattern(probe, x) == base_pattern;
    const double down = batch_loss(probe, loss, x, t, rows, {});
    p[k] = orig;
    if (!same_up || !same_down) {
      ++res.skipped;
      continue;
    }
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic[k];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
    res.max_rel_error = std::max(res.max_rel_error, rel);
    ++res.checked;
  }
  return res;
}

}  // namespace pmon::learn
