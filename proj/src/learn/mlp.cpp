#include <cmath>
#include <stdexcept>

#include "pmon/learn.hpp"
#include "pmon/simd.hpp"

namespace pmon::learn {

MLP::MLP(std::vector<std::size_t> widths, std::uint64_t seed) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw std::invalid_argument("MLP needs at least input and output widths");
  for (std::size_t w : widths_) {
    if (w == 0) throw std::invalid_argument("MLP layer widths must be positive");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(total);
    total += widths_[l + 1] * widths_[l] + widths_[l + 1];
  }
  params_.assign(total, 0.0);
  // He initialisation, zero biases
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const double sd = std::sqrt(2.0 / static_cast<double>(widths_[l]));
    const std::size_t nw = widths_[l + 1] * widths_[l];
    for (std::size_t k = 0; k < nw; ++k) params_[offsets_[l] + k] = rng.normal(0.0, sd);
  }
}

void MLP::forward(std::span<const double> x, Cache& cache) const {
  if (x.size() != input_dim()) throw std::invalid_argument("MLP input has wrong dimension");
  const std::size_t nl = layers();
  cache.acts.resize(nl + 1);
  cache.acts[0].assign(x.begin(), x.end());
  const auto& k = simd::active();
  for (std::size_t l = 0; l < nl; ++l) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + in * out;
    const auto& a = cache.acts[l];
    auto& z = cache.acts[l + 1];
    z.resize(out);
    for (std::size_t i = 0; i < out; ++i) z[i] = k.dot(w + i * in, a.data(), in) + b[i];
    if (l + 1 < nl) k.relu(z.data(), out);
  }
}

std::vector<double> MLP::forward(std::span<const double> x) const {
  Cache c;
  forward(x, c);
  return std::move(c.acts.back());
}

void MLP::backward(const Cache& cache, std::span<const double> dout, std::span<double> grad) const {
  const auto& k = simd::active();
  std::vector<double> delta(dout.begin(), dout.end()), prev;
  for (std::size_t l = layers(); l-- > 0;) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    const double* w = params_.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + in * out;
    const auto& a = cache.acts[l];
    for (std::size_t i = 0; i < out; ++i) {
      if (delta[i] == 0.0) continue;
      k.axpy(delta[i], a.data(), gw + i * in, in);
      gb[i] += delta[i];
    }
    if (l == 0) break;
    prev.assign(in, 0.0);
    for (std::size_t i = 0; i < out; ++i) {
      if (delta[i] != 0.0) k.axpy(delta[i], w + i * in, prev.data(), in);
    }
    // a is the post-ReLU activation; a > 0 iff the unit was active
    for (std::size_t j = 0; j < in; ++j) {
      if (!(a[j] > 0.0)) prev[j] = 0.0;
    }
    delta.swap(prev);
  }
}

}  // namespace pmon::learn
