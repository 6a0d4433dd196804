#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pmon/learn.hpp"

namespace pmon::learn {

double pinball_loss(double t, double q_hat, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("pinball level must lie in (0,1)");
  const double r = t - q_hat;
  return r > 0.0 ? alpha * r : (1.0 - alpha) * -r;
}

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double Loss::eval(std::span<const double> out, std::span<const double> target, std::span<double> dout) const {
  const bool want = !dout.empty();
  switch (kind) {
    case Kind::CrossEntropy: {
      // -[t log s(z) + (1-t) log(1-s(z))] = softplus(z) - t z
      const double z = out[0], t = target[0];
      if (want) dout[0] = sigmoid(z) - t;
      return softplus(z) - t * z;
    }
    case Kind::Squared: {
      if (out.size() != target.size()) throw std::invalid_argument("squared loss: target size mismatch");
      const double inv = 1.0 / static_cast<double>(out.size());
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double r = out[i] - target[i];
        s += r * r;
        if (want) dout[i] = 2.0 * r * inv;
      }
      return s * inv;
    }
    case Kind::Pinball: {
      if (levels.size() != out.size()) throw std::invalid_argument("pinball loss: one level per output");
      double s = 0.0;
      for (std::size_t j = 0; j < out.size(); ++j) {
        const double a = levels[j];
        std::span<const double> ts = collapsed ? target.subspan(j, 1) : target;
        const double inv = 1.0 / static_cast<double>(ts.size());
        double g = 0.0;
        for (double t : ts) {
          s += pinball_loss(t, out[j], a) * inv;
          if (t > out[j]) g -= a;
          else if (t < out[j]) g += 1.0 - a;
        }
        if (want) dout[j] = g * inv;
      }
      return s;
    }
  }
  return 0.0;
}

double batch_loss(const MLP& net, const Loss& loss, const Matrix& x, const Matrix& t,
                  std::span<const std::size_t> rows, std::span<double> grad) {
  if (rows.empty()) return 0.0;
  const bool want = !grad.empty();
  std::fill(grad.begin(), grad.end(), 0.0);
  MLP::Cache cache;
  std::vector<double> dout(net.output_dim());
  double total = 0.0;
  for (std::size_t r : rows) {
    net.forward(x[r], cache);
    total += loss.eval(cache.acts.back(), t[r], want ? std::span<double>(dout) : std::span<double>());
    if (want) net.backward(cache, dout, grad);
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  if (want) {
    for (double& g : grad) g *= inv;
  }
  return total * inv;
}

}  // namespace pmon::learn
