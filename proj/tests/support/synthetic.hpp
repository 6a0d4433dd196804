#pragma once

// Synthetic data with known structure for the conformal tests.

#include <cmath>
#include <vector>

#include "pmon/rng.hpp"

namespace synth {

struct Point {
  double x0, x1;
  std::size_t label;
};

// Two unit-variance Gaussian classes centred at (-1,-1) and (1,1).
inline std::vector<Point> gaussian_classes(std::size_t n, double prior1, pmon::Rng& rng) {
  std::vector<Point> out(n);
  for (auto& p : out) {
    p.label = rng.uniform() < prior1 ? 1 : 0;
    const double mu = p.label == 1 ? 1.0 : -1.0;
    p.x0 = rng.normal(mu, 1.0);
    p.x1 = rng.normal(mu, 1.0);
  }
  return out;
}

// Exact posterior under equal priors: log-odds are 2 (x0 + x1).
inline std::vector<double> bayes_likelihoods(const Point& p) {
  const double p1 = 1.0 / (1.0 + std::exp(-2.0 * (p.x0 + p.x1)));
  return {1.0 - p1, p1};
}

// t = x + (0.05 + 0.2 x) z with x ~ U[0,1], z ~ N(0,1).
struct Regression {
  std::vector<std::vector<double>> x;
  std::vector<double> t;
};

inline Regression heteroscedastic(std::size_t n, pmon::Rng& rng) {
  Regression r;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform();
    r.x.push_back({x});
    r.t.push_back(x + (0.05 + 0.2 * x) * rng.normal());
  }
  return r;
}

}  // namespace synth
