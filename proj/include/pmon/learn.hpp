#pragma once

// Small fully connected networks trained by mini-batch SGD with momentum:
// binary classifier (single sigmoid logit), scalar regressor, three-output
// quantile regressor and a vector regressor used as a state estimator.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pmon/rng.hpp"
#include "pmon/sat.hpp"

namespace pmon::learn {

using Matrix = std::vector<std::vector<double>>;

// ReLU hidden layers, linear output layer. Parameters live in one flat buffer:
// for each layer, W (out x in, row-major) followed by b.
class MLP {
 public:
  MLP() = default;
  MLP(std::vector<std::size_t> widths, std::uint64_t seed);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t output_dim() const { return widths_.back(); }
  std::size_t layers() const { return widths_.size() - 1; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::vector<double> forward(std::span<const double> x) const;

  struct Cache {
    std::vector<std::vector<double>> acts;  // acts[0] = input, acts.back() = raw output
  };
  void forward(std::span<const double> x, Cache& cache) const;
  // Accumulates d(loss)/d(params) into grad given d(loss)/d(output).
  void backward(const Cache& cache, std::span<const double> dout, std::span<double> grad) const;

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;  // start of W for each layer
  std::vector<double> params_;
};

double pinball_loss(double t, double q_hat, double alpha);

struct Loss {
  enum class Kind { CrossEntropy, Squared, Pinball };
  Kind kind = Kind::Squared;
  // Pinball: one level per output.
  std::vector<double> levels;
  // Pinball: target holds one pre-computed quantile per output instead of
  // the raw sample vector.
  bool collapsed = false;

  // Loss of a single example; writes d(loss)/d(out) when dout is non-empty.
  // CrossEntropy expects one logit and a {0,1} target. Squared averages over
  // outputs. Pinball sums the heads, each averaged over the target samples.
  double eval(std::span<const double> out, std::span<const double> target, std::span<double> dout) const;
};

// Mean loss over rows and, when grad is non-empty, the mean gradient.
double batch_loss(const MLP& net, const Loss& loss, const Matrix& x, const Matrix& t,
                  std::span<const std::size_t> rows, std::span<double> grad);

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  double momentum = 0.9;  // 0 gives plain SGD
  std::vector<std::size_t> hidden = {64, 64};
  double eps_lo = 0.05;
  double eps_hi = 0.95;
  bool collapsed_quantiles = false;

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct TrainLog {
  std::vector<double> epoch_loss;
};

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Matrix& rows);
  static Standardizer identity(std::size_t dim);
  std::vector<double> apply(std::span<const double> v) const;
  std::vector<double> invert(std::span<const double> v) const;
};

enum class Task { Classifier, Regressor, Quantile, StateEstimator };
std::string_view to_string(Task t);

struct Model {
  Task task = Task::Regressor;
  MLP net;
  Standardizer input;
  Standardizer target;  // identity for classifiers
  std::vector<double> levels;  // quantile heads

  // Classifier: probability of label 1 (satisfied).
  double predict_proba(std::span<const double> x) const;
  // Classifier likelihood vector (1 - p, p) indexed by label.
  std::array<double, 2> f_d(std::span<const double> x) const;
  int predict_label(std::span<const double> x) const;
  // Regressor point prediction.
  double predict(std::span<const double> x) const;
  // Quantile heads (lo, median, hi), sorted.
  std::array<double, 3> predict_quantiles(std::span<const double> x) const;
  std::vector<double> predict_vector(std::span<const double> x) const;
};

// SGD with momentum on already standardized data. Throws std::runtime_error
// if a parameter becomes non-finite.
TrainLog fit(MLP& net, const Loss& loss, const Matrix& x, const Matrix& t, const TrainConfig& cfg);

Model train_classifier(const Matrix& x, std::span<const double> labels, const TrainConfig& cfg,
                       TrainLog* log = nullptr);
Model train_regressor(const Matrix& x, std::span<const double> targets, const TrainConfig& cfg,
                      TrainLog* log = nullptr);
// samples[i] holds the M observed values for x[i].
Model train_quantile_regressor(const Matrix& x, const Matrix& samples, const TrainConfig& cfg,
                               TrainLog* log = nullptr);
Model train_state_estimator(const Matrix& x, const Matrix& targets, const TrainConfig& cfg,
                            TrainLog* log = nullptr);

Model train_classifier(const sat::Dataset& data, const TrainConfig& cfg, TrainLog* log = nullptr);
Model train_regressor(const sat::Dataset& data, const TrainConfig& cfg, TrainLog* log = nullptr);
Model train_quantile_regressor(const sat::Dataset& data, const TrainConfig& cfg, TrainLog* log = nullptr);
// Observation windows -> flattened true state windows.
Model train_state_estimator(const sat::Dataset& data, const TrainConfig& cfg, TrainLog* log = nullptr);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates where a ReLU changed state within +-h
};

// Central differences with h = 1e-5 * max(1, |param|). Pinball targets within
// 1e-3 of a prediction are pushed 2e-3 away first. coords = 0 checks all
// parameters, otherwise a random subset of that size.
GradCheckResult grad_check(const MLP& net, const Loss& loss, const Matrix& x, Matrix t, Rng& rng,
                           std::size_t coords = 0);

// Text checkpoint: magic line, version, task, shapes, then row-major weights.
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace pmon::learn
