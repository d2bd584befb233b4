#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qroute/rng.hpp"

namespace qroute {

// Dense row-major matrix of doubles. Kept deliberately plain: the value
// networks here are tiny and the gradient checks want transparent arithmetic.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

// Per-parameter buffers shaped like a network; used for gradients and for
// optimizer moments.
struct ParamSet {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  void set_zero();
  void scale(double factor);
};
using Gradients = ParamSet;

// Scratch activations reused across forward/backward calls in hot loops.
struct NetWorkspace {
  std::vector<std::vector<double>> activations;  // activations[0] = input
};

// State-value approximator: fully connected, rectified-linear hidden layers,
// identity scalar output. Double precision throughout.
class QNetwork {
 public:
  QNetwork() = default;
  // Zero-initialised parameters with the given layer sizes
  // (input, hidden..., 1).
  explicit QNetwork(std::vector<int> layer_dims);
  // Uniform fan-in/fan-out scaled weights (bound sqrt(6/(fan_in+fan_out))),
  // zero biases.
  static QNetwork initialize(std::vector<int> layer_dims, Rng& rng);

  double forward(std::span<const double> x) const;
  double forward(std::span<const double> x, NetWorkspace& ws) const;

  // Gradients of (forward(x) - target)^2 w.r.t. every parameter.
  Gradients backward(std::span<const double> x, double target) const;
  // Accumulates into `grad` (callers zero it per batch); returns the sample
  // loss.
  double backward_accumulate(std::span<const double> x, double target,
                             Gradients& grad, NetWorkspace& ws) const;

  Gradients zero_gradients() const;
  NetWorkspace make_workspace() const;

  const std::vector<int>& layer_dims() const { return layer_dims_; }
  int input_dim() const { return layer_dims_.front(); }
  int layer_count() const { return static_cast<int>(weights_.size()); }
  std::vector<Matrix>& weights() { return weights_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  std::vector<std::vector<double>>& biases() { return biases_; }
  const std::vector<std::vector<double>>& biases() const { return biases_; }

  bool same_architecture(const QNetwork& other) const {
    return layer_dims_ == other.layer_dims_;
  }
  // FNV-1a over the parameter bit patterns; detects any mutation.
  uint64_t parameter_checksum() const;

 private:
  std::vector<int> layer_dims_;
  std::vector<Matrix> weights_;
  std::vector<std::vector<double>> biases_;
};

enum class OptimizerKind { kAdam, kMomentum };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;    // adam first-moment decay
  double beta2 = 0.999;  // adam second-moment decay
  double epsilon = 1e-8;
  double momentum = 0.9;  // momentum variant only
};

// Owns moment buffers matching one network's shape. apply() rejects
// non-finite gradients, naming the offending layer.
class Optimizer {
 public:
  Optimizer(const QNetwork& net, OptimizerConfig config);
  void apply(QNetwork& net, const Gradients& grad);
  const OptimizerConfig& config() const { return config_; }
  long step_count() const { return step_; }

 private:
  OptimizerConfig config_;
  ParamSet first_moment_;
  ParamSet second_moment_;
  long step_ = 0;
};

// Frozen copy of the online network used for double-Q value targets.
struct TargetNetwork {
  QNetwork net;
  long updates_since_sync = 0;
  long sync_count = 0;
};

// target := online; resets the staleness counter.
void sync_target(const QNetwork& online, TargetNetwork& target);

// Model file: JSON with layer dims, parameters, the state-normalization
// choice and the training-config hash. Round-trips doubles exactly.
struct ModelFile {
  QNetwork net;
  std::string normalization = "shift_scale";
  std::string config_hash;
  std::string config_json;  // resolved training config, for provenance
};

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace qroute
