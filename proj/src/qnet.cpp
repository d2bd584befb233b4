#include "qroute/qnet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace qroute {

void ParamSet::set_zero() {
  for (auto& w : weights) std::fill(w.a.begin(), w.a.end(), 0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void ParamSet::scale(double factor) {
  for (auto& w : weights)
    for (double& v : w.a) v *= factor;
  for (auto& b : biases)
    for (double& v : b) v *= factor;
}

namespace {

ParamSet make_param_set(const std::vector<int>& dims) {
  ParamSet p;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    p.weights.emplace_back(dims[l + 1], dims[l]);
    p.biases.emplace_back(static_cast<size_t>(dims[l + 1]), 0.0);
  }
  return p;
}

void check_dims(const std::vector<int>& dims) {
  if (dims.size() < 2)
    throw std::invalid_argument("network needs at least input and output layers");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("network layer size must be positive");
  if (dims.back() != 1)
    throw std::invalid_argument("value network output layer must have size 1");
}

}  // namespace

QNetwork::QNetwork(std::vector<int> layer_dims) : layer_dims_(std::move(layer_dims)) {
  check_dims(layer_dims_);
  ParamSet p = make_param_set(layer_dims_);
  weights_ = std::move(p.weights);
  biases_ = std::move(p.biases);
}

QNetwork QNetwork::initialize(std::vector<int> layer_dims, Rng& rng) {
  QNetwork net(std::move(layer_dims));
  for (auto& w : net.weights_) {
    const double bound = std::sqrt(6.0 / (w.cols + w.rows));
    for (double& v : w.a) v = (2.0 * rng.uniform01() - 1.0) * bound;
  }
  return net;  // biases stay zero
}

double QNetwork::forward(std::span<const double> x) const {
  NetWorkspace ws = make_workspace();
  return forward(x, ws);
}

double QNetwork::forward(std::span<const double> x, NetWorkspace& ws) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw std::invalid_argument("network input has wrong dimension");
  if (ws.activations.size() != layer_dims_.size()) ws = make_workspace();
  std::copy(x.begin(), x.end(), ws.activations[0].begin());
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    const Matrix& w = weights_[l];
    const std::vector<double>& in = ws.activations[l];
    std::vector<double>& out = ws.activations[l + 1];
    for (int r = 0; r < w.rows; ++r) {
      const double* row = &w.a[static_cast<size_t>(r) * w.cols];
      double z = biases_[l][r];
      for (int c = 0; c < w.cols; ++c) z += row[c] * in[c];
      out[r] = (l + 1 < layers && z < 0.0) ? 0.0 : z;  // relu on hidden layers
    }
  }
  return ws.activations.back()[0];
}

Gradients QNetwork::backward(std::span<const double> x, double target) const {
  Gradients grad = zero_gradients();
  NetWorkspace ws = make_workspace();
  backward_accumulate(x, target, grad, ws);
  return grad;
}

double QNetwork::backward_accumulate(std::span<const double> x, double target,
                                     Gradients& grad, NetWorkspace& ws) const {
  const double y = forward(x, ws);
  const double err = y - target;
  const int layers = layer_count();
  // delta holds dLoss/dz for the layer being processed, walking backwards.
  std::vector<double> delta{2.0 * err};
  std::vector<double> prev;
  for (int l = layers - 1; l >= 0; --l) {
    const Matrix& w = weights_[l];
    const std::vector<double>& in = ws.activations[l];
    Matrix& gw = grad.weights[l];
    std::vector<double>& gb = grad.biases[l];
    for (int r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      gb[r] += d;
      double* grow = &gw.a[static_cast<size_t>(r) * w.cols];
      for (int c = 0; c < w.cols; ++c) grow[c] += d * in[c];
    }
    if (l == 0) break;
    prev.assign(in.size(), 0.0);
    for (int r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      const double* row = &w.a[static_cast<size_t>(r) * w.cols];
      for (int c = 0; c < w.cols; ++c) prev[c] += d * row[c];
    }
    // Rectifier gate: units that output zero pass no gradient.
    for (size_t c = 0; c < prev.size(); ++c)
      if (in[c] <= 0.0) prev[c] = 0.0;
    delta.swap(prev);
  }
  return err * err;
}

Gradients QNetwork::zero_gradients() const { return make_param_set(layer_dims_); }

NetWorkspace QNetwork::make_workspace() const {
  NetWorkspace ws;
  ws.activations.reserve(layer_dims_.size());
  for (int d : layer_dims_) ws.activations.emplace_back(static_cast<size_t>(d), 0.0);
  return ws;
}

uint64_t QNetwork::parameter_checksum() const {
  uint64_t h = 1469598103934665603ull;  // fnv-1a
  auto mix = [&h](double v) {
    uint64_t bits = std::bit_cast<uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto& w : weights_)
    for (double v : w.a) mix(v);
  for (const auto& b : biases_)
    for (double v : b) mix(v);
  return h;
}

Optimizer::Optimizer(const QNetwork& net, OptimizerConfig config)
    : config_(config),
      first_moment_(make_param_set(net.layer_dims())),
      second_moment_(make_param_set(net.layer_dims())) {}

void Optimizer::apply(QNetwork& net, const Gradients& grad) {
  if (grad.weights.size() != net.weights().size())
    throw std::invalid_argument("gradient shape does not match network");
  for (size_t l = 0; l < grad.weights.size(); ++l)
    if (grad.weights[l].a.size() != net.weights()[l].a.size() ||
        grad.biases[l].size() != net.biases()[l].size())
      throw std::invalid_argument("gradient shape does not match network");
  ++step_;
  for (size_t l = 0; l < grad.weights.size(); ++l) {
    for (double g : grad.weights[l].a)
      if (!std::isfinite(g))
        throw std::runtime_error("non-finite weight gradient in layer " +
                                 std::to_string(l));
    for (double g : grad.biases[l])
      if (!std::isfinite(g))
        throw std::runtime_error("non-finite bias gradient in layer " +
                                 std::to_string(l));
  }
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kAdam) {
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    auto update = [&](double& p, double& m, double& v, double g) {
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g * g;
      p -= lr * (m / c1) / (std::sqrt(v / c2) + config_.epsilon);
    };
    for (size_t l = 0; l < grad.weights.size(); ++l) {
      auto& w = net.weights()[l].a;
      const auto& g = grad.weights[l].a;
      auto& m = first_moment_.weights[l].a;
      auto& v = second_moment_.weights[l].a;
      for (size_t i = 0; i < w.size(); ++i) update(w[i], m[i], v[i], g[i]);
      auto& b = net.biases()[l];
      const auto& gb = grad.biases[l];
      auto& mb = first_moment_.biases[l];
      auto& vb = second_moment_.biases[l];
      for (size_t i = 0; i < b.size(); ++i) update(b[i], mb[i], vb[i], gb[i]);
    }
  } else {
    // Classical momentum: velocity decays, parameters follow the velocity.
    const double mu = config_.momentum;
    auto update = [&](double& p, double& vel, double g) {
      vel = mu * vel - lr * g;
      p += vel;
    };
    for (size_t l = 0; l < grad.weights.size(); ++l) {
      auto& w = net.weights()[l].a;
      const auto& g = grad.weights[l].a;
      auto& vel = first_moment_.weights[l].a;
      for (size_t i = 0; i < w.size(); ++i) update(w[i], vel[i], g[i]);
      auto& b = net.biases()[l];
      const auto& gb = grad.biases[l];
      auto& velb = first_moment_.biases[l];
      for (size_t i = 0; i < b.size(); ++i) update(b[i], velb[i], gb[i]);
    }
  }
}

void sync_target(const QNetwork& online, TargetNetwork& target) {
  target.net = online;
  target.updates_since_sync = 0;
  ++target.sync_count;
}

void save_model(const ModelFile& model, const std::string& path) {
  nlohmann::json j;
  j["layer_dims"] = model.net.layer_dims();
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : model.net.weights()) weights.push_back(w.a);
  j["weights"] = std::move(weights);
  j["biases"] = model.net.biases();
  j["normalization"] = model.normalization;
  j["config_hash"] = model.config_hash;
  if (model.config_json.empty())
    j["config"] = nullptr;
  else
    j["config"] = nlohmann::json::parse(model.config_json);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid model file " + path + ": " + e.what());
  }
  ModelFile model;
  try {
    std::vector<int> dims = j.at("layer_dims").get<std::vector<int>>();
    model.net = QNetwork(dims);
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != model.net.weights().size() ||
        biases.size() != model.net.biases().size())
      throw std::runtime_error("layer count mismatch");
    for (size_t l = 0; l < weights.size(); ++l) {
      auto wv = weights[l].get<std::vector<double>>();
      if (wv.size() != model.net.weights()[l].a.size())
        throw std::runtime_error("weight shape mismatch in layer " + std::to_string(l));
      model.net.weights()[l].a = std::move(wv);
      auto bv = biases[l].get<std::vector<double>>();
      if (bv.size() != model.net.biases()[l].size())
        throw std::runtime_error("bias shape mismatch in layer " + std::to_string(l));
      model.net.biases()[l] = std::move(bv);
    }
    model.normalization = j.value("normalization", std::string("shift_scale"));
    model.config_hash = j.value("config_hash", std::string());
    if (j.contains("config") && !j["config"].is_null())
      model.config_json = j["config"].dump();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid model file " + path + ": " + e.what());
  }
  return model;
}

}  // namespace qroute
