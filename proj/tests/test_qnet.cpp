#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qroute/qnet.hpp"
#include "qroute/rng.hpp"

using namespace qroute;

namespace {

// Reference forward pass, written independently of the class internals.
// Returns the scalar output; optionally records every hidden pre-activation
// so callers can steer clear of rectifier kinks.
double naive_forward(const QNetwork& net, const std::vector<double>& x,
                     std::vector<double>* hidden_pre = nullptr) {
  std::vector<double> cur = x;
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    const Matrix& w = net.weights()[l];
    std::vector<double> next(static_cast<size_t>(w.rows));
    for (int r = 0; r < w.rows; ++r) {
      double z = net.biases()[l][r];
      for (int c = 0; c < w.cols; ++c) z += w.at(r, c) * cur[c];
      if (l + 1 < layers) {
        if (hidden_pre) hidden_pre->push_back(z);
        next[r] = z > 0.0 ? z : 0.0;
      } else {
        next[r] = z;
      }
    }
    cur = std::move(next);
  }
  return cur[0];
}

std::string temp_path(const char* name) {
  return std::string("/tmp/qroute_test_") + name;
}

// Mutable view of every parameter, in a fixed order, for finite differences.
std::vector<double*> parameter_view(QNetwork& net) {
  std::vector<double*> view;
  for (auto& w : net.weights())
    for (double& v : w.a) view.push_back(&v);
  for (auto& b : net.biases())
    for (double& v : b) view.push_back(&v);
  return view;
}

std::vector<double> flatten(const ParamSet& p) {
  std::vector<double> flat;
  for (const auto& w : p.weights) flat.insert(flat.end(), w.a.begin(), w.a.end());
  for (const auto& b : p.biases) flat.insert(flat.end(), b.begin(), b.end());
  return flat;
}

}  // namespace

TEST_CASE("forward pass matches the reference implementation") {
  Rng rng(11);
  const std::vector<std::vector<int>> shapes = {
      {3, 1}, {2, 4, 1}, {5, 8, 3, 1}, {4, 32, 32, 32, 1}};
  for (const auto& dims : shapes) {
    QNetwork net = QNetwork::initialize(dims, rng);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> x(static_cast<size_t>(dims.front()));
      for (double& v : x) v = 2.0 * rng.uniform01() - 1.0;
      CHECK(net.forward(x) == doctest::Approx(naive_forward(net, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("hidden layers rectify, the output layer does not") {
  QNetwork net({1, 1, 1});  // zero parameters
  net.weights()[0].at(0, 0) = -1.0;
  net.weights()[1].at(0, 0) = 1.0;

  // Positive input, negative hidden pre-activation: clamped to zero.
  CHECK(net.forward(std::vector<double>{2.0}) == 0.0);
  // Negative input passes through the hidden unit unclamped.
  CHECK(net.forward(std::vector<double>{-3.0}) == doctest::Approx(3.0));

  // A negative output bias must survive: only hidden layers rectify.
  net.biases()[1][0] = -5.0;
  CHECK(net.forward(std::vector<double>{2.0}) == doctest::Approx(-5.0));
}

TEST_CASE("constructor validates layer dimensions") {
  CHECK_THROWS_AS(QNetwork({4}), std::invalid_argument);
  CHECK_THROWS_AS(QNetwork({4, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(QNetwork({4, 8, 2}), std::invalid_argument);  // output != 1
  CHECK(QNetwork({4, 1}).layer_count() == 1);

  // Zero-constructed parameters give a zero output for any input.
  QNetwork zero({3, 5, 1});
  CHECK(zero.forward(std::vector<double>{0.4, -0.2, 9.0}) == 0.0);
}

TEST_CASE("forward checks the input dimension") {
  QNetwork net({3, 2, 1});
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(net.forward(std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST_CASE("workspace reuse does not change the result") {
  Rng rng(12);
  QNetwork net = QNetwork::initialize({6, 16, 16, 1}, rng);
  NetWorkspace ws = net.make_workspace();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(6);
    for (double& v : x) v = 2.0 * rng.uniform01() - 1.0;
    CHECK(net.forward(x, ws) == net.forward(x));
  }
}

TEST_CASE("initialization: fan-scaled bounds, zero biases, seeded") {
  Rng rng(13);
  QNetwork net = QNetwork::initialize({16, 32, 32, 32, 1}, rng);
  for (int l = 0; l < net.layer_count(); ++l) {
    const Matrix& w = net.weights()[l];
    const double bound = std::sqrt(6.0 / (w.rows + w.cols));
    double max_abs = 0.0;
    for (double v : w.a) {
      CHECK(std::abs(v) <= bound);
      max_abs = std::max(max_abs, std::abs(v));
    }
    // The draw is uniform over the full interval; a sample this large that
    // never exceeds half the bound would mean the scaling is wrong.
    CHECK(max_abs > 0.5 * bound);
    for (double b : net.biases()[l]) CHECK(b == 0.0);
  }

  Rng r1(99), r2(99), r3(100);
  CHECK(QNetwork::initialize({4, 8, 1}, r1).parameter_checksum() ==
        QNetwork::initialize({4, 8, 1}, r2).parameter_checksum());
  CHECK(QNetwork::initialize({4, 8, 1}, r1).parameter_checksum() !=
        QNetwork::initialize({4, 8, 1}, r3).parameter_checksum());
}

TEST_CASE("analytic gradients match central finite differences") {
  // Squared-error loss; every parameter of every layer is perturbed. Configs
  // whose hidden pre-activations sit near the rectifier kink are skipped:
  // the loss is not differentiable there and central differences straddle
  // the corner.
  const double kStep = 1e-5;
  const double kRelTol = 1e-4;
  const double kAbsFloor = 1e-8;
  const std::vector<std::vector<int>> shapes = {
      {2, 1}, {3, 4, 1}, {4, 6, 5, 1}, {5, 8, 8, 8, 1}};

  int checked_configs = 0;
  uint64_t seed = 1000;
  while (checked_configs < 24) {
    Rng rng(seed++);
    const auto& dims = shapes[checked_configs % shapes.size()];
    QNetwork net = QNetwork::initialize(dims, rng);
    std::vector<double> x(static_cast<size_t>(dims.front()));
    for (double& v : x) v = 2.0 * rng.uniform01() - 1.0;
    const double target = 4.0 * rng.uniform01() - 2.0;

    std::vector<double> pre;
    naive_forward(net, x, &pre);
    bool near_kink = false;
    for (double z : pre) near_kink = near_kink || std::abs(z) < 1e-3;
    if (near_kink) continue;  // resample with the next seed

    const Gradients grad = net.backward(x, target);
    const std::vector<double> analytic = flatten(grad);
    std::vector<double*> params = parameter_view(net);
    REQUIRE(params.size() == analytic.size());

    for (size_t i = 0; i < params.size(); ++i) {
      const double saved = *params[i];
      auto loss = [&](double v) {
        *params[i] = v;
        const double err = naive_forward(net, x) - target;
        return err * err;
      };
      const double numeric = (loss(saved + kStep) - loss(saved - kStep)) / (2.0 * kStep);
      *params[i] = saved;
      const double scale = std::max(std::abs(numeric), std::abs(analytic[i]));
      CHECK(std::abs(numeric - analytic[i]) <=
            std::max(kAbsFloor, kRelTol * scale));
    }
    ++checked_configs;
  }
  CHECK(checked_configs == 24);
}

TEST_CASE("backward_accumulate sums samples and returns the squared error") {
  Rng rng(21);
  QNetwork net = QNetwork::initialize({3, 6, 1}, rng);
  const std::vector<double> xa = {0.3, -0.7, 0.9};
  const std::vector<double> xb = {-0.2, 0.5, 0.1};

  Gradients acc = net.zero_gradients();
  NetWorkspace ws = net.make_workspace();
  const double loss_a = net.backward_accumulate(xa, 1.5, acc, ws);
  const double loss_b = net.backward_accumulate(xb, -0.5, acc, ws);

  const double ea = net.forward(xa) - 1.5;
  const double eb = net.forward(xb) + 0.5;
  CHECK(loss_a == doctest::Approx(ea * ea));
  CHECK(loss_b == doctest::Approx(eb * eb));

  const std::vector<double> sum = flatten(acc);
  const std::vector<double> ga = flatten(net.backward(xa, 1.5));
  const std::vector<double> gb = flatten(net.backward(xb, -0.5));
  REQUIRE(sum.size() == ga.size());
  for (size_t i = 0; i < sum.size(); ++i)
    CHECK(sum[i] == doctest::Approx(ga[i] + gb[i]).epsilon(1e-12));
}

TEST_CASE("gradient scaling averages a batch") {
  Rng rng(22);
  QNetwork net = QNetwork::initialize({2, 3, 1}, rng);
  Gradients g = net.backward(std::vector<double>{0.5, -0.5}, 2.0);
  const std::vector<double> before = flatten(g);
  g.scale(0.25);
  const std::vector<double> after = flatten(g);
  for (size_t i = 0; i < before.size(); ++i)
    CHECK(after[i] == doctest::Approx(0.25 * before[i]));
  g.set_zero();
  for (double v : flatten(g)) CHECK(v == 0.0);
}

TEST_CASE("adam steps follow the bias-corrected update rule") {
  // Single weight, single bias: replicate the textbook formulas and demand
  // exact agreement over several steps.
  QNetwork net({1, 1});
  net.weights()[0].at(0, 0) = 0.5;
  net.biases()[0][0] = -0.25;
  OptimizerConfig cfg;  // adam, lr 1e-3, betas 0.9/0.999, eps 1e-8
  Optimizer opt(net, cfg);

  double w = 0.5, b = -0.25;
  double mw = 0, vw = 0, mb = 0, vb = 0;
  const double grads[3][2] = {{2.0, -1.0}, {0.5, 0.5}, {-3.0, 0.0}};
  for (int t = 1; t <= 3; ++t) {
    Gradients g = net.zero_gradients();
    g.weights[0].at(0, 0) = grads[t - 1][0];
    g.biases[0][0] = grads[t - 1][1];
    opt.apply(net, g);

    auto expect = [&](double& p, double& m, double& v, double grad) {
      m = cfg.beta1 * m + (1 - cfg.beta1) * grad;
      v = cfg.beta2 * v + (1 - cfg.beta2) * grad * grad;
      const double mhat = m / (1 - std::pow(cfg.beta1, t));
      const double vhat = v / (1 - std::pow(cfg.beta2, t));
      p -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    };
    expect(w, mw, vw, grads[t - 1][0]);
    expect(b, mb, vb, grads[t - 1][1]);
    CHECK(net.weights()[0].at(0, 0) == doctest::Approx(w).epsilon(1e-15));
    CHECK(net.biases()[0][0] == doctest::Approx(b).epsilon(1e-15));
  }
  CHECK(opt.step_count() == 3);
}

TEST_CASE("momentum steps accumulate a decaying velocity") {
  QNetwork net({1, 1});
  net.weights()[0].at(0, 0) = 1.0;
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kMomentum;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.5;
  Optimizer opt(net, cfg);

  Gradients g = net.zero_gradients();
  g.weights[0].at(0, 0) = 1.0;
  opt.apply(net, g);  // vel = -0.1, w = 0.9
  CHECK(net.weights()[0].at(0, 0) == doctest::Approx(0.9));
  opt.apply(net, g);  // vel = -0.15, w = 0.75
  CHECK(net.weights()[0].at(0, 0) == doctest::Approx(0.75));
  g.weights[0].at(0, 0) = 0.0;
  opt.apply(net, g);  // coasting: vel = -0.075, w = 0.675
  CHECK(net.weights()[0].at(0, 0) == doctest::Approx(0.675));
}

TEST_CASE("optimizer rejects malformed gradients") {
  Rng rng(31);
  QNetwork net = QNetwork::initialize({2, 3, 1}, rng);
  Optimizer opt(net, {});

  Gradients bad = net.zero_gradients();
  bad.weights[0].at(1, 0) = std::nan("");
  CHECK_THROWS_WITH_AS(opt.apply(net, bad), doctest::Contains("layer 0"),
                       std::runtime_error);

  Gradients inf = net.zero_gradients();
  inf.biases[1][0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(opt.apply(net, inf), doctest::Contains("layer 1"),
                       std::runtime_error);

  QNetwork other({5, 4, 1});
  CHECK_THROWS_AS(opt.apply(net, other.zero_gradients()), std::invalid_argument);
}

TEST_CASE("checksums detect any parameter mutation") {
  Rng rng(41);
  QNetwork net = QNetwork::initialize({4, 8, 1}, rng);
  QNetwork copy = net;
  CHECK(net.parameter_checksum() == copy.parameter_checksum());

  copy.biases()[0][3] += 1e-15;
  CHECK(net.parameter_checksum() != copy.parameter_checksum());
}

TEST_CASE("target sync deep-copies and resets staleness") {
  Rng rng(42);
  QNetwork online = QNetwork::initialize({3, 5, 1}, rng);
  TargetNetwork target;
  target.updates_since_sync = 17;

  sync_target(online, target);
  CHECK(target.updates_since_sync == 0);
  CHECK(target.sync_count == 1);
  CHECK(target.net.parameter_checksum() == online.parameter_checksum());

  // Mutating the online network must not leak into the frozen copy.
  const uint64_t frozen = target.net.parameter_checksum();
  online.weights()[0].at(0, 0) += 1.0;
  CHECK(target.net.parameter_checksum() == frozen);

  sync_target(online, target);
  CHECK(target.sync_count == 2);
  CHECK(target.net.parameter_checksum() == online.parameter_checksum());
}

TEST_CASE("model files round-trip parameters exactly") {
  Rng rng(51);
  ModelFile model;
  model.net = QNetwork::initialize({6, 12, 12, 1}, rng);
  model.normalization = "raw";
  model.config_hash = "cafe1234";
  model.config_json = R"({"gamma":0.95,"episodes":10})";

  const std::string path = temp_path("model_roundtrip.json");
  save_model(model, path);
  const ModelFile back = load_model(path);
  std::remove(path.c_str());

  CHECK(back.net.layer_dims() == model.net.layer_dims());
  CHECK(back.net.parameter_checksum() == model.net.parameter_checksum());
  CHECK(back.normalization == "raw");
  CHECK(back.config_hash == "cafe1234");
  CHECK(!back.config_json.empty());
}

TEST_CASE("model loading reports failure causes") {
  CHECK_THROWS_WITH_AS(load_model("/tmp/qroute_test_no_such_model.json"),
                       doctest::Contains("cannot open"), std::runtime_error);

  const std::string garbled = temp_path("model_garbled.json");
  {
    std::ofstream out(garbled);
    out << "{ not json";
  }
  CHECK_THROWS_WITH_AS(load_model(garbled), doctest::Contains("invalid model file"),
                       std::runtime_error);
  std::remove(garbled.c_str());

  // Structurally valid JSON whose weight array does not match its dims.
  const std::string mis = temp_path("model_misshaped.json");
  {
    std::ofstream out(mis);
    out << R"({"layer_dims":[2,1],"weights":[[0.1,0.2,0.3]],"biases":[[0.0]]})";
  }
  CHECK_THROWS_WITH_AS(load_model(mis), doctest::Contains("shape mismatch"),
                       std::runtime_error);
  std::remove(mis.c_str());
}
