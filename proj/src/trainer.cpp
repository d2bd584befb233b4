#include "qroute/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace qroute {

std::string FamilySpec::name() const {
  if (kind == CircuitFamily::kSingleLayer) return "single-layer";
  return "random-" + std::to_string(interaction_count);
}

Circuit FamilySpec::make_circuit(int qubit_count, uint64_t seed) const {
  if (kind == CircuitFamily::kSingleLayer)
    return full_single_layer(qubit_count, seed);
  return random_circuit(qubit_count, interaction_count, seed);
}

FamilySpec family_from_string(const std::string& s, int interaction_count) {
  FamilySpec f;
  f.interaction_count = interaction_count;
  if (s == "single-layer") {
    f.kind = CircuitFamily::kSingleLayer;
    return f;
  }
  if (s == "random") {
    if (interaction_count < 0)
      throw std::invalid_argument("interaction count must be non-negative");
    f.kind = CircuitFamily::kRandom;
    return f;
  }
  throw std::invalid_argument("unknown circuit family: " + s);
}

void TrainerConfig::validate() const {
  if (alpha <= 0.0 || alpha > 1.0)
    throw std::invalid_argument("alpha must be in (0,1]");
  if (gamma < 0.0 || gamma >= 1.0)
    throw std::invalid_argument("gamma must be in [0,1)");
  if (episodes < 0)
    throw std::invalid_argument("episodes must be non-negative");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 ||
      epsilon_end > 1.0)
    throw std::invalid_argument("epsilon must be within [0,1]");
  if (epsilon_decay <= 0.0 || epsilon_decay > 1.0)
    throw std::invalid_argument("epsilon decay must be in (0,1]");
  if (replay_capacity < 1)
    throw std::invalid_argument("replay capacity must be positive");
  if (batch_size < 1)
    throw std::invalid_argument("batch size must be positive");
  if (target_sync_period < 1)
    throw std::invalid_argument("target sync period must be positive");
  if (step_cap < 0)
    throw std::invalid_argument("step cap must be non-negative");
  if (hidden_dims.empty())
    throw std::invalid_argument("at least one hidden layer is required");
  for (int d : hidden_dims)
    if (d < 1) throw std::invalid_argument("hidden layer sizes must be positive");
  act_anneal.validate();
  target_anneal.validate();
}

std::vector<int> TrainerConfig::layer_dims(int qubit_count) const {
  std::vector<int> dims;
  dims.reserve(hidden_dims.size() + 2);
  dims.push_back(qubit_count);
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(1);
  return dims;
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1)
    throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (static_cast<int>(buf_.size()) == capacity_) buf_.pop_front();
  buf_.push_back(std::move(t));
}

const Transition& ReplayBuffer::sample(Rng& rng) const {
  if (buf_.empty())
    throw std::logic_error("cannot sample from an empty replay buffer");
  return buf_[rng.next_below(buf_.size())];
}

double bellman_target(const Transition& t, const QNetwork& online,
                      const TargetNetwork& target, const TrainerConfig& cfg,
                      Rng& rng) {
  double y;
  if (t.done || cfg.gamma == 0.0) {
    y = t.reward;
  } else {
    if (!t.env)
      throw std::logic_error("non-terminal transition lacks its environment");
    const RoutingEnv& env = *t.env;
    const SwapLayer a = select_action_rl(t.after_state, online, env,
                                         cfg.target_anneal, cfg.forced_swaps,
                                         rng);
    auto [succ, outcome] = env.step(t.after_state, a);
    y = t.reward + cfg.gamma * target.net.forward(env.encode_state(succ));
  }
  if (cfg.alpha < 1.0)
    y = (1.0 - cfg.alpha) * online.forward(t.after) + cfg.alpha * y;
  return y;
}

EpisodeResult run_episode(const std::shared_ptr<const RoutingEnv>& env,
                          const QNetwork& online, double epsilon,
                          const TrainerConfig& cfg, Rng& rng) {
  if (!env) throw std::invalid_argument("run_episode needs an environment");
  const RoutingEnv& e = *env;
  EpisodeResult result;
  RoutingState s = e.reset(rng);
  const int cap = cfg.step_cap > 0 ? cfg.step_cap : default_step_cap(e.graph());
  std::vector<double> encoded_here = e.encode_state(s);
  while (!e.done(s) && result.layer_count < cap) {
    SwapLayer a = rng.uniform01() < epsilon
                      ? select_action_random(s, e.graph(), rng)
                      : select_action_rl(s, online, e, cfg.act_anneal,
                                         cfg.forced_swaps, rng);
    auto [next, outcome] = e.step(s, a);
    Transition t;
    t.before = encoded_here;
    t.action = std::move(a);
    t.reward = outcome.reward;
    t.after = e.encode_state(next);
    t.done = outcome.done;
    t.after_state = next;
    t.env = env;
    encoded_here = t.after;
    result.total_reward += outcome.reward;
    result.transitions.push_back(std::move(t));
    s = std::move(next);
    ++result.layer_count;
  }
  if (!e.done(s)) {
    // Aborted at the cap: train the tail as terminal with no bonus so the
    // value of dead-end wandering stays low.
    result.finished = false;
    if (!result.transitions.empty()) result.transitions.back().done = true;
  }
  return result;
}

TrainResult train(const InteractionGraph& g, const FamilySpec& family,
                  const TrainerConfig& cfg,
                  const std::function<void(const CurvePoint&)>& on_episode) {
  cfg.validate();
  const int n = g.vertex_count();
  Rng rng(cfg.seed);
  TrainResult out{QNetwork::initialize(cfg.layer_dims(n), rng), {}};
  QNetwork& net = out.net;
  TargetNetwork target;
  sync_target(net, target);
  Optimizer opt(net, cfg.optimizer);
  ReplayBuffer replay(cfg.replay_capacity);
  Gradients grad = net.zero_gradients();
  NetWorkspace ws = net.make_workspace();
  double epsilon = cfg.epsilon_start;
  long updates = 0;

  out.curve.reserve(static_cast<size_t>(cfg.episodes));
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    Circuit c = family.make_circuit(n, rng.next_u64());
    auto env = std::make_shared<const RoutingEnv>(g, std::move(c), cfg.env);
    EpisodeResult res = run_episode(env, net, epsilon, cfg, rng);
    const int steps = static_cast<int>(res.transitions.size());
    for (Transition& t : res.transitions) replay.push(std::move(t));

    double loss_sum = 0.0;
    long sample_count = 0;
    if (replay.size() >= cfg.batch_size) {
      for (int u = 0; u < steps; ++u) {
        grad.set_zero();
        for (int b = 0; b < cfg.batch_size; ++b) {
          const Transition& t = replay.sample(rng);
          const double y = bellman_target(t, net, target, cfg, rng);
          loss_sum += net.backward_accumulate(t.after, y, grad, ws);
        }
        grad.scale(1.0 / cfg.batch_size);
        opt.apply(net, grad);
        ++updates;
        ++target.updates_since_sync;
        if (updates % cfg.target_sync_period == 0) sync_target(net, target);
        sample_count += cfg.batch_size;
      }
    }
    const double mean_loss =
        sample_count > 0 ? loss_sum / static_cast<double>(sample_count) : 0.0;
    if (!std::isfinite(mean_loss)) {
      std::ostringstream what;
      what << "training diverged: non-finite loss at episode " << ep
           << " (epsilon " << epsilon << ", updates " << updates
           << ", parameter checksum " << net.parameter_checksum() << ")";
      throw std::runtime_error(what.str());
    }
    const CurvePoint point{ep, res.layer_count, mean_loss, epsilon};
    out.curve.push_back(point);
    if (on_episode) on_episode(point);
    epsilon = std::max(cfg.epsilon_end, epsilon * cfg.epsilon_decay);
  }
  return out;
}

namespace {

struct EpisodeEval {
  int layers = 0;
  bool unfinished = false;
  std::string trace;
};

EpisodeEval eval_one(const InteractionGraph& g, const Policy& prototype,
                     const FamilySpec& family, uint64_t seed,
                     int episode_index, const EvalOptions& options,
                     bool want_trace) {
  // Each episode derives its own stream, so results do not depend on how
  // episodes are spread over workers.
  Rng rng(Rng::derive(seed, static_cast<uint64_t>(episode_index)));
  Circuit c = family.make_circuit(g.vertex_count(), rng.next_u64());
  const RoutingEnv env(g, std::move(c), options.env);
  RoutingState s = env.reset(rng);
  const std::unique_ptr<Policy> policy = prototype.clone();
  policy->begin_episode(env, s);
  const int cap = options.step_cap > 0 ? options.step_cap : default_step_cap(g);

  EpisodeEval out;
  std::ostringstream trace;
  while (!policy->done_acting(env, s) && out.layers < cap) {
    const SwapLayer a = policy->act(env, s, rng);
    auto [next, outcome] = env.step(s, a);
    if (want_trace) {
      nlohmann::json line;
      line["episode"] = episode_index;
      line["step"] = out.layers;
      auto& swaps = line["swaps"] = nlohmann::json::array();
      for (int e : a.swaps) {
        auto [u, v] = env.graph().edges()[e];
        swaps.push_back({u, v});
      }
      line["gates"] = outcome.gates_fired;
      line["reward"] = outcome.reward;
      trace << line.dump() << '\n';
    }
    s = std::move(next);
    ++out.layers;
  }
  out.unfinished = !env.done(s);
  out.trace = trace.str();
  return out;
}

}  // namespace

EvalReport evaluate(const InteractionGraph& g, const Policy& prototype,
                    const FamilySpec& family, int n_episodes, uint64_t seed,
                    const EvalOptions& options) {
  if (n_episodes < 0)
    throw std::invalid_argument("episode count must be non-negative");
  const bool want_trace = !options.trace_path.empty();
  std::vector<EpisodeEval> results(static_cast<size_t>(n_episodes));

  const int threads = std::min(std::max(1, options.threads), std::max(1, n_episodes));
  if (threads <= 1) {
    for (int i = 0; i < n_episodes; ++i)
      results[i] = eval_one(g, prototype, family, seed, i, options, want_trace);
  } else {
    std::atomic<int> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (int i = cursor.fetch_add(1); i < n_episodes;
             i = cursor.fetch_add(1))
          results[i] =
              eval_one(g, prototype, family, seed, i, options, want_trace);
      });
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  report.policy = prototype.name();
  report.family = family.name();
  report.episodes = n_episodes;
  report.layer_counts.reserve(static_cast<size_t>(n_episodes));
  report.finished_flags.reserve(static_cast<size_t>(n_episodes));
  double sum = 0.0;
  for (const EpisodeEval& r : results) {
    report.layer_counts.push_back(r.layers);
    report.finished_flags.push_back(!r.unfinished);
    sum += r.layers;
    if (r.unfinished) ++report.unfinished;
  }
  if (n_episodes > 0) {
    report.mean = sum / n_episodes;
    double sq = 0.0;
    for (int v : report.layer_counts) {
      const double d = v - report.mean;
      sq += d * d;
    }
    report.stddev = std::sqrt(sq / n_episodes);
    report.min_layers =
        *std::min_element(report.layer_counts.begin(), report.layer_counts.end());
    report.max_layers =
        *std::max_element(report.layer_counts.begin(), report.layer_counts.end());
  }

  if (want_trace) {
    std::ofstream out(options.trace_path);
    if (!out)
      throw std::runtime_error("cannot write trace file: " + options.trace_path);
    for (const EpisodeEval& r : results) out << r.trace;
  }
  return report;
}

std::vector<double> moving_average(const std::vector<CurvePoint>& curve,
                                   int window) {
  if (window < 1) throw std::invalid_argument("window must be positive");
  std::vector<double> out(curve.size(), 0.0);
  double running = 0.0;
  for (size_t i = 0; i < curve.size(); ++i) {
    running += curve[i].layers;
    if (i >= static_cast<size_t>(window)) running -= curve[i - window].layers;
    out[i] = running / std::min<size_t>(i + 1, static_cast<size_t>(window));
  }
  return out;
}

}  // namespace qroute
