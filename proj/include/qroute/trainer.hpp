#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qroute/circuit.hpp"
#include "qroute/env.hpp"
#include "qroute/graph.hpp"
#include "qroute/policy.hpp"
#include "qroute/qnet.hpp"
#include "qroute/rng.hpp"

namespace qroute {

// Which distribution episodes draw their circuits from.
enum class CircuitFamily { kSingleLayer, kRandom };

struct FamilySpec {
  CircuitFamily kind = CircuitFamily::kSingleLayer;
  int interaction_count = 16;  // random family only

  std::string name() const;
  Circuit make_circuit(int qubit_count, uint64_t seed) const;
};

FamilySpec family_from_string(const std::string& s, int interaction_count);

struct TrainerConfig {
  // Soft-target mixing weight: the regression target is
  // (1-alpha)*current_prediction + alpha*bootstrap_target. The default 1
  // regresses on the pure bootstrap target; the optimizer step size carries
  // the smoothing role.
  double alpha = 1.0;
  double gamma = 0.95;  // discount
  int episodes = 10000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay = 0.9995;  // multiplicative, per episode
  int replay_capacity = 50000;
  int batch_size = 32;
  int target_sync_period = 100;  // network updates between target syncs
  uint64_t seed = 0;
  // Applying the forced-swap constraint while exploring hides the states it
  // would rescue: episodes never dwell near completion, the value function
  // never sees capped dead ends, and the trained policy learns to park pairs
  // just outside forcing range. Training unconstrained and enabling the
  // constraint at evaluation time scores far better on every grid tried.
  bool forced_swaps = false;
  int step_cap = 0;  // 0: derive from the graph's schedule constant
  std::vector<int> hidden_dims{32, 32, 32};
  // Acting search is run every exploit step; the bootstrap search runs per
  // replayed sample, so it gets a smaller budget.
  AnnealSchedule act_anneal{1.0, 0.95, 150, 0};
  AnnealSchedule target_anneal{1.0, 0.95, 80, 0};
  OptimizerConfig optimizer{};
  EnvConfig env{};

  void validate() const;
  std::vector<int> layer_dims(int qubit_count) const;
};

// One step of experience. Value regression happens on the arrival state:
// the reward observed on arriving at `after` plus the discounted value of
// the best state reachable from it. Bootstrapping therefore needs the raw
// successor and its episode's environment, not just the encodings.
struct Transition {
  std::vector<double> before;
  SwapLayer action;
  double reward = 0.0;
  std::vector<double> after;
  bool done = false;
  RoutingState after_state;
  std::shared_ptr<const RoutingEnv> env;
};

// Bounded FIFO experience store with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);
  void push(Transition t);
  const Transition& sample(Rng& rng) const;
  int size() const { return static_cast<int>(buf_.size()); }
  int capacity() const { return capacity_; }

 private:
  int capacity_;
  std::deque<Transition> buf_;
};

// Regression target for one transition. Terminal: the arrival reward.
// Otherwise: reward + gamma * V(successor), where the ONLINE network picks
// the successor's best action (same annealing search as acting) and the
// TARGET network values the state that action leads to — the double-Q
// split. cfg.alpha < 1 additionally mixes in the online network's current
// prediction of the arrival state.
double bellman_target(const Transition& t, const QNetwork& online,
                      const TargetNetwork& target, const TrainerConfig& cfg,
                      Rng& rng);

struct EpisodeResult {
  std::vector<Transition> transitions;
  int layer_count = 0;
  bool finished = true;  // false: aborted at the step cap
  double total_reward = 0.0;
};

// One episode from reset to completion or the step cap, epsilon-greedy
// between the random baseline and the annealed value search. A capped
// episode's final transition is marked terminal with no bootstrap bonus.
EpisodeResult run_episode(const std::shared_ptr<const RoutingEnv>& env,
                          const QNetwork& online, double epsilon,
                          const TrainerConfig& cfg, Rng& rng);

struct CurvePoint {
  int episode = 0;
  int layers = 0;
  double loss = 0.0;  // mean per-sample loss across the episode's updates
  double epsilon = 0.0;
};

struct TrainResult {
  QNetwork net;
  std::vector<CurvePoint> curve;
};

// Full training loop: per episode, fresh circuit and placement, one replay
// batch update per step taken, periodic target sync, epsilon decay.
// `on_episode` (optional) observes each curve point as it is produced.
TrainResult train(const InteractionGraph& g, const FamilySpec& family,
                  const TrainerConfig& cfg,
                  const std::function<void(const CurvePoint&)>& on_episode = {});

struct EvalReport {
  std::string policy;
  std::string family;
  int episodes = 0;
  double mean = 0.0;
  double stddev = 0.0;
  int min_layers = 0;
  int max_layers = 0;
  int unfinished = 0;
  std::vector<int> layer_counts;       // per episode, episode order
  std::vector<bool> finished_flags;    // per episode, episode order
};

struct EvalOptions {
  int threads = 1;
  int step_cap = 0;  // 0: derive from the graph
  EnvConfig env{};
  std::string trace_path;  // when set: one structured line per step
};

// Evaluation harness: n fixed-seed episodes (episode i derives its own
// stream from `seed`, so results are independent of thread count), no
// exploration, no learning. The policy prototype is cloned per worker.
EvalReport evaluate(const InteractionGraph& g, const Policy& prototype,
                    const FamilySpec& family, int n_episodes, uint64_t seed,
                    const EvalOptions& options = {});

// Smoothed copy of a curve column: trailing moving average over `window`.
std::vector<double> moving_average(const std::vector<CurvePoint>& curve,
                                   int window);

}  // namespace qroute
