#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qroute/circuit.hpp"
#include "qroute/env.hpp"
#include "qroute/graph.hpp"
#include "qroute/qnet.hpp"
#include "qroute/rng.hpp"

namespace qroute {

// Geometric cooling schedule for the annealing action search.
struct AnnealSchedule {
  double initial_temperature = 1.0;
  double cooling_factor = 0.95;  // in (0,1): temperature strictly decreases
  int iterations = 500;
  int restarts = 2;  // extra independent runs; global best wins

  void validate() const;
};

// Picks the swap layer whose successor state the value network scores
// highest, searched by simulated annealing over matchings. Forced mode
// freezes the distance-2 forced swaps into every candidate and anneals only
// over compatible additions. The empty layer is excluded from the search:
// a no-op step cannot help. Candidates are scored by simulating the step
// on a scratch state and evaluating the network on the encoded successor.
SwapLayer select_action_rl(const RoutingState& s, const QNetwork& net,
                           const RoutingEnv& env, const AnnealSchedule& sched,
                           bool forced, Rng& rng);

// Baseline: shuffle the edge list, then include each edge that is still
// vertex-disjoint from the chosen set with probability 1/2. May be empty.
SwapLayer select_action_random(const RoutingState& s,
                               const InteractionGraph& g, Rng& rng);

// Two realizations of the swapping-network baseline on grids.
enum class SortnetVariant {
  // Three full odd-even-transposition passes (columns, rows, columns — or
  // the cheaper transpose): any destination permutation is reached by
  // sorting to an intermediate line assignment, then across lines, then
  // within lines.
  kGrid,
  // One odd-even-transposition sort along the boustrophedon traversal of
  // the whole grid.
  kChain,
};

std::string to_string(SortnetVariant v);
SortnetVariant sortnet_variant_from_string(const std::string& s);

// Swap layers of the fixed per-circuit-layer schedule; a function of the
// grid shape only. Grid variant: 2*r + c phases (or the cheaper transpose)
// where a line of length < 2 contributes nothing. Chain variant: one phase
// per cell.
int sorting_network_constant(const InteractionGraph& g, SortnetVariant v);

// Deterministic baseline router. Processes the circuit one greedy layer at
// a time; for each layer with unfired interactions, assigns each pair a
// pair of adjacent destination cells, extends the plan with the fixed
// odd-even-transposition schedule that realizes the destination
// permutation, and simulates the applied layers so interactions fired en
// route are skipped downstream. The schedule length never depends on the
// instance, matching how comparator networks are costed.
std::vector<SwapLayer> sorting_network_route(
    const RoutingState& s, const RoutingEnv& env, SortnetVariant variant,
    LayeringMode mode = LayeringMode::kSequential);

// A per-episode action source for the evaluation harness.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Fresh copy with no episode state; evaluation workers clone a prototype.
  virtual std::unique_ptr<Policy> clone() const = 0;
  // Called once per episode with the reset state.
  virtual void begin_episode(const RoutingEnv& env, const RoutingState& s);
  virtual SwapLayer act(const RoutingEnv& env, const RoutingState& s,
                        Rng& rng) = 0;
  // Default: act until the circuit completes. Fixed-schedule policies
  // instead act until their plan is exhausted, since an oblivious network's
  // cost is its full schedule.
  virtual bool done_acting(const RoutingEnv& env, const RoutingState& s) const;
};

class RandomPolicy : public Policy {
 public:
  std::string name() const override { return "random"; }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<RandomPolicy>();
  }
  SwapLayer act(const RoutingEnv& env, const RoutingState& s,
                Rng& rng) override;
};

class RlPolicy : public Policy {
 public:
  RlPolicy(QNetwork net, AnnealSchedule sched, bool forced_swaps);
  std::string name() const override;
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<RlPolicy>(net_, sched_, forced_);
  }
  SwapLayer act(const RoutingEnv& env, const RoutingState& s,
                Rng& rng) override;
  const QNetwork& net() const { return net_; }

 private:
  QNetwork net_;
  AnnealSchedule sched_;
  bool forced_;
};

class SortingNetworkPolicy : public Policy {
 public:
  explicit SortingNetworkPolicy(SortnetVariant variant,
                                LayeringMode mode = LayeringMode::kSequential);
  std::string name() const override;
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<SortingNetworkPolicy>(variant_, mode_);
  }
  void begin_episode(const RoutingEnv& env, const RoutingState& s) override;
  SwapLayer act(const RoutingEnv& env, const RoutingState& s,
                Rng& rng) override;
  bool done_acting(const RoutingEnv& env, const RoutingState& s) const override;
  size_t plan_length() const { return plan_.size(); }

 private:
  SortnetVariant variant_;
  LayeringMode mode_;
  std::vector<SwapLayer> plan_;
  size_t next_ = 0;
};

}  // namespace qroute
