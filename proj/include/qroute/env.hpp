#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qroute/circuit.hpp"
#include "qroute/graph.hpp"
#include "qroute/rng.hpp"

namespace qroute {

// How raw vertex labels are mapped into network inputs.
enum class StateNorm {
  // (index + 1) / n_q in (0, 1]; the no-target sentinel maps to 0.
  kShiftScale,
  // Raw vertex indices, sentinel -1.
  kRaw,
};

std::string to_string(StateNorm norm);
StateNorm state_norm_from_string(const std::string& s);

struct EnvConfig {
  double reward_per_gate = 1.0;
  // After targets advance, newly mutual adjacent pairs also fire before the
  // step ends.
  bool cascade_firing = true;
  StateNorm normalization = StateNorm::kShiftScale;
};

// Placement plus interaction progress. Value-semantic and cheap to copy;
// the environment never mutates a state in place.
struct RoutingState {
  std::vector<int> qubit_at_vertex;  // vertex -> qubit
  std::vector<int> vertex_of_qubit;  // qubit -> vertex (inverse permutation)
  std::vector<int> target_qubit;     // qubit -> next partner, or kNoTarget
  std::vector<int> queue_position;   // qubit -> fired-interaction count
};

struct StepOutcome {
  std::vector<std::pair<int, int>> gates_fired;
  double reward = 0.0;
  bool done = false;
};

// Forced swaps together with the vertices they promise not to disturb.
struct ForcedCommitments {
  std::vector<int> edges;            // retained forced edges, ascending
  std::vector<int> frozen_vertices;  // endpoints plus stationary members
};

// The routing environment of one (graph, circuit) episode. Applies swap
// layers, fires interactions implicitly when mutually-targeting qubits
// become adjacent, and encodes states for the value network.
class RoutingEnv {
 public:
  static constexpr int kNoTarget = -1;

  RoutingEnv(InteractionGraph graph, Circuit circuit, EnvConfig config = {});

  // Random uniform placement. Already-adjacent mutually-targeting pairs fire
  // immediately with zero reward, so the first decision is never a free gate.
  RoutingState reset(Rng& rng) const;
  // Explicit placement: qubit_at_vertex[v] = qubit at vertex v.
  RoutingState reset(const std::vector<int>& qubit_at_vertex) const;

  std::pair<RoutingState, StepOutcome> step(const RoutingState& s,
                                            const SwapLayer& a) const;
  // Allocation-free variant for hot loops; `out` may not alias `s`.
  void step_into(const RoutingState& s, const SwapLayer& a, RoutingState& out,
                 StepOutcome& outcome) const;

  // Entry j = vertex holding the target of the qubit at vertex j (sentinel
  // when it has none), then the configured normalization.
  std::vector<double> encode_state(const RoutingState& s) const;
  void encode_into(const RoutingState& s, std::span<double> out) const;

  // Swaps forced by mutually-targeting pairs at graph distance exactly 2.
  // Candidate edges move one member adjacent to the other. Candidates are
  // retained greedily by ascending edge index, at most one edge per pair; a
  // candidate is dropped when it shares a vertex with a retained edge or
  // when it would move a vertex an earlier commitment relies on staying
  // put (either member of an already-committed pair). One edge may commit
  // two pairs at once. Result is a matching, sorted.
  std::vector<int> forced_swaps(const RoutingState& s) const;

  // forced_swaps plus the vertices those commitments need untouched: the
  // retained edges' endpoints and each committed pair's stationary member.
  // Action search must not move a frozen vertex, or the forced swap would
  // no longer make its pair adjacent.
  ForcedCommitments forced_commitments(const RoutingState& s) const;

  bool done(const RoutingState& s) const;
  bool interaction_fired(const RoutingState& s, int interaction_idx) const;

  const InteractionGraph& graph() const { return graph_; }
  const Circuit& circuit() const { return circuit_; }
  const EnvConfig& config() const { return config_; }
  int qubit_count() const { return circuit_.qubit_count; }

  // Position of interaction `idx` within qubit `q`'s per-qubit queue.
  int queue_index_of(int q, int interaction_idx) const;

 private:
  void fire_ready_pairs(RoutingState& s, StepOutcome& outcome) const;
  void advance_target(RoutingState& s, int q) const;

  InteractionGraph graph_;
  Circuit circuit_;
  EnvConfig config_;
  std::vector<std::vector<int>> queues_;  // qubit -> interaction indices
};

// Default abort horizon for one episode: 10x the layer cost of the fixed
// sorting-network schedule on grids, with a diameter-based fallback for
// arbitrary graphs.
int default_step_cap(const InteractionGraph& g);

}  // namespace qroute
