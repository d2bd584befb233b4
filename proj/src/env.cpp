#include "qroute/env.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qroute {

std::string to_string(StateNorm norm) {
  return norm == StateNorm::kShiftScale ? "shift_scale" : "raw";
}

StateNorm state_norm_from_string(const std::string& s) {
  if (s == "shift_scale") return StateNorm::kShiftScale;
  if (s == "raw") return StateNorm::kRaw;
  throw std::invalid_argument("unknown state normalization: " + s);
}

RoutingEnv::RoutingEnv(InteractionGraph graph, Circuit circuit,
                       EnvConfig config)
    : graph_(std::move(graph)),
      circuit_(std::move(circuit)),
      config_(config) {
  if (circuit_.qubit_count != graph_.vertex_count()) {
    throw std::invalid_argument(
        "env: circuit has " + std::to_string(circuit_.qubit_count) +
        " qubits but graph has " + std::to_string(graph_.vertex_count()) +
        " vertices (one qubit per vertex required)");
  }
  queues_.assign(circuit_.qubit_count, {});
  for (int i = 0; i < circuit_.interaction_count(); ++i) {
    auto [a, b] = circuit_.interactions[i];
    queues_[a].push_back(i);
    queues_[b].push_back(i);
  }
}

void RoutingEnv::advance_target(RoutingState& s, int q) const {
  const auto& queue = queues_[q];
  int pos = s.queue_position[q];
  if (pos < static_cast<int>(queue.size())) {
    auto [a, b] = circuit_.interactions[queue[pos]];
    s.target_qubit[q] = (a == q) ? b : a;
  } else {
    s.target_qubit[q] = kNoTarget;
  }
}

void RoutingEnv::fire_ready_pairs(RoutingState& s, StepOutcome& outcome) const {
  // Mutual targets form a matching on qubits, so all pairs found in one scan
  // can fire together; cascading re-scans until quiescent.
  while (true) {
    std::vector<std::pair<int, int>> ready;
    for (int q = 0; q < qubit_count(); ++q) {
      int t = s.target_qubit[q];
      if (t <= q) continue;  // visit each pair once, skip kNoTarget
      if (s.target_qubit[t] != q) continue;
      if (graph_.distance(s.vertex_of_qubit[q], s.vertex_of_qubit[t]) == 1) {
        ready.emplace_back(q, t);
      }
    }
    if (ready.empty()) break;
    for (auto [a, b] : ready) {
      outcome.gates_fired.emplace_back(a, b);
      ++s.queue_position[a];
      ++s.queue_position[b];
      advance_target(s, a);
      advance_target(s, b);
    }
    if (!config_.cascade_firing) break;
  }
}

RoutingState RoutingEnv::reset(Rng& rng) const {
  std::vector<int> placement(graph_.vertex_count());
  std::iota(placement.begin(), placement.end(), 0);
  rng.shuffle(placement);
  return reset(placement);
}

RoutingState RoutingEnv::reset(const std::vector<int>& qubit_at_vertex) const {
  const int n = graph_.vertex_count();
  if (static_cast<int>(qubit_at_vertex.size()) != n) {
    throw std::invalid_argument("reset: placement size mismatch");
  }
  RoutingState s;
  s.qubit_at_vertex = qubit_at_vertex;
  s.vertex_of_qubit.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    int q = qubit_at_vertex[v];
    if (q < 0 || q >= n || s.vertex_of_qubit[q] != -1) {
      throw std::invalid_argument("reset: placement is not a permutation");
    }
    s.vertex_of_qubit[q] = v;
  }
  s.queue_position.assign(n, 0);
  s.target_qubit.assign(n, kNoTarget);
  for (int q = 0; q < n; ++q) advance_target(s, q);

  // Pairs adjacent at reset fire with zero reward before the first action.
  StepOutcome pre;
  fire_ready_pairs(s, pre);
  return s;
}

void RoutingEnv::step_into(const RoutingState& s, const SwapLayer& a,
                           RoutingState& out, StepOutcome& outcome) const {
  if (!graph_.is_matching(a)) {
    throw std::invalid_argument(
        "step: action is not a valid matching on the graph");
  }
  out = s;
  outcome.gates_fired.clear();
  for (int e : a.swaps) {
    auto [u, v] = graph_.edges()[e];
    int qu = out.qubit_at_vertex[u];
    int qv = out.qubit_at_vertex[v];
    out.qubit_at_vertex[u] = qv;
    out.qubit_at_vertex[v] = qu;
    out.vertex_of_qubit[qu] = v;
    out.vertex_of_qubit[qv] = u;
  }
  fire_ready_pairs(out, outcome);
  outcome.reward =
      config_.reward_per_gate * static_cast<double>(outcome.gates_fired.size());
  outcome.done = done(out);
}

std::pair<RoutingState, StepOutcome> RoutingEnv::step(const RoutingState& s,
                                                      const SwapLayer& a) const {
  RoutingState out;
  StepOutcome outcome;
  step_into(s, a, out, outcome);
  return {std::move(out), std::move(outcome)};
}

bool RoutingEnv::done(const RoutingState& s) const {
  return std::all_of(s.target_qubit.begin(), s.target_qubit.end(),
                     [](int t) { return t == kNoTarget; });
}

bool RoutingEnv::interaction_fired(const RoutingState& s,
                                   int interaction_idx) const {
  int q = circuit_.interactions[interaction_idx].first;
  int in_queue = queue_index_of(q, interaction_idx);
  return in_queue < s.queue_position[q];
}

int RoutingEnv::queue_index_of(int q, int interaction_idx) const {
  const auto& queue = queues_[q];
  for (int k = 0; k < static_cast<int>(queue.size()); ++k) {
    if (queue[k] == interaction_idx) return k;
  }
  throw std::invalid_argument("interaction does not involve qubit " +
                              std::to_string(q));
}

void RoutingEnv::encode_into(const RoutingState& s,
                             std::span<double> out) const {
  const int n = graph_.vertex_count();
  if (static_cast<int>(out.size()) != n) {
    throw std::invalid_argument("encode: output span has wrong length");
  }
  for (int v = 0; v < n; ++v) {
    int q = s.qubit_at_vertex[v];
    int t = s.target_qubit[q];
    int label = (t == kNoTarget) ? -1 : s.vertex_of_qubit[t];
    if (config_.normalization == StateNorm::kShiftScale) {
      out[v] = static_cast<double>(label + 1) / static_cast<double>(n);
    } else {
      out[v] = static_cast<double>(label);
    }
  }
}

std::vector<double> RoutingEnv::encode_state(const RoutingState& s) const {
  std::vector<double> out(graph_.vertex_count());
  encode_into(s, out);
  return out;
}

std::vector<int> RoutingEnv::forced_swaps(const RoutingState& s) const {
  return forced_commitments(s).edges;
}

ForcedCommitments RoutingEnv::forced_commitments(const RoutingState& s) const {
  // Candidates over all mutual distance-2 pairs. The stationary vertex is
  // the member the edge does not move: the commitment only makes the pair
  // adjacent if that vertex stays put for the whole layer.
  struct Candidate {
    int edge;
    int pair_id;
    int stationary;
  };
  std::vector<Candidate> candidates;
  int pair_count = 0;
  for (int q = 0; q < qubit_count(); ++q) {
    int t = s.target_qubit[q];
    if (t <= q || s.target_qubit[t] != q) continue;
    int vq = s.vertex_of_qubit[q];
    int vt = s.vertex_of_qubit[t];
    if (graph_.distance(vq, vt) != 2) continue;
    int pair_id = pair_count++;
    for (int e : graph_.edges_at(vq)) {
      auto [u, v] = graph_.edges()[e];
      int mid = (u == vq) ? v : u;
      if (graph_.distance(mid, vt) == 1) candidates.push_back({e, pair_id, vt});
    }
    for (int e : graph_.edges_at(vt)) {
      auto [u, v] = graph_.edges()[e];
      int mid = (u == vt) ? v : u;
      if (graph_.distance(mid, vq) == 1) candidates.push_back({e, pair_id, vq});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return a.edge != b.edge ? a.edge < b.edge : a.pair_id < b.pair_id;
            });

  // Greedy by ascending edge index. `moved` vertices are swapped by a
  // retained edge; `held` vertices are stationary members retained
  // commitments rely on. A candidate edge may not touch either set, and a
  // pair is only committed while nothing retained moves its stationary
  // member. One edge can commit both pairs it brings together.
  std::vector<char> moved(graph_.vertex_count(), 0);
  std::vector<char> held(graph_.vertex_count(), 0);
  std::vector<char> pair_done(pair_count, 0);
  ForcedCommitments out;
  for (size_t i = 0; i < candidates.size();) {
    const int e = candidates[i].edge;
    size_t j = i;
    while (j < candidates.size() && candidates[j].edge == e) ++j;
    auto [u, v] = graph_.edges()[e];
    if (!moved[u] && !moved[v] && !held[u] && !held[v]) {
      bool retained = false;
      for (size_t k = i; k < j; ++k) {
        const Candidate& c = candidates[k];
        if (pair_done[c.pair_id] || moved[c.stationary]) continue;
        pair_done[c.pair_id] = 1;
        held[c.stationary] = 1;
        retained = true;
      }
      if (retained) {
        moved[u] = moved[v] = 1;
        out.edges.push_back(e);
      }
    }
    i = j;
  }
  for (int x = 0; x < graph_.vertex_count(); ++x)
    if (moved[x] || held[x]) out.frozen_vertices.push_back(x);
  return out;
}

int default_step_cap(const InteractionGraph& g) {
  if (g.is_grid()) {
    int r = g.grid_rows(), c = g.grid_cols();
    auto pass = [](int len) { return len >= 2 ? len : 0; };
    int schedule = std::min(2 * pass(r) + pass(c), 2 * pass(c) + pass(r));
    if (schedule == 0) schedule = std::max(r, c);
    return 10 * schedule;
  }
  return 10 * (g.diameter() + g.vertex_count());
}

}  // namespace qroute
