#include "qroute/policy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace qroute {

void AnnealSchedule::validate() const {
  if (initial_temperature <= 0.0)
    throw std::invalid_argument("annealing temperature must be positive");
  if (cooling_factor <= 0.0 || cooling_factor >= 1.0)
    throw std::invalid_argument("annealing cooling factor must be in (0,1)");
  if (iterations < 1)
    throw std::invalid_argument("annealing needs at least one iteration");
  if (restarts < 0)
    throw std::invalid_argument("annealing restarts must be non-negative");
}

namespace {

// Scores a candidate layer by simulating the step and evaluating the value
// network on the encoded successor state. Buffers are reused across calls.
struct SuccessorScorer {
  const RoutingEnv& env;
  const QNetwork& net;
  const RoutingState& s;
  RoutingState tmp;
  StepOutcome outcome;
  std::vector<double> encoded;
  NetWorkspace ws;

  SuccessorScorer(const RoutingEnv& e, const QNetwork& n, const RoutingState& st)
      : env(e),
        net(n),
        s(st),
        encoded(static_cast<size_t>(e.qubit_count()), 0.0),
        ws(n.make_workspace()) {}

  double score(const SwapLayer& a) {
    env.step_into(s, a, tmp, outcome);
    env.encode_into(tmp, encoded);
    return net.forward(encoded, ws);
  }
};

}  // namespace

SwapLayer select_action_rl(const RoutingState& s, const QNetwork& net,
                           const RoutingEnv& env, const AnnealSchedule& sched,
                           bool forced, Rng& rng) {
  sched.validate();
  if (net.input_dim() != env.qubit_count())
    throw std::invalid_argument(
        "value network input dimension does not match the qubit count");
  const InteractionGraph& g = env.graph();

  ForcedCommitments commitments =
      forced ? env.forced_commitments(s) : ForcedCommitments{};
  const std::vector<int>& forced_edges = commitments.edges;
  // Frozen vertices cover the committed pairs' stationary members too:
  // moving one would break the adjacency its forced swap establishes.
  std::vector<char> blocked(static_cast<size_t>(g.vertex_count()), 0);
  for (int x : commitments.frozen_vertices) blocked[x] = 1;
  // The annealer only ever touches edges compatible with the frozen set.
  std::vector<int> free_edges;
  for (int e = 0; e < g.edge_count(); ++e) {
    auto [u, v] = g.edges()[e];
    if (!blocked[u] && !blocked[v]) free_edges.push_back(e);
  }

  auto make_layer = [&](const std::vector<char>& chosen) {
    SwapLayer layer;
    layer.swaps = forced_edges;
    for (size_t i = 0; i < chosen.size(); ++i)
      if (chosen[i]) layer.swaps.push_back(free_edges[i]);
    std::sort(layer.swaps.begin(), layer.swaps.end());
    return layer;
  };

  if (free_edges.empty()) return make_layer({});

  SuccessorScorer scorer(env, net, s);
  const int fe = static_cast<int>(free_edges.size());

  SwapLayer best_layer;
  double best_value = 0.0;
  bool have_best = false;

  std::vector<char> chosen(static_cast<size_t>(fe), 0);
  std::vector<int> occupant(static_cast<size_t>(g.vertex_count()), -1);
  std::vector<int> order(static_cast<size_t>(fe));

  for (int run = 0; run <= sched.restarts; ++run) {
    // Initial candidate: coin-flip greedy fill, topped up so the whole
    // layer (frozen edges included) is never empty — a no-op step cannot
    // change the state and is excluded from the search space.
    std::fill(chosen.begin(), chosen.end(), 0);
    std::fill(occupant.begin(), occupant.end(), -1);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    int chosen_count = 0;
    for (int i : order) {
      auto [u, v] = g.edges()[free_edges[i]];
      if (occupant[u] == -1 && occupant[v] == -1 && rng.bernoulli(0.5)) {
        chosen[i] = 1;
        occupant[u] = occupant[v] = i;
        ++chosen_count;
      }
    }
    if (forced_edges.empty() && chosen_count == 0) {
      const int i = static_cast<int>(rng.next_below(static_cast<uint64_t>(fe)));
      auto [u, v] = g.edges()[free_edges[i]];
      chosen[i] = 1;
      occupant[u] = occupant[v] = i;
      ++chosen_count;
    }

    SwapLayer current_layer = make_layer(chosen);
    double current = scorer.score(current_layer);
    if (!have_best || current > best_value) {
      best_value = current;
      best_layer = current_layer;
      have_best = true;
    }

    double temp = sched.initial_temperature;
    for (int it = 0; it < sched.iterations;
         ++it, temp *= sched.cooling_factor) {
      // Move: toggle a random free edge. Adding evicts whatever it
      // conflicts with; removing is rejected if it would empty the layer.
      const int i = static_cast<int>(rng.next_below(static_cast<uint64_t>(fe)));
      auto [u, v] = g.edges()[free_edges[i]];
      int evicted[2] = {-1, -1};
      if (chosen[i]) {
        if (forced_edges.empty() && chosen_count == 1) continue;
        chosen[i] = 0;
        occupant[u] = occupant[v] = -1;
        --chosen_count;
      } else {
        if (occupant[u] != -1) evicted[0] = occupant[u];
        if (occupant[v] != -1 && occupant[v] != evicted[0])
          evicted[1] = occupant[v];
        for (int j : evicted) {
          if (j == -1) continue;
          auto [a, b] = g.edges()[free_edges[j]];
          chosen[j] = 0;
          occupant[a] = occupant[b] = -1;
          --chosen_count;
        }
        chosen[i] = 1;
        occupant[u] = occupant[v] = i;
        ++chosen_count;
      }

      SwapLayer moved = make_layer(chosen);
      const double value = scorer.score(moved);
      const double delta = value - current;
      if (delta >= 0.0 || rng.uniform01() < std::exp(delta / temp)) {
        current = value;
        current_layer = std::move(moved);
        if (current > best_value) {
          best_value = current;
          best_layer = current_layer;
        }
      } else if (chosen[i]) {  // rejected an add: undo it and its evictions
        chosen[i] = 0;
        occupant[u] = occupant[v] = -1;
        --chosen_count;
        for (int j : evicted) {
          if (j == -1) continue;
          auto [a, b] = g.edges()[free_edges[j]];
          chosen[j] = 1;
          occupant[a] = occupant[b] = j;
          ++chosen_count;
        }
      } else {  // rejected a removal: put the edge back
        chosen[i] = 1;
        occupant[u] = occupant[v] = i;
        ++chosen_count;
      }
    }
  }
  return best_layer;
}

SwapLayer select_action_random(const RoutingState&, const InteractionGraph& g,
                               Rng& rng) {
  std::vector<int> order(static_cast<size_t>(g.edge_count()));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<char> busy(static_cast<size_t>(g.vertex_count()), 0);
  SwapLayer layer;
  for (int e : order) {
    auto [u, v] = g.edges()[e];
    if (busy[u] || busy[v]) continue;
    if (!rng.bernoulli(0.5)) continue;
    busy[u] = busy[v] = 1;
    layer.swaps.push_back(e);
  }
  std::sort(layer.swaps.begin(), layer.swaps.end());
  return layer;
}

std::string to_string(SortnetVariant v) {
  return v == SortnetVariant::kGrid ? "grid" : "chain";
}

SortnetVariant sortnet_variant_from_string(const std::string& s) {
  if (s == "grid") return SortnetVariant::kGrid;
  if (s == "chain") return SortnetVariant::kChain;
  throw std::invalid_argument("unknown sorting-network variant: " + s);
}

namespace {

// Phases needed for one full odd-even transposition pass over a line.
int pass_length(int len) { return len >= 2 ? len : 0; }

// Cell ids in boustrophedon order: row 0 left to right, row 1 right to
// left, and so on. Consecutive cells are always grid-adjacent.
std::vector<int> snake_order(int rows, int cols) {
  std::vector<int> order;
  order.reserve(static_cast<size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    if (i % 2 == 0)
      for (int j = 0; j < cols; ++j) order.push_back(i * cols + j);
    else
      for (int j = cols - 1; j >= 0; --j) order.push_back(i * cols + j);
  }
  return order;
}

// Destination cell per qubit for one circuit layer: the k-th pending pair
// goes to slot cells (2k, 2k+1) — plain row-major when the row length is
// even (slot pairs then share a row), boustrophedon otherwise — oriented
// to minimize total current distance; everyone else fills the remaining
// cells in index order.
std::vector<int> assign_destinations(
    const InteractionGraph& g, const RoutingState& s,
    const std::vector<std::pair<int, int>>& pairs) {
  const int n = g.vertex_count();
  std::vector<int> slot_cells;
  if (g.grid_cols() % 2 == 0) {
    slot_cells.resize(static_cast<size_t>(n));
    std::iota(slot_cells.begin(), slot_cells.end(), 0);
  } else {
    slot_cells = snake_order(g.grid_rows(), g.grid_cols());
  }

  std::vector<int> dest(static_cast<size_t>(n), -1);
  std::vector<char> cell_used(static_cast<size_t>(n), 0);
  for (size_t k = 0; k < pairs.size(); ++k) {
    auto [a, b] = pairs[k];
    const int u = slot_cells[2 * k], v = slot_cells[2 * k + 1];
    const int straight = g.distance(s.vertex_of_qubit[a], u) +
                         g.distance(s.vertex_of_qubit[b], v);
    const int crossed = g.distance(s.vertex_of_qubit[a], v) +
                        g.distance(s.vertex_of_qubit[b], u);
    if (crossed < straight) {
      dest[a] = v;
      dest[b] = u;
    } else {  // ties keep the lower qubit on the earlier slot
      dest[a] = u;
      dest[b] = v;
    }
    cell_used[u] = cell_used[v] = 1;
  }
  int cell = 0;
  for (int q = 0; q < n; ++q) {
    if (dest[q] != -1) continue;
    while (cell_used[cell]) ++cell;
    dest[q] = cell;
    cell_used[cell] = 1;
  }
  return dest;
}

// Edge-colors the regular bipartite multigraph with one edge per qubit
// (its current line -> its destination line) using `degree` colors, so
// each color class is a perfect matching between lines. The color is the
// qubit's intermediate line: sorting every line by color then never sends
// two qubits of one color to the same place.
std::vector<int> color_line_transfer(const std::vector<int>& from_line,
                                     const std::vector<int>& to_line,
                                     int line_count, int degree) {
  const int n = static_cast<int>(from_line.size());
  std::vector<int> color(static_cast<size_t>(n), -1);
  std::vector<std::vector<int>> at_left(static_cast<size_t>(line_count));
  for (int e = 0; e < n; ++e) at_left[from_line[e]].push_back(e);

  std::vector<int> match_right(static_cast<size_t>(line_count), -1);
  std::vector<char> visited(static_cast<size_t>(line_count), 0);
  std::function<bool(int)> augment = [&](int left) -> bool {
    for (int e : at_left[left]) {
      if (color[e] != -1) continue;
      const int right = to_line[e];
      if (visited[right]) continue;
      visited[right] = 1;
      if (match_right[right] == -1 ||
          augment(from_line[match_right[right]])) {
        match_right[right] = e;
        return true;
      }
    }
    return false;
  };

  for (int k = 0; k < degree; ++k) {
    std::fill(match_right.begin(), match_right.end(), -1);
    for (int left = 0; left < line_count; ++left) {
      std::fill(visited.begin(), visited.end(), 0);
      if (!augment(left))
        throw std::runtime_error(
            "line-transfer coloring failed; occupancy is not a permutation");
    }
    for (int right = 0; right < line_count; ++right) color[match_right[right]] = k;
  }
  return color;
}

// One full odd-even transposition pass over parallel lines: each phase
// compares consecutive cells (even offsets first), swapping whenever the
// occupants' keys are out of order. Every phase is appended to the plan,
// empty or not — the schedule is fixed — and applied to the simulation.
void emit_pass(const RoutingEnv& env,
               const std::vector<std::vector<int>>& lines,
               const std::vector<int>& key, int phases, RoutingState& sim,
               std::vector<SwapLayer>& plan) {
  const InteractionGraph& g = env.graph();
  RoutingState tmp;
  StepOutcome outcome;
  for (int phase = 0; phase < phases; ++phase) {
    SwapLayer layer;
    for (const auto& line : lines) {
      for (size_t i = static_cast<size_t>(phase % 2); i + 1 < line.size();
           i += 2) {
        const int u = line[i], v = line[i + 1];
        if (key[sim.qubit_at_vertex[u]] > key[sim.qubit_at_vertex[v]])
          layer.swaps.push_back(g.edge_between(u, v));
      }
    }
    std::sort(layer.swaps.begin(), layer.swaps.end());
    env.step_into(sim, layer, tmp, outcome);
    sim = tmp;
    plan.push_back(std::move(layer));
  }
}

}  // namespace

int sorting_network_constant(const InteractionGraph& g, SortnetVariant v) {
  if (!g.is_grid())
    throw std::invalid_argument("sorting-network baseline requires a grid graph");
  const int r = g.grid_rows(), c = g.grid_cols();
  if (v == SortnetVariant::kChain) return pass_length(r * c);
  return std::min(2 * pass_length(r) + pass_length(c),
                  2 * pass_length(c) + pass_length(r));
}

std::vector<SwapLayer> sorting_network_route(const RoutingState& s,
                                             const RoutingEnv& env,
                                             SortnetVariant variant,
                                             LayeringMode mode) {
  const InteractionGraph& g = env.graph();
  if (!g.is_grid())
    throw std::invalid_argument("sorting-network baseline requires a grid graph");
  const int rows = g.grid_rows(), cols = g.grid_cols(), n = g.vertex_count();

  std::vector<std::vector<int>> col_lines(static_cast<size_t>(cols));
  std::vector<std::vector<int>> row_lines(static_cast<size_t>(rows));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      col_lines[j].push_back(i * cols + j);
      row_lines[i].push_back(i * cols + j);
    }
  const std::vector<std::vector<int>> snake_line{snake_order(rows, cols)};
  std::vector<int> snake_pos(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) snake_pos[snake_line[0][p]] = p;

  const LayeredCircuit layered = greedy_layering(env.circuit(), mode);
  std::vector<SwapLayer> plan;
  RoutingState sim = s;
  std::vector<int> key(static_cast<size_t>(n));

  for (int li = 0; li < layered.layer_count(); ++li) {
    // Interactions fired while routing earlier layers need no schedule.
    std::vector<std::pair<int, int>> pending;
    for (size_t k = 0; k < layered.layers[li].size(); ++k)
      if (!env.interaction_fired(sim, layered.indices[li][k]))
        pending.push_back(layered.layers[li][k]);
    if (pending.empty()) continue;

    const std::vector<int> dest = assign_destinations(g, sim, pending);

    if (variant == SortnetVariant::kChain) {
      for (int q = 0; q < n; ++q) key[q] = snake_pos[dest[q]];
      emit_pass(env, snake_line, key, pass_length(n), sim, plan);
    } else if (2 * pass_length(rows) + pass_length(cols) <=
               2 * pass_length(cols) + pass_length(rows)) {
      // Columns to an intermediate row, rows to the destination column,
      // columns to the destination row.
      std::vector<int> from(static_cast<size_t>(n)), to(static_cast<size_t>(n));
      for (int q = 0; q < n; ++q) {
        from[q] = sim.vertex_of_qubit[q] % cols;
        to[q] = dest[q] % cols;
      }
      const std::vector<int> mid = color_line_transfer(from, to, cols, rows);
      emit_pass(env, col_lines, mid, pass_length(rows), sim, plan);
      for (int q = 0; q < n; ++q) key[q] = dest[q] % cols;
      emit_pass(env, row_lines, key, pass_length(cols), sim, plan);
      for (int q = 0; q < n; ++q) key[q] = dest[q] / cols;
      emit_pass(env, col_lines, key, pass_length(rows), sim, plan);
    } else {
      // Transposed direction: cheaper when the grid is wider than tall.
      std::vector<int> from(static_cast<size_t>(n)), to(static_cast<size_t>(n));
      for (int q = 0; q < n; ++q) {
        from[q] = sim.vertex_of_qubit[q] / cols;
        to[q] = dest[q] / cols;
      }
      const std::vector<int> mid = color_line_transfer(from, to, rows, cols);
      emit_pass(env, row_lines, mid, pass_length(cols), sim, plan);
      for (int q = 0; q < n; ++q) key[q] = dest[q] / cols;
      emit_pass(env, col_lines, key, pass_length(rows), sim, plan);
      for (int q = 0; q < n; ++q) key[q] = dest[q] % cols;
      emit_pass(env, row_lines, key, pass_length(cols), sim, plan);
    }

    for (int q = 0; q < n; ++q)
      if (sim.vertex_of_qubit[q] != dest[q])
        throw std::runtime_error(
            "sorting-network schedule failed to reach its destination "
            "permutation");
  }
  return plan;
}

void Policy::begin_episode(const RoutingEnv&, const RoutingState&) {}

bool Policy::done_acting(const RoutingEnv& env, const RoutingState& s) const {
  return env.done(s);
}

SwapLayer RandomPolicy::act(const RoutingEnv& env, const RoutingState& s,
                            Rng& rng) {
  return select_action_random(s, env.graph(), rng);
}

RlPolicy::RlPolicy(QNetwork net, AnnealSchedule sched, bool forced_swaps)
    : net_(std::move(net)), sched_(sched), forced_(forced_swaps) {
  sched_.validate();
}

std::string RlPolicy::name() const { return "rl"; }

SwapLayer RlPolicy::act(const RoutingEnv& env, const RoutingState& s,
                        Rng& rng) {
  return select_action_rl(s, net_, env, sched_, forced_, rng);
}

SortingNetworkPolicy::SortingNetworkPolicy(SortnetVariant variant,
                                           LayeringMode mode)
    : variant_(variant), mode_(mode) {}

std::string SortingNetworkPolicy::name() const {
  return "sortnet-" + to_string(variant_);
}

void SortingNetworkPolicy::begin_episode(const RoutingEnv& env,
                                         const RoutingState& s) {
  plan_ = sorting_network_route(s, env, variant_, mode_);
  next_ = 0;
}

SwapLayer SortingNetworkPolicy::act(const RoutingEnv&, const RoutingState&,
                                    Rng&) {
  if (next_ >= plan_.size())
    throw std::runtime_error(
        "sorting-network plan exhausted before the circuit completed");
  return plan_[next_++];
}

bool SortingNetworkPolicy::done_acting(const RoutingEnv&,
                                       const RoutingState&) const {
  return next_ >= plan_.size();
}

}  // namespace qroute
