#include "qroute/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace qroute {

InteractionGraph InteractionGraph::grid(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("grid: rows and cols must be >= 1");
  }
  if (rows * cols < 2) {
    throw std::invalid_argument("grid: need at least 2 vertices");
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      int v = i * cols + j;
      if (j + 1 < cols) edges.emplace_back(v, v + 1);
      if (i + 1 < rows) edges.emplace_back(v, v + cols);
    }
  }
  InteractionGraph g = from_edges(rows * cols, std::move(edges));
  g.rows_ = rows;
  g.cols_ = cols;
  return g;
}

InteractionGraph InteractionGraph::from_edges(
    int vertex_count, std::vector<std::pair<int, int>> edges) {
  if (vertex_count < 2) {
    throw std::invalid_argument("graph: need at least 2 vertices");
  }
  for (auto& [u, v] : edges) {
    if (u == v) {
      throw std::invalid_argument("graph: self-loop edge at vertex " +
                                  std::to_string(u));
    }
    if (u < 0 || v < 0 || u >= vertex_count || v >= vertex_count) {
      throw std::invalid_argument("graph: edge endpoint out of range");
    }
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  InteractionGraph g;
  g.vertex_count_ = vertex_count;
  g.edges_ = std::move(edges);
  g.finalize();
  return g;
}

void InteractionGraph::finalize() {
  incident_.assign(vertex_count_, {});
  for (int e = 0; e < edge_count(); ++e) {
    incident_[edges_[e].first].push_back(e);
    incident_[edges_[e].second].push_back(e);
  }

  // BFS from every vertex; also proves connectivity.
  dist_.assign(static_cast<size_t>(vertex_count_) * vertex_count_, -1);
  for (int s = 0; s < vertex_count_; ++s) {
    int* row = &dist_[static_cast<size_t>(s) * vertex_count_];
    row[s] = 0;
    std::deque<int> frontier{s};
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop_front();
      for (int e : incident_[u]) {
        int w = edges_[e].first == u ? edges_[e].second : edges_[e].first;
        if (row[w] < 0) {
          row[w] = row[u] + 1;
          frontier.push_back(w);
        }
      }
    }
    for (int v = 0; v < vertex_count_; ++v) {
      if (row[v] < 0) {
        throw std::invalid_argument(
            "graph: disconnected, no path from vertex " + std::to_string(s) +
            " to vertex " + std::to_string(v));
      }
      diameter_ = std::max(diameter_, row[v]);
    }
  }
}

int InteractionGraph::edge_between(int u, int v) const {
  for (int e : incident_[u]) {
    if (edges_[e].first == v || edges_[e].second == v) return e;
  }
  return -1;
}

bool InteractionGraph::is_matching(const SwapLayer& layer) const {
  std::vector<char> used(vertex_count_, 0);
  for (int e : layer.swaps) {
    if (e < 0 || e >= edge_count()) return false;
    auto [u, v] = edges_[e];
    if (used[u] || used[v]) return false;
    used[u] = used[v] = 1;
  }
  return true;
}

InteractionGraph InteractionGraph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  std::string line;
  int line_no = 0;
  int vertex_count = -1;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (vertex_count < 0) {
      if (!(ls >> vertex_count) || vertex_count < 2) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected vertex count");
      }
    } else {
      int u, v;
      if (!(ls >> u >> v)) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected edge `<u> <v>`");
      }
      edges.emplace_back(u, v);
    }
  }
  if (vertex_count < 0) {
    throw std::runtime_error(path + ": empty graph file");
  }
  try {
    return from_edges(vertex_count, std::move(edges));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void InteractionGraph::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  out << vertex_count_ << "\n";
  for (auto [u, v] : edges_) out << u << " " << v << "\n";
}

namespace {

void enumerate_rec(const InteractionGraph& g, size_t edge_idx,
                   std::vector<char>& used, std::vector<int>& chosen,
                   std::vector<SwapLayer>& out) {
  if (edge_idx == static_cast<size_t>(g.edge_count())) {
    out.push_back(SwapLayer{chosen});
    return;
  }
  enumerate_rec(g, edge_idx + 1, used, chosen, out);
  auto [u, v] = g.edges()[edge_idx];
  if (!used[u] && !used[v]) {
    used[u] = used[v] = 1;
    chosen.push_back(static_cast<int>(edge_idx));
    enumerate_rec(g, edge_idx + 1, used, chosen, out);
    chosen.pop_back();
    used[u] = used[v] = 0;
  }
}

// Memoisation key: (edge index, occupancy restricted to vertices that still
// appear in a later edge). Collapsing the irrelevant bits keeps the state
// space small on path- and grid-like graphs.
long long count_rec(const InteractionGraph& g, size_t edge_idx, uint64_t used,
                    const std::vector<uint64_t>& future_mask,
                    std::unordered_map<uint64_t, long long>& memo) {
  if (edge_idx == static_cast<size_t>(g.edge_count())) return 1;
  uint64_t key = (static_cast<uint64_t>(edge_idx) << 56) |
                 (used & future_mask[edge_idx]);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  auto [u, v] = g.edges()[edge_idx];
  long long total = count_rec(g, edge_idx + 1, used, future_mask, memo);
  uint64_t bits = (1ull << u) | (1ull << v);
  if (!(used & bits)) {
    total += count_rec(g, edge_idx + 1, used | bits, future_mask, memo);
  }
  memo[key] = total;
  return total;
}

long long count_rec_plain(const InteractionGraph& g, size_t edge_idx,
                          std::vector<char>& used) {
  if (edge_idx == static_cast<size_t>(g.edge_count())) return 1;
  long long total = count_rec_plain(g, edge_idx + 1, used);
  auto [u, v] = g.edges()[edge_idx];
  if (!used[u] && !used[v]) {
    used[u] = used[v] = 1;
    total += count_rec_plain(g, edge_idx + 1, used);
    used[u] = used[v] = 0;
  }
  return total;
}

}  // namespace

std::vector<SwapLayer> enumerate_matchings(const InteractionGraph& g,
                                           bool include_empty) {
  std::vector<SwapLayer> out;
  std::vector<char> used(g.vertex_count(), 0);
  std::vector<int> chosen;
  enumerate_rec(g, 0, used, chosen, out);
  if (!include_empty) {
    std::erase_if(out, [](const SwapLayer& m) { return m.empty(); });
  }
  return out;
}

long long count_matchings(const InteractionGraph& g, bool include_empty) {
  long long total;
  if (g.vertex_count() <= 56) {
    std::vector<uint64_t> future_mask(g.edge_count() + 1, 0);
    for (int e = g.edge_count() - 1; e >= 0; --e) {
      future_mask[e] = future_mask[e + 1] | (1ull << g.edges()[e].first) |
                       (1ull << g.edges()[e].second);
    }
    std::unordered_map<uint64_t, long long> memo;
    total = count_rec(g, 0, 0, future_mask, memo);
  } else {
    std::vector<char> used(g.vertex_count(), 0);
    total = count_rec_plain(g, 0, used);
  }
  return include_empty ? total : total - 1;
}

}  // namespace qroute
