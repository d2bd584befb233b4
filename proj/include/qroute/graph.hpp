#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qroute {

// One layer of swaps: a set of pairwise vertex-disjoint edges, stored as
// sorted indices into InteractionGraph::edges(). The empty layer is a valid
// (no-op) matching.
struct SwapLayer {
  std::vector<int> swaps;

  bool empty() const { return swaps.empty(); }
  size_t size() const { return swaps.size(); }
  bool operator==(const SwapLayer& other) const = default;
};

// Hardware connectivity: undirected, connected, no self-loops or duplicate
// edges. Immutable after construction and safe to share across threads.
// Vertices double as qubit locations (one qubit per vertex).
class InteractionGraph {
 public:
  // rows x cols grid in row-major vertex order; edges are the horizontal
  // and vertical neighbour pairs.
  static InteractionGraph grid(int rows, int cols);

  // Arbitrary connected graph from an edge list. Edges are normalised
  // (u < v), deduplicated and sorted lexicographically.
  static InteractionGraph from_edges(int vertex_count,
                                     std::vector<std::pair<int, int>> edges);

  // Plain-text format: first line `<vertex_count>`, then one `<u> <v>` line
  // per edge, 0-indexed. Parse errors report the offending line number.
  static InteractionGraph load(const std::string& path);
  void save(const std::string& path) const;

  int vertex_count() const { return vertex_count_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  // Shortest-path hop count. Symmetric, zero diagonal, finite everywhere.
  int distance(int u, int v) const { return dist_[u * vertex_count_ + v]; }
  int diameter() const { return diameter_; }

  // Indices of edges incident to v.
  const std::vector<int>& edges_at(int v) const { return incident_[v]; }
  // Edge index joining u and v, or -1 when not adjacent.
  int edge_between(int u, int v) const;

  // Set when constructed via grid(); loaded/from_edges graphs report false
  // even if they happen to be grid-shaped.
  bool is_grid() const { return rows_ > 0; }
  int grid_rows() const { return rows_; }
  int grid_cols() const { return cols_; }

  bool is_matching(const SwapLayer& layer) const;

 private:
  InteractionGraph() = default;
  void finalize();  // builds incidence lists and the distance table

  int vertex_count_ = 0;
  int rows_ = 0, cols_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> incident_;
  std::vector<int> dist_;
  int diameter_ = 0;
};

// All matchings of g, each a valid SwapLayer, in deterministic order
// (lexicographic include/exclude recursion over the sorted edge list).
// Intended for small graphs; the list grows exponentially.
std::vector<SwapLayer> enumerate_matchings(const InteractionGraph& g,
                                           bool include_empty);

// Matching count without materialising the list. Memoised edge-inclusion
// recursion for graphs of up to 64 vertices, plain recursion beyond that
// (which may take a while on large dense graphs).
long long count_matchings(const InteractionGraph& g, bool include_empty);

}  // namespace qroute
