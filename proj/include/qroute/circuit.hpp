#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qroute/rng.hpp"

namespace qroute {

// A circuit is an ordered list of two-qubit interactions (program order).
// Gate kinds are not modelled; interactions are symmetric bookkeeping
// events and single-qubit gates need no routing.
struct Circuit {
  int qubit_count = 0;
  std::vector<std::pair<int, int>> interactions;  // normalised a < b

  int interaction_count() const { return static_cast<int>(interactions.size()); }

  // Plain-text format: first line `<qubit_count>`, then one `<a> <b>`
  // interaction per line in program order.
  static Circuit load(const std::string& path);
  void save(const std::string& path) const;
};

// `interaction_count` pairs drawn uniformly (with replacement) from all
// unordered distinct-qubit pairs.
Circuit random_circuit(int qubit_count, int interaction_count, uint64_t seed);

// A uniformly random perfect pairing of all qubits: qubit_count/2 disjoint
// interactions forming a single layer.
Circuit full_single_layer(int qubit_count, uint64_t seed);

enum class LayeringMode {
  // Close the current layer on the first interaction that conflicts with it;
  // no lookahead.
  kSequential,
  // Place each interaction in the earliest layer where both its qubits are
  // free and their per-qubit predecessors are already placed.
  kBackFill,
};

struct LayeredCircuit {
  std::vector<std::vector<std::pair<int, int>>> layers;
  // Parallel structure: position of each layered interaction in the source
  // circuit's interaction list.
  std::vector<std::vector<int>> indices;

  int layer_count() const { return static_cast<int>(layers.size()); }
  // Concatenates layers back into a flat interaction sequence.
  std::vector<std::pair<int, int>> flatten() const;
};

LayeredCircuit greedy_layering(const Circuit& c,
                               LayeringMode mode = LayeringMode::kSequential);

}  // namespace qroute
