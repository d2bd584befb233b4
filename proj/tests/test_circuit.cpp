#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qroute/circuit.hpp"

using namespace qroute;

namespace {

// Each qubit's sequence of interaction partners, in list order. Layering
// may permute the flat list but must preserve these sequences.
std::map<int, std::vector<int>> per_qubit_order(
    const std::vector<std::pair<int, int>>& interactions) {
  std::map<int, std::vector<int>> order;
  for (const auto& [a, b] : interactions) {
    order[a].push_back(b);
    order[b].push_back(a);
  }
  return order;
}

}  // namespace

TEST_CASE("random_circuit: counts, normalisation, determinism") {
  const Circuit c = random_circuit(16, 16, 42);
  CHECK(c.qubit_count == 16);
  CHECK(c.interaction_count() == 16);
  for (const auto& [a, b] : c.interactions) {
    CHECK(a >= 0);
    CHECK(a < b);
    CHECK(b < 16);
  }
  CHECK(random_circuit(16, 16, 42).interactions == c.interactions);
  CHECK(random_circuit(16, 16, 43).interactions != c.interactions);
  CHECK_THROWS_AS(random_circuit(1, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(random_circuit(4, -1, 0), std::invalid_argument);
}

TEST_CASE("random_circuit covers the pair space") {
  std::set<std::pair<int, int>> seen;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    const Circuit c = random_circuit(4, 10, seed);
    seen.insert(c.interactions.begin(), c.interactions.end());
  }
  CHECK(seen.size() == 6);  // all C(4,2) unordered pairs
}

TEST_CASE("full_single_layer pairs every qubit exactly once") {
  const Circuit c = full_single_layer(16, 7);
  CHECK(c.qubit_count == 16);
  CHECK(c.interaction_count() == 8);
  std::set<int> used;
  for (const auto& [a, b] : c.interactions) {
    CHECK(a < b);
    CHECK(used.insert(a).second);
    CHECK(used.insert(b).second);
  }
  CHECK(used.size() == 16);
  CHECK(full_single_layer(16, 7).interactions == c.interactions);
  CHECK(full_single_layer(16, 8).interactions != c.interactions);
  CHECK_THROWS_AS(full_single_layer(5, 0), std::invalid_argument);
}

TEST_CASE("single-layer pairings vary across seeds") {
  std::set<std::vector<std::pair<int, int>>> pairings;
  for (uint64_t seed = 0; seed < 50; ++seed)
    pairings.insert(full_single_layer(6, seed).interactions);
  CHECK(pairings.size() > 10);  // 15 distinct pairings exist for 6 qubits
}

TEST_CASE("save and load round-trip") {
  const Circuit c = random_circuit(8, 12, 3);
  const std::string path = "/tmp/qroute_test_circuit.txt";
  c.save(path);
  const Circuit d = Circuit::load(path);
  CHECK(d.qubit_count == c.qubit_count);
  CHECK(d.interactions == c.interactions);
  std::remove(path.c_str());
  CHECK_THROWS_AS(Circuit::load("/nonexistent/circuit.txt"),
                  std::runtime_error);
}

TEST_CASE("sequential layering closes a layer at the first conflict") {
  Circuit c;
  c.qubit_count = 6;
  c.interactions = {{0, 1}, {2, 3}, {0, 2}, {4, 5}};
  const LayeredCircuit lc = greedy_layering(c, LayeringMode::kSequential);
  REQUIRE(lc.layer_count() == 2);
  CHECK(lc.layers[0] ==
        std::vector<std::pair<int, int>>{{0, 1}, {2, 3}});
  CHECK(lc.layers[1] ==
        std::vector<std::pair<int, int>>{{0, 2}, {4, 5}});
  // Sequential never reorders: flattening reproduces program order.
  CHECK(lc.flatten() == c.interactions);
  CHECK(lc.indices[0] == std::vector<int>{0, 1});
  CHECK(lc.indices[1] == std::vector<int>{2, 3});
}

TEST_CASE("backfill layering pulls independent work forward") {
  Circuit c;
  c.qubit_count = 6;
  c.interactions = {{0, 1}, {2, 3}, {0, 2}, {4, 5}};
  const LayeredCircuit lc = greedy_layering(c, LayeringMode::kBackFill);
  REQUIRE(lc.layer_count() == 2);
  // (4,5) has no earlier work on its qubits, so it joins the first layer.
  CHECK(lc.layers[0] ==
        std::vector<std::pair<int, int>>{{0, 1}, {2, 3}, {4, 5}});
  CHECK(lc.layers[1] == std::vector<std::pair<int, int>>{{0, 2}});
  CHECK(lc.indices[0] == std::vector<int>{0, 1, 3});
  CHECK(lc.indices[1] == std::vector<int>{2});
}

TEST_CASE("backfill respects per-qubit program order") {
  Circuit c;
  c.qubit_count = 4;
  // (1,2) must stay after (0,1) even though slot 0 has room for it.
  c.interactions = {{0, 1}, {0, 2}, {1, 2}, {2, 3}};
  const LayeredCircuit lc = greedy_layering(c, LayeringMode::kBackFill);
  std::map<int, int> layer_of;  // interaction index -> layer
  for (int l = 0; l < lc.layer_count(); ++l)
    for (int idx : lc.indices[l]) layer_of[idx] = l;
  CHECK(layer_of[1] > layer_of[0]);  // (0,2) after (0,1): share qubit 0
  CHECK(layer_of[2] > layer_of[1]);  // (1,2) after (0,2): share qubit 2
}

TEST_CASE("layering invariants hold on random circuits") {
  for (uint64_t seed = 0; seed < 25; ++seed) {
    const Circuit c = random_circuit(16, 16, seed);
    for (const LayeringMode mode :
         {LayeringMode::kSequential, LayeringMode::kBackFill}) {
      const LayeredCircuit lc = greedy_layering(c, mode);
      REQUIRE(lc.layers.size() == lc.indices.size());

      // Each layer touches each qubit at most once; indices match pairs.
      std::vector<int> placed;
      for (int l = 0; l < lc.layer_count(); ++l) {
        REQUIRE(lc.layers[l].size() == lc.indices[l].size());
        std::set<int> qubits;
        for (size_t j = 0; j < lc.layers[l].size(); ++j) {
          CHECK(c.interactions[lc.indices[l][j]] == lc.layers[l][j]);
          CHECK(qubits.insert(lc.layers[l][j].first).second);
          CHECK(qubits.insert(lc.layers[l][j].second).second);
          placed.push_back(lc.indices[l][j]);
        }
      }

      // Every interaction is placed exactly once.
      std::set<int> unique(placed.begin(), placed.end());
      CHECK(unique.size() == c.interactions.size());
      CHECK(placed.size() == c.interactions.size());

      // Flattening preserves each qubit's interaction order.
      CHECK(per_qubit_order(lc.flatten()) ==
            per_qubit_order(c.interactions));
    }
  }
}

TEST_CASE("empty circuit layers to nothing") {
  Circuit c;
  c.qubit_count = 4;
  const LayeredCircuit lc = greedy_layering(c);
  CHECK(lc.layer_count() == 0);
  CHECK(lc.flatten().empty());
}
