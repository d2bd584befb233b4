#include "qroute/circuit.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qroute {

Circuit random_circuit(int qubit_count, int interaction_count, uint64_t seed) {
  if (qubit_count < 2) {
    throw std::invalid_argument("random_circuit: need at least 2 qubits");
  }
  if (interaction_count < 0) {
    throw std::invalid_argument("random_circuit: negative interaction count");
  }
  Rng rng(seed);
  Circuit c;
  c.qubit_count = qubit_count;
  c.interactions.reserve(interaction_count);
  for (int i = 0; i < interaction_count; ++i) {
    int a = rng.uniform_int(0, qubit_count - 1);
    int b = rng.uniform_int(0, qubit_count - 2);
    if (b >= a) ++b;
    c.interactions.emplace_back(std::min(a, b), std::max(a, b));
  }
  return c;
}

Circuit full_single_layer(int qubit_count, uint64_t seed) {
  if (qubit_count < 2 || qubit_count % 2 != 0) {
    throw std::invalid_argument(
        "full_single_layer: qubit count must be even and >= 2");
  }
  Rng rng(seed);
  std::vector<int> perm(qubit_count);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Circuit c;
  c.qubit_count = qubit_count;
  for (int k = 0; k < qubit_count / 2; ++k) {
    int a = perm[2 * k], b = perm[2 * k + 1];
    c.interactions.emplace_back(std::min(a, b), std::max(a, b));
  }
  return c;
}

LayeredCircuit greedy_layering(const Circuit& c, LayeringMode mode) {
  LayeredCircuit out;
  if (mode == LayeringMode::kSequential) {
    std::vector<char> busy(c.qubit_count, 0);
    std::vector<std::pair<int, int>> current;
    std::vector<int> current_idx;
    for (int i = 0; i < c.interaction_count(); ++i) {
      auto [a, b] = c.interactions[i];
      if (busy[a] || busy[b]) {
        out.layers.push_back(std::move(current));
        out.indices.push_back(std::move(current_idx));
        current.clear();
        current_idx.clear();
        std::fill(busy.begin(), busy.end(), 0);
      }
      busy[a] = busy[b] = 1;
      current.emplace_back(a, b);
      current_idx.push_back(i);
    }
    if (!current.empty()) {
      out.layers.push_back(std::move(current));
      out.indices.push_back(std::move(current_idx));
    }
  } else {
    std::vector<int> avail(c.qubit_count, 0);
    for (int i = 0; i < c.interaction_count(); ++i) {
      auto [a, b] = c.interactions[i];
      int layer = std::max(avail[a], avail[b]);
      if (layer >= out.layer_count()) {
        out.layers.emplace_back();
        out.indices.emplace_back();
      }
      out.layers[layer].emplace_back(a, b);
      out.indices[layer].push_back(i);
      avail[a] = avail[b] = layer + 1;
    }
  }
  return out;
}

std::vector<std::pair<int, int>> LayeredCircuit::flatten() const {
  std::vector<std::pair<int, int>> flat;
  for (const auto& layer : layers) {
    flat.insert(flat.end(), layer.begin(), layer.end());
  }
  return flat;
}

Circuit Circuit::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open circuit file: " + path);
  std::string line;
  int line_no = 0;
  Circuit c;
  c.qubit_count = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ls(line);
    if (c.qubit_count < 0) {
      if (!(ls >> c.qubit_count) || c.qubit_count < 1) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected qubit count");
      }
    } else {
      int a, b;
      if (!(ls >> a >> b)) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected interaction `<a> <b>`");
      }
      if (a == b || a < 0 || b < 0 || a >= c.qubit_count ||
          b >= c.qubit_count) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": invalid qubit pair");
      }
      c.interactions.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  if (c.qubit_count < 0) throw std::runtime_error(path + ": empty circuit file");
  return c;
}

void Circuit::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write circuit file: " + path);
  out << qubit_count << "\n";
  for (auto [a, b] : interactions) out << a << " " << b << "\n";
}

}  // namespace qroute
