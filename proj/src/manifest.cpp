#include "qroute/manifest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qroute {

uint64_t fnv1a(std::string_view bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file for hashing: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a(buf.str());
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  if (config_json.empty())
    j["config"] = nullptr;
  else
    j["config"] = nlohmann::json::parse(config_json);
  j["seed"] = seed;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [path, hash] : input_hashes) inputs[path] = hash;
  j["input_hashes"] = std::move(inputs);
  j["outputs"] = outputs;
  j["tool_version"] = tool_version;
  return j.dump(2);
}

void RunManifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << to_json() << '\n';
  if (!out) throw std::runtime_error("failed writing manifest: " + path);
}

std::string csv_preamble(const std::string& manifest_path,
                         const std::string& header) {
  return "# manifest: " + manifest_path + "\n" + header + "\n";
}

}  // namespace qroute
