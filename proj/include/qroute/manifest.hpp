#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qroute {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over a byte string, and its fixed-width hex rendering.
uint64_t fnv1a(std::string_view bytes);
std::string hash_hex(uint64_t h);
// Hash of a file's contents; throws when the file cannot be read.
uint64_t hash_file(const std::string& path);

// Provenance record written next to every produced artifact. Contains no
// timestamps: identical runs produce byte-identical manifests.
struct RunManifest {
  std::string subcommand;
  std::string config_json;  // resolved configuration, serialized
  uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> input_hashes;
  std::vector<std::string> outputs;
  std::string tool_version = kToolVersion;

  std::string to_json() const;
  void save(const std::string& path) const;
};

// The comment + header lines opening every CSV this tool writes.
std::string csv_preamble(const std::string& manifest_path,
                         const std::string& header);

}  // namespace qroute
