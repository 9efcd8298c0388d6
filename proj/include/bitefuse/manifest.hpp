#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bitefuse {

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a over file bytes; cheap integrity echo for run manifests.
std::uint64_t content_hash(const std::filesystem::path& path);

struct RunManifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> config;  // flag -> resolved value
  std::vector<std::filesystem::path> inputs;
  double runtime_seconds = 0.0;

  std::string to_json() const;  // hashes inputs at render time
};

}  // namespace bitefuse
