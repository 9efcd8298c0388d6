#include "bitefuse/manifest.hpp"

#include <json.hpp>

#include "bitefuse/io.hpp"

namespace bitefuse {

std::uint64_t content_hash(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["tool"] = "bitefuse";
  doc["version"] = kVersion;
  doc["subcommand"] = subcommand;
  doc["config"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config) doc["config"][key] = value;
  doc["inputs"] = nlohmann::ordered_json::array();
  for (const std::filesystem::path& p : inputs) {
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(content_hash(p)));
    doc["inputs"].push_back({{"path", p.string()}, {"fnv1a64", hex}});
  }
  doc["runtime_seconds"] = runtime_seconds;
  return doc.dump(2) + "\n";
}

}  // namespace bitefuse
