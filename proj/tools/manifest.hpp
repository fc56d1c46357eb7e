#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace cayley::cli {

/// Git blob hash (SHA-1 over "blob <size>\0" + contents), lowercase hex.
std::string git_blob_hash(const std::filesystem::path& path);

std::string iso_timestamp(std::chrono::system_clock::time_point t);

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  std::vector<std::filesystem::path> artifacts;
  std::filesystem::path checkpoint;  ///< empty when no checkpoint was used

  /// Writes `<artifact>.manifest.json` next to the first artifact.
  std::filesystem::path write() const;
};

}  // namespace cayley::cli
