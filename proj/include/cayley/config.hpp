#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cayley/group.hpp"

namespace cayley {

/// Flat `key = value` settings. '#' starts a comment; later assignments of
/// the same key win, so command-line overrides are plain set() calls.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  /// Throws UsageError naming the first unknown key and listing `valid`.
  void require_known(const std::vector<std::string>& valid) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  /// Throws UsageError when absent.
  long long require_int(const std::string& key) const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Which graph to build; shared by every command.
struct SpecOptions {
  Family family = Family::kSl2p;
  int p = 0;
  std::optional<std::filesystem::path> generator_file;
  std::optional<std::filesystem::path> goal_file;
  /// Order n for the built-in cyclic group (generic-perm without a file).
  int cyclic_n = 0;
};

/// Reads the keys `spec`, `p`, `generators`, `goals`, `n`.
SpecOptions spec_options_from(const KeyValueConfig& config);
GraphSpecPtr make_spec(const SpecOptions& options);
std::vector<std::string> spec_keys();

}  // namespace cayley
