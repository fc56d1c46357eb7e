#include "cayley/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>

#include "cayley/error.hpp"

namespace cayley {
namespace {

template <typename T>
std::optional<T> parse_number(const std::string& s) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& source) {
  KeyValueConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto key = boost::algorithm::trim_copy(line.substr(0, eq));
    auto value = boost::algorithm::trim_copy(line.substr(eq + 1));
    if (key.empty()) throw UsageError(source + ":" + std::to_string(lineno) + ": empty key");
    cfg.entries_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void KeyValueConfig::require_known(const std::vector<std::string>& valid) const {
  for (const auto& [key, value] : entries_) {
    if (std::find(valid.begin(), valid.end(), key) != valid.end()) continue;
    std::string list;
    for (const auto& k : valid) list += (list.empty() ? "" : ", ") + k;
    throw UsageError("unknown config key '" + key + "'; valid keys: " + list);
  }
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  auto n = parse_number<long long>(*v);
  if (!n) throw UsageError("config key '" + key + "' expects an integer, got '" + *v + "'");
  return *n;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  auto n = parse_number<double>(*v);
  if (!n) throw UsageError("config key '" + key + "' expects a number, got '" + *v + "'");
  return *n;
}

long long KeyValueConfig::require_int(const std::string& key) const {
  if (!contains(key)) throw UsageError("missing required config key '" + key + "'");
  return get_int(key, 0);
}

std::vector<std::string> spec_keys() { return {"spec", "p", "generators", "goals", "n"}; }

SpecOptions spec_options_from(const KeyValueConfig& config) {
  SpecOptions o;
  o.family = parse_family(config.get_string("spec", "sl2p"));
  o.p = static_cast<int>(config.get_int("p", 0));
  o.cyclic_n = static_cast<int>(config.get_int("n", 0));
  if (auto g = config.get("generators")) o.generator_file = *g;
  if (auto g = config.get("goals")) o.goal_file = *g;
  return o;
}

GraphSpecPtr make_spec(const SpecOptions& o) {
  std::vector<State> goals;
  if (o.goal_file && o.family != Family::kGenericPerm) goals = read_goal_file(*o.goal_file);
  switch (o.family) {
    case Family::kSl2p:
      if (o.p < 2) throw UsageError("sl2p needs a prime p >= 2 (key 'p')");
      return make_sl2p(o.p, std::move(goals));
    case Family::kCube3:
      return make_cube3(std::move(goals));
    case Family::kCube2:
      return make_cube2(std::move(goals));
    case Family::kGenericPerm:
      if (o.generator_file) return load_permutation_group(*o.generator_file, o.goal_file);
      if (o.cyclic_n >= 2) return make_cyclic(o.cyclic_n);
      throw UsageError("generic-perm needs a generator file (key 'generators') or a cyclic order 'n'");
  }
  throw UsageError("unsupported family");
}

}  // namespace cayley
