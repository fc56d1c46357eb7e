#include <array>
#include <fstream>

#include "cayley/error.hpp"
#include "cayley/search.hpp"

namespace cayley {
namespace {

constexpr std::array<char, 4> kMagic = {'C', 'D', 'B', 'T'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& name) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError(name + ": truncated ball file");
  return v;
}

}  // namespace

const BallEntry* BallTable::find(const State& x) const {
  auto it = entries_.find(x);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<Move> BallTable::path_to_goal(const GraphSpec& spec, const State& x) const {
  const auto* e = find(x);
  if (!e) throw DomainError("state is outside the ball");
  std::vector<Move> path;
  State cur = x, next;
  while (e->first_move >= 0) {
    path.push_back(e->first_move);
    spec.apply_into(cur, e->first_move, next);
    std::swap(cur, next);
    e = find(cur);
    if (!e) throw DomainError("ball table is inconsistent");
  }
  return path;
}

BallTable build_ball(const GraphSpec& spec, int radius, std::size_t max_entries) {
  if (radius < 0) throw DomainError("ball radius must be >= 0");
  if (radius > 254) throw DomainError("ball radius must be <= 254");
  std::unordered_map<State, BallEntry, StateHash> entries;
  std::vector<State> frontier(spec.goals().begin(), spec.goals().end());
  for (const auto& g : frontier) entries.emplace(g, BallEntry{0, -1});
  if (entries.size() > max_entries) {
    throw ResourceError("ball budget exceeded by the goal set alone");
  }
  const auto n = static_cast<Move>(spec.num_generators());
  State y;
  for (int d = 1; d <= radius && !frontier.empty(); ++d) {
    std::vector<State> next;
    for (const auto& x : frontier) {
      for (Move a = 0; a < n; ++a) {
        spec.apply_into(x, a, y);
        if (entries.count(y)) continue;
        if (entries.size() >= max_entries) {
          throw ResourceError("ball budget of " + std::to_string(max_entries) +
                              " states exceeded while building radius " + std::to_string(d) +
                              "; completed radius " + std::to_string(d - 1));
        }
        entries.emplace(y, BallEntry{static_cast<std::uint8_t>(d), spec.generators().inverse(a)});
        next.push_back(y);
      }
    }
    frontier = std::move(next);
  }
  return BallTable(radius, std::move(entries));
}

void save_ball(const std::filesystem::path& path, const GraphSpec& spec, const BallTable& ball) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write " + tmp.string());
    out.write(kMagic.data(), kMagic.size());
    put<std::uint16_t>(out, kVersion);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(spec.state_length()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ball.radius()));
    put<std::uint64_t>(out, ball.size());
    // Sorted so identical balls give identical files.
    std::vector<const std::pair<const State, BallEntry>*> sorted;
    sorted.reserve(ball.size());
    for (const auto& kv : ball.entries()) sorted.push_back(&kv);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->first < b->first; });
    for (const auto* kv : sorted) {
      out.write(reinterpret_cast<const char*>(kv->first.data()),
                static_cast<std::streamsize>(kv->first.size() * sizeof(State::value_type)));
      put<std::uint8_t>(out, kv->second.distance);
      put<std::int8_t>(out, static_cast<std::int8_t>(kv->second.first_move));
    }
    if (!out) throw ResourceError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

BallTable load_ball(const std::filesystem::path& path, const GraphSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  const auto name = path.string();
  if (!in) throw FormatError("cannot open ball file " + name);
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError(name + ": bad magic (not a CDBT ball table)");
  if (get<std::uint16_t>(in, name) != kVersion) throw FormatError(name + ": unsupported version");
  const auto len = get<std::uint16_t>(in, name);
  if (len != spec.state_length()) throw FormatError(name + ": state length does not match graph");
  const auto radius = get<std::uint32_t>(in, name);
  const auto count = get<std::uint64_t>(in, name);
  std::unordered_map<State, BallEntry, StateHash> entries;
  entries.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  State x(len);
  for (std::uint64_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(x.data()),
            static_cast<std::streamsize>(len * sizeof(State::value_type)));
    BallEntry e;
    e.distance = get<std::uint8_t>(in, name);
    e.first_move = get<std::int8_t>(in, name);
    if (!spec.is_valid(x) || e.distance > radius || e.first_move >= static_cast<int>(spec.num_generators())) {
      throw FormatError(name + ": corrupt entry " + std::to_string(i));
    }
    entries.emplace(x, e);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(name + ": trailing bytes");
  return BallTable(static_cast<int>(radius), std::move(entries));
}

}  // namespace cayley
