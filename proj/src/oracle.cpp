#include <array>
#include <fstream>

#include "cayley/error.hpp"
#include "cayley/oracle.hpp"

namespace cayley {
namespace {

constexpr std::array<char, 4> kMagic = {'C', 'D', 'D', 'T'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

DistanceTable::DistanceTable(std::string label, std::vector<std::uint8_t> distances)
    : label_(std::move(label)), distances_(std::move(distances)) {
  double sum = 0.0;
  for (auto d : distances_) {
    if (d == kUnreached) continue;
    ++count_;
    sum += d;
    diameter_ = std::max<int>(diameter_, d);
    if (histogram_.size() <= d) histogram_.resize(d + 1u, 0);
    ++histogram_[d];
  }
  mean_ = count_ ? sum / static_cast<double>(count_) : 0.0;
}

int DistanceTable::distance(const GraphSpec& spec, const State& x) const {
  const auto r = spec.rank(x);
  if (r >= distances_.size() || distances_[r] == kUnreached) {
    throw DomainError("state " + to_string(x) + " is not connected to the goal set");
  }
  return distances_[r];
}

DistanceTable bfs_distances(const GraphSpec& spec, std::uint64_t max_states) {
  const auto space = spec.rank_space_size();
  if (!space) throw DomainError(spec.label() + " has no dense state rank; BFS oracle unavailable");
  if (*space > max_states) {
    throw ResourceError(spec.label() + ": rank space of " + std::to_string(*space) +
                        " states exceeds the oracle budget of " + std::to_string(max_states));
  }
  std::vector<std::uint8_t> dist(static_cast<std::size_t>(*space), DistanceTable::kUnreached);
  std::vector<std::uint64_t> frontier, next;
  for (const auto& g : spec.goals()) {
    const auto r = spec.rank(g);
    if (dist[r] != 0) {
      dist[r] = 0;
      frontier.push_back(r);
    }
  }
  const auto n = static_cast<Move>(spec.num_generators());
  State x, y;
  for (int d = 1; !frontier.empty(); ++d) {
    if (d >= DistanceTable::kUnreached) {
      throw ResourceError(spec.label() + ": distances beyond 254 do not fit the table; completed layer " +
                          std::to_string(d - 1));
    }
    next.clear();
    for (auto r : frontier) {
      x = spec.unrank(r);
      for (Move a = 0; a < n; ++a) {
        spec.apply_into(x, a, y);
        const auto s = spec.rank(y);
        if (dist[s] == DistanceTable::kUnreached) {
          dist[s] = static_cast<std::uint8_t>(d);
          next.push_back(s);
        }
      }
    }
    std::swap(frontier, next);
  }
  return DistanceTable(spec.label(), std::move(dist));
}

void save_distance_table(const std::filesystem::path& path, const DistanceTable& table) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write " + tmp.string());
    out.write(kMagic.data(), kMagic.size());
    const auto version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    const auto len = static_cast<std::uint16_t>(table.label().size());
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(table.label().data(), len);
    const std::uint64_t size = table.rank_space();
    out.write(reinterpret_cast<const char*>(&size), sizeof size);
    out.write(reinterpret_cast<const char*>(table.raw().data()), static_cast<std::streamsize>(size));
    if (!out) throw ResourceError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

DistanceTable load_distance_table(const std::filesystem::path& path) {
  const auto name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open distance table " + name);
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError(name + ": bad magic (not a CDDT distance table)");
  std::uint16_t version = 0, len = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in || version != kVersion) throw FormatError(name + ": unsupported version");
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  std::string label(len, '\0');
  in.read(label.data(), len);
  std::uint64_t size = 0;
  in.read(reinterpret_cast<char*>(&size), sizeof size);
  if (!in) throw FormatError(name + ": truncated header");
  const auto file_size = std::filesystem::file_size(path);
  const auto header = 4u + 2u + 2u + len + 8u;
  if (file_size != header + size) throw FormatError(name + ": payload size does not match header");
  std::vector<std::uint8_t> dist(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(dist.data()), static_cast<std::streamsize>(size));
  if (!in) throw FormatError(name + ": truncated payload");
  return DistanceTable(std::move(label), std::move(dist));
}

}  // namespace cayley
