#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cayley/error.hpp"
#include "cayley/group.hpp"

namespace cayley {
namespace {

class PermutationGraph final : public GraphSpec {
 public:
  PermutationGraph(std::string label, int degree, GeneratorSet gens,
                   std::vector<std::vector<State::value_type>> images, std::vector<State> goals)
      : GraphSpec(Family::kGenericPerm, std::move(label), std::move(gens),
                  static_cast<std::size_t>(degree),
                  static_cast<std::size_t>(degree) * static_cast<std::size_t>(degree)),
        degree_(degree),
        images_(std::move(images)) {
    set_goals(std::move(goals));
  }

  State identity() const override {
    State x(static_cast<std::size_t>(degree_));
    std::iota(x.begin(), x.end(), State::value_type{0});
    return x;
  }

  bool is_valid(const State& x) const override {
    if (x.size() != static_cast<std::size_t>(degree_)) return false;
    std::vector<char> seen(x.size(), 0);
    for (auto v : x) {
      if (v >= x.size() || seen[v]) return false;
      seen[v] = 1;
    }
    return true;
  }

  void apply_into(const State& x, Move a, State& out) const override {
    const auto& g = images_[static_cast<std::size_t>(a)];
    out.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[g[i]] = x[i];
  }

  void encode_features_into(const State& x, std::span<float> out) const override {
    std::fill(out.begin(), out.end(), 0.0f);
    const auto n = static_cast<std::size_t>(degree_);
    for (std::size_t pos = 0; pos < n; ++pos) out[x[pos] * n + pos] = 1.0f;
  }

  std::optional<std::uint64_t> rank_space_size() const override {
    if (degree_ > 20) return std::nullopt;
    std::uint64_t f = 1;
    for (int i = 2; i <= degree_; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
  }

  std::uint64_t rank(const State& x) const override {
    if (degree_ > 20) return GraphSpec::rank(x);
    std::uint64_t r = 0;
    const auto n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t smaller = 0;
      for (std::size_t j = i + 1; j < n; ++j) smaller += x[j] < x[i];
      r = r * (n - i) + smaller;
    }
    return r;
  }

  State unrank(std::uint64_t r) const override {
    if (degree_ > 20) return GraphSpec::unrank(r);
    const auto n = static_cast<std::size_t>(degree_);
    std::vector<std::uint64_t> digits(n);
    for (std::size_t i = n; i-- > 0;) {
      digits[i] = r % (n - i);
      r /= (n - i);
    }
    std::vector<State::value_type> pool(n);
    std::iota(pool.begin(), pool.end(), State::value_type{0});
    State x(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = pool[digits[i]];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(digits[i]));
    }
    return x;
  }

 private:
  int degree_;
  std::vector<std::vector<State::value_type>> images_;
};

}  // namespace

GraphSpecPtr make_permutation_group(std::string label, int degree,
                                    std::vector<NamedPermutation> generators,
                                    std::vector<State> goals) {
  if (degree < 1 || degree > 65535) throw DomainError("permutation degree out of range");
  if (generators.empty()) throw DomainError("permutation group needs at least one generator");
  const auto n = static_cast<std::size_t>(degree);
  std::vector<std::vector<State::value_type>> images;
  for (const auto& g : generators) {
    if (g.image.size() != n) {
      throw FormatError("generator '" + g.name + "' has " + std::to_string(g.image.size()) +
                        " entries, expected " + std::to_string(n));
    }
    std::vector<char> seen(n, 0);
    std::vector<State::value_type> img(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int v = g.image[i];
      if (v < 0 || static_cast<std::size_t>(v) >= n || seen[static_cast<std::size_t>(v)]) {
        throw FormatError("generator '" + g.name + "' is not a permutation");
      }
      seen[static_cast<std::size_t>(v)] = 1;
      img[i] = static_cast<State::value_type>(v);
    }
    images.push_back(std::move(img));
  }
  std::vector<std::string> names;
  for (const auto& g : generators) names.push_back(g.name);

  // Pair each generator with its inverse, appending inverses that are missing.
  std::vector<Move> inverse(images.size(), -1);
  const auto inverse_of = [&](const std::vector<State::value_type>& img) {
    std::vector<State::value_type> inv(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) inv[img[i]] = static_cast<State::value_type>(i);
    return inv;
  };
  const std::size_t original = images.size();
  for (std::size_t a = 0; a < original; ++a) {
    if (inverse[a] >= 0) continue;
    const auto inv = inverse_of(images[a]);
    std::optional<std::size_t> match;
    for (std::size_t b = 0; b < images.size(); ++b) {
      if ((b == a || inverse[b] < 0) && images[b] == inv) {
        match = b;
        break;
      }
    }
    if (!match) {
      images.push_back(inv);
      names.push_back(names[a] + "'");
      inverse.push_back(-1);
      match = images.size() - 1;
    }
    inverse[a] = static_cast<Move>(*match);
    inverse[*match] = static_cast<Move>(a);
  }
  return std::make_shared<PermutationGraph>(std::move(label), degree,
                                            GeneratorSet(std::move(names), std::move(inverse)),
                                            std::move(images), std::move(goals));
}

GraphSpecPtr make_cyclic(int n) {
  if (n < 2) throw DomainError("cyclic group needs n >= 2");
  NamedPermutation plus{"+1", std::vector<int>(static_cast<std::size_t>(n))};
  NamedPermutation minus{"-1", std::vector<int>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    plus.image[static_cast<std::size_t>(i)] = (i + 1) % n;
    minus.image[static_cast<std::size_t>(i)] = (i + n - 1) % n;
  }
  std::vector<NamedPermutation> gens{plus};
  if (n > 2) gens.push_back(minus);
  return make_permutation_group("Z" + std::to_string(n), n, std::move(gens));
}

std::pair<int, std::vector<NamedPermutation>> read_generator_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open generator file " + path.string());
  std::string line;
  int degree = -1;
  std::vector<NamedPermutation> gens;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    if (degree < 0) {
      if (!(ls >> degree) || degree < 1) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected degree n");
      }
      continue;
    }
    NamedPermutation g;
    ls >> g.name;
    int v = 0;
    while (ls >> v) g.image.push_back(v);
    if (!ls.eof()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-integer entry");
    }
    if (g.image.size() != static_cast<std::size_t>(degree)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(degree) + " integers after the name");
    }
    gens.push_back(std::move(g));
  }
  if (degree < 0) throw FormatError(path.string() + ": empty generator file");
  return {degree, std::move(gens)};
}

std::vector<State> read_goal_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open goal file " + path.string());
  std::vector<State> goals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    goals.push_back(parse_state(line));
  }
  return goals;
}

GraphSpecPtr load_permutation_group(const std::filesystem::path& generator_file,
                                    const std::optional<std::filesystem::path>& goal_file) {
  auto [degree, gens] = read_generator_file(generator_file);
  std::vector<State> goals;
  if (goal_file) goals = read_goal_file(*goal_file);
  return make_permutation_group(generator_file.stem().string(), degree, std::move(gens),
                                std::move(goals));
}

}  // namespace cayley
