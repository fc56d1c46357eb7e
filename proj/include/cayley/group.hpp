#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cayley/state.hpp"

namespace cayley {

/// Labelled generators with an involutive inverse table. A generator may be
/// its own inverse.
class GeneratorSet {
 public:
  GeneratorSet(std::vector<std::string> names, std::vector<Move> inverse_of);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(Move a) const;
  Move inverse(Move a) const;
  std::optional<Move> find(std::string_view name) const;
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
  std::vector<Move> inverse_;
};

enum class Family { kCube3, kCube2, kSl2p, kGenericPerm };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

/// An immutable Cayley graph of a group (or group action) with a goal set.
///
/// Concrete families implement the state validity test, the right action of
/// each generator, the feature encoder and, when the state space is
/// enumerable, a perfect rank function used by dense oracle tables.
class GraphSpec {
 public:
  virtual ~GraphSpec() = default;

  Family family() const noexcept { return family_; }
  /// Human-readable instance label, e.g. "sl2p(p=31)".
  const std::string& label() const noexcept { return label_; }
  const GeneratorSet& generators() const noexcept { return generators_; }
  std::size_t num_generators() const noexcept { return generators_.size(); }
  std::span<const State> goals() const noexcept { return goals_; }
  bool is_goal(const State& x) const;
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t state_length() const noexcept { return state_length_; }

  virtual State identity() const = 0;
  virtual bool is_valid(const State& x) const = 0;
  /// Throws EncodingError naming the problem when `x` is not a valid state.
  void validate(const State& x) const;

  /// Checked neighbour x·a.
  State apply(const State& x, Move a) const;
  /// Unchecked neighbour; `out` must not alias `x`.
  virtual void apply_into(const State& x, Move a, State& out) const = 0;
  State apply_word(const State& x, std::span<const Move> word) const;

  std::vector<float> encode_features(const State& x) const;
  /// Writes exactly feature_dim() values into `out`; no validation.
  virtual void encode_features_into(const State& x, std::span<float> out) const = 0;

  /// Size of the dense rank space, when the family has a perfect rank.
  virtual std::optional<std::uint64_t> rank_space_size() const { return std::nullopt; }
  virtual std::uint64_t rank(const State& x) const;
  virtual State unrank(std::uint64_t r) const;

  /// Word w^{-1} for a word w: reversed with each generator inverted.
  std::vector<Move> inverse_word(std::span<const Move> word) const;

 protected:
  GraphSpec(Family family, std::string label, GeneratorSet generators, std::size_t state_length,
            std::size_t feature_dim);
  /// Empty `goals` means {identity()}. Validates distinctness and validity.
  void set_goals(std::vector<State> goals);

 private:
  Family family_;
  std::string label_;
  GeneratorSet generators_;
  std::size_t state_length_;
  std::size_t feature_dim_;
  std::vector<State> goals_;
  std::unordered_set<State, StateHash> goal_lookup_;
};

using GraphSpecPtr = std::shared_ptr<const GraphSpec>;

/// SL2(Z_p) with generators T+1, T-1, U+1, U-1 (in that index order), states
/// (a, b, c, d) for the matrix [[a, b], [c, d]]. Right multiplication.
GraphSpecPtr make_sl2p(int p, std::vector<State> goals = {});

/// 3x3x3 cube in the quarter-turn metric: generators U U' D D' R R' L L' F F' B B'.
/// State: 8 corner cubies, 12 edge cubies, 8 corner twists, 12 edge flips.
GraphSpecPtr make_cube3(std::vector<State> goals = {});

/// 2x2x2 cube with the DLB corner held fixed: generators U U' R R' F F'.
/// State: 8 corner cubies followed by 8 twists (slot 7 always holds cubie 7).
GraphSpecPtr make_cube2(std::vector<State> goals = {});

struct NamedPermutation {
  std::string name;
  std::vector<int> image;  ///< image[i] = where point i is sent
};

/// Cayley graph of the permutation group generated by `generators` acting on
/// {0..degree-1}. A state is the arrangement "position -> label"; applying
/// generator g moves the label at position i to position g(i). Missing
/// inverses are appended with a trailing apostrophe on the name.
GraphSpecPtr make_permutation_group(std::string label, int degree,
                                    std::vector<NamedPermutation> generators,
                                    std::vector<State> goals = {});

/// Z_n as the rotation group of an n-cycle, generators "+1" and "-1".
GraphSpecPtr make_cyclic(int n);

/// Parses the generator file format: first line n, then `name i_0 ... i_{n-1}`.
std::pair<int, std::vector<NamedPermutation>> read_generator_file(
    const std::filesystem::path& path);
/// One state per line; blank lines and lines starting with '#' are skipped.
std::vector<State> read_goal_file(const std::filesystem::path& path);
GraphSpecPtr load_permutation_group(const std::filesystem::path& generator_file,
                                    const std::optional<std::filesystem::path>& goal_file = {});

/// Draws k uniformly from {0..n_max} and applies k uniform generators to a
/// uniformly chosen goal.
State scramble(const GraphSpec& spec, Rng& rng, int n_max);

/// Uniform random element of the goal's component for sl2p, cube2 and cube3
/// (single identity goal). Throws DomainError for generic-perm, where no
/// direct sampler exists.
State uniform_state(const GraphSpec& spec, Rng& rng);

struct OrbitInvariant {
  int corner_twist = 0;  ///< sum of corner twists mod 3
  int edge_flip = 0;     ///< sum of edge flips mod 2
  int parity = 0;        ///< corner parity xor edge parity
  friend auto operator<=>(const OrbitInvariant&, const OrbitInvariant&) = default;
};

/// Conserved quantities separating the 12 orbits of the cube3 facet
/// assignments. Throws DomainError for other families.
OrbitInvariant orbit_invariant(const GraphSpec& spec, const State& x);

/// Cube3 helpers used by the invariant tests: twist one corner cubie in
/// place, flip one edge, or swap two edge cubies. None is a group move.
State cube3_twist_corner(const State& x, int slot, int amount);
State cube3_flip_edge(const State& x, int slot);
State cube3_swap_edges(const State& x, int slot_a, int slot_b);

/// Parity (0 even, 1 odd) of a permutation given as an array.
int permutation_parity(std::span<const State::value_type> perm);

}  // namespace cayley
