#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cayley/group.hpp"
#include "cayley/score_function.hpp"

namespace cayley {

/// Exact distance to the goal set for every state of an enumerable graph,
/// stored densely by rank. States outside the goals' component read as
/// kUnreached.
class DistanceTable {
 public:
  static constexpr std::uint8_t kUnreached = 255;

  DistanceTable() = default;
  DistanceTable(std::string label, std::vector<std::uint8_t> distances);

  const std::string& label() const noexcept { return label_; }
  std::uint64_t rank_space() const noexcept { return distances_.size(); }
  std::uint8_t by_rank(std::uint64_t r) const { return distances_.at(r); }
  /// Throws DomainError when x lies outside the goals' component.
  int distance(const GraphSpec& spec, const State& x) const;
  const std::vector<std::uint8_t>& raw() const noexcept { return distances_; }

  std::uint64_t count() const noexcept { return count_; }  ///< reached states
  int diameter() const noexcept { return diameter_; }
  double mean() const noexcept { return mean_; }
  /// Number of reached states at each distance.
  const std::vector<std::uint64_t>& histogram() const noexcept { return histogram_; }

 private:
  std::string label_;
  std::vector<std::uint8_t> distances_;
  std::uint64_t count_ = 0;
  int diameter_ = 0;
  double mean_ = 0.0;
  std::vector<std::uint64_t> histogram_;
};

/// Multi-source BFS from the goals over the dense rank space. Throws
/// DomainError for families without a rank and ResourceError when the rank
/// space exceeds `max_states`.
DistanceTable bfs_distances(const GraphSpec& spec, std::uint64_t max_states = 1ULL << 31);

/// Binary file: magic "CDDT", u16 version, u16 label length, label bytes,
/// u64 rank-space size, then one distance byte per rank.
void save_distance_table(const std::filesystem::path& path, const DistanceTable& table);
DistanceTable load_distance_table(const std::filesystem::path& path);

/// Exact forward-process marginals p_0..p_T on the goals' component,
/// enumerated by BFS.
class ProbabilityTables {
 public:
  int horizon() const noexcept { return static_cast<int>(p_.size()) - 1; }
  std::size_t size() const noexcept { return states_.size(); }
  const std::vector<State>& states() const noexcept { return states_; }
  /// Index of x in states(), or -1 when x is outside the component.
  std::int64_t index_of(const State& x) const;
  double p(int t, const State& x) const;
  double p_by_index(int t, std::size_t i) const { return p_[static_cast<std::size_t>(t)][i]; }
  std::size_t neighbour(std::size_t i, Move a) const { return neighbours_[i * n_gen_ + static_cast<std::size_t>(a)]; }

 private:
  friend ProbabilityTables exact_probabilities(const GraphSpec&, int, std::size_t);
  std::vector<State> states_;
  std::unordered_map<State, std::size_t, StateHash> index_;
  std::vector<std::size_t> neighbours_;
  std::size_t n_gen_ = 0;
  std::vector<std::vector<double>> p_;
};

/// p_0 uniform on the goals, p_t = p_{t-1} pushed through the uniform kernel.
ProbabilityTables exact_probabilities(const GraphSpec& spec, int T,
                                      std::size_t max_states = 100'000);

/// p_{t-1}(x·a) / p_t(x). Throws DomainError when p_t(x) = 0 or t is not in
/// 1..T.
double exact_score(const ProbabilityTables& tables, const GraphSpec& spec, const State& x, int t,
                   Move a);

/// Expected loss of the exact score under the uniform forward process,
/// i.e. the minimum of the population loss:
///   sum_t [ |S| - sum_y p_{t-1}(y) sum_a log(p_{t-1}(y) / p_t(y a)) ].
double exact_loss_minimum(const ProbabilityTables& tables, const GraphSpec& spec);

/// The exact score behind the ScoreFunction interface.
class ExactScore final : public ScoreFunction {
 public:
  ExactScore(const GraphSpec& spec, const ProbabilityTables& tables)
      : spec_(spec), tables_(tables) {}
  std::size_t num_generators() const override { return spec_.num_generators(); }
  void scores(std::span<const State> states, int t, std::span<double> out) const override;

 private:
  const GraphSpec& spec_;
  const ProbabilityTables& tables_;
};

using BigInt = boost::multiprecision::cpp_int;

/// [[a, b], [c, d]] over the integers.
struct IntMatrix2 {
  BigInt a, b, c, d;
  friend bool operator==(const IntMatrix2&, const IntMatrix2&) = default;
};

IntMatrix2 operator*(const IntMatrix2& x, const IntMatrix2& y);
/// Product of the SL2(Z) generators T+1, T-1, U+1, U-1 (indices 0..3) in
/// word order, starting from the identity.
IntMatrix2 word_product(std::span<const Move> word);

struct EuclidResult {
  std::vector<Move> word;
  /// max(|a|, |b|) of the top row before the first division step and after
  /// each one.
  std::vector<BigInt> division_maxima;
};

/// Shortest-path-style word for an SL2(Z) matrix by Euclidean reduction of
/// the top row. Throws DomainError unless det = 1 and ResourceError when the
/// expanded word would exceed `max_word_length`.
EuclidResult euclid_solve(const IntMatrix2& m, std::size_t max_word_length = 10'000'000);

}  // namespace cayley
