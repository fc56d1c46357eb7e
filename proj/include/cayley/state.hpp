#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include <boost/container/small_vector.hpp>

namespace cayley {

/// Every stochastic operation takes one of these explicitly.
using Rng = std::mt19937_64;

/// Index of a generator inside a GeneratorSet.
using Move = int;

/// Fixed-length vector of small non-negative integers identifying one vertex.
/// Cube states, SL2 residues and short permutations stay inline.
class State {
 public:
  using value_type = std::uint16_t;
  using storage_type = boost::container::small_vector<value_type, 40>;

  State() = default;
  explicit State(std::size_t n, value_type fill = 0) : v_(n, fill) {}
  State(std::initializer_list<value_type> init) : v_(init) {}
  explicit State(std::span<const value_type> values) : v_(values.begin(), values.end()) {}

  std::size_t size() const noexcept { return v_.size(); }
  bool empty() const noexcept { return v_.empty(); }
  value_type operator[](std::size_t i) const { return v_[i]; }
  value_type& operator[](std::size_t i) { return v_[i]; }
  const value_type* data() const noexcept { return v_.data(); }
  value_type* data() noexcept { return v_.data(); }
  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }
  auto begin() noexcept { return v_.begin(); }
  auto end() noexcept { return v_.end(); }
  void resize(std::size_t n) { v_.resize(n); }
  std::span<const value_type> values() const noexcept { return {v_.data(), v_.size()}; }

  friend bool operator==(const State& a, const State& b) noexcept {
    return a.v_.size() == b.v_.size() &&
           std::equal(a.v_.begin(), a.v_.end(), b.v_.begin());
  }
  friend std::strong_ordering operator<=>(const State& a, const State& b) noexcept {
    return std::lexicographical_compare_three_way(a.v_.begin(), a.v_.end(), b.v_.begin(),
                                                  b.v_.end());
  }

 private:
  storage_type v_;
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept {
    const auto bytes = std::string_view(reinterpret_cast<const char*>(s.data()),
                                        s.size() * sizeof(State::value_type));
    return std::hash<std::string_view>{}(bytes);
  }
};

/// Comma-separated decimal rendering, e.g. "1,0,0,1".
std::string to_string(const State& s);

/// Accepts commas and/or whitespace as separators. Throws FormatError on
/// anything that is not a list of integers in [0, 65535].
State parse_state(std::string_view text);

}  // namespace cayley
