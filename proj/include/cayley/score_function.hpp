#pragma once

#include <span>

#include "cayley/state.hpp"

namespace cayley {

/// Batched access to the per-generator score sigma_t(x)_a, an estimate of
/// p_{t-1}(x·a) / p_t(x). Implementations must be safe for concurrent
/// readers.
class ScoreFunction {
 public:
  virtual ~ScoreFunction() = default;

  virtual std::size_t num_generators() const = 0;

  /// Writes states.size() rows of num_generators() scores each, row-major,
  /// all evaluated at time `t`.
  virtual void scores(std::span<const State> states, int t, std::span<double> out) const = 0;
};

/// sigma ≡ c for every state, time and generator.
class ConstantScore final : public ScoreFunction {
 public:
  ConstantScore(std::size_t num_generators, double value) : n_(num_generators), value_(value) {}

  std::size_t num_generators() const override { return n_; }
  void scores(std::span<const State> states, int, std::span<double> out) const override {
    for (std::size_t i = 0; i < states.size() * n_; ++i) out[i] = value_;
  }

 private:
  std::size_t n_;
  double value_;
};

}  // namespace cayley
