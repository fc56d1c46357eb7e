#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cayley/group.hpp"
#include "cayley/score_function.hpp"

namespace cayley {

/// x_0 .. x_T with moves[t-1] taking states[t-1] to states[t].
struct Trajectory {
  std::vector<State> states;
  std::vector<Move> moves;

  int horizon() const noexcept { return static_cast<int>(moves.size()); }
};

/// Checks the Trajectory invariants (consistent lengths, every step is the
/// recorded generator, x_0 is a goal unless `allow_scrambled_start`).
bool is_valid_trajectory(const GraphSpec& spec, const Trajectory& traj,
                         bool allow_scrambled_start = false);

struct KernelRow {
  std::vector<double> probs;
};

/// One step of the uniform forward process D^{-1}A.
std::pair<Move, State> forward_step_uniform(const GraphSpec& spec, const State& x, Rng& rng);

/// Reversed-score forward probabilities for the step t -> t+1:
/// q(a) ∝ sigma_{t+1}(x·a)_{a^{-1}}. Throws NumericError on non-finite or
/// non-positive totals.
std::vector<double> reversed_score_probabilities(const GraphSpec& spec, const State& x, int t,
                                                 const ScoreFunction& score);

std::pair<Move, State> forward_step_reversed_score(const GraphSpec& spec, const State& x, int t,
                                                   const ScoreFunction& score, Rng& rng);

struct ForwardProcess {
  /// nullptr selects the uniform process; otherwise the reversed-score
  /// process driven by this score.
  const ScoreFunction* score = nullptr;

  static ForwardProcess uniform() { return {}; }
  static ForwardProcess reversed_score(const ScoreFunction& s) { return {&s}; }
};

struct SamplingOptions {
  /// When set, x_0 is a scramble of up to this many moves from a goal
  /// instead of a goal itself.
  std::optional<int> scramble_n_max;
};

/// `count` independent walks of exactly T moves. Reversed-score walks are
/// advanced in lockstep so each time step costs one batched score call.
std::vector<Trajectory> sample_trajectories(const GraphSpec& spec, int T, int count,
                                            const ForwardProcess& process, Rng& rng,
                                            const SamplingOptions& options = {});

/// Bayes-reversed kernel under the uniform forward process:
/// probs[a] = score[a] / sum_b score[b]. Zero entries are allowed; an
/// all-zero, negative or non-finite score is a NumericError.
KernelRow backward_kernel(const GraphSpec& spec, std::span<const double> score);

/// Debug dump: "x0 | m1,m2,..." with x0 comma-separated and moves as indices.
std::string format_trajectory(const Trajectory& traj);
/// Inverse of format_trajectory; replays moves to rebuild every state.
Trajectory parse_trajectory(const GraphSpec& spec, std::string_view line);

}  // namespace cayley
