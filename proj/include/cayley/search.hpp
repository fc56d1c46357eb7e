#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cayley/group.hpp"
#include "cayley/score_function.hpp"

namespace cayley {

struct BallEntry {
  std::uint8_t distance = 0;
  Move first_move = -1;  ///< -1 on goal states
};

/// Exact distances of every state within `radius` of the goal set, with a
/// generator that moves one step closer.
class BallTable {
 public:
  BallTable() = default;
  BallTable(int radius, std::unordered_map<State, BallEntry, StateHash> entries)
      : radius_(radius), entries_(std::move(entries)) {}

  int radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const BallEntry* find(const State& x) const;
  /// Generators leading from x (which must be in the ball) to a goal.
  std::vector<Move> path_to_goal(const GraphSpec& spec, const State& x) const;
  const std::unordered_map<State, BallEntry, StateHash>& entries() const noexcept {
    return entries_;
  }

 private:
  int radius_ = -1;
  std::unordered_map<State, BallEntry, StateHash> entries_;
};

/// Multi-source BFS from the goal set out to radius R. Throws ResourceError
/// naming the completed radius once more than `max_entries` states would be
/// stored.
BallTable build_ball(const GraphSpec& spec, int radius, std::size_t max_entries = 20'000'000);

/// Binary file: magic "CDBT", u16 version, u16 state length, u32 radius,
/// u64 count, then per entry the u16 state values, u8 distance, i8 move.
void save_ball(const std::filesystem::path& path, const GraphSpec& spec, const BallTable& ball);
BallTable load_ball(const std::filesystem::path& path, const GraphSpec& spec);

struct SolveResult {
  bool solved = false;
  /// Generators applied to the start state, in order, ending on a goal.
  std::vector<Move> path;
  /// Backward time steps taken before hitting the goal set or the ball.
  int steps = 0;
  std::uint64_t nodes_expanded = 0;
  double seconds = 0.0;
  /// Log-probability of the returned walk under the backward kernel.
  double cum_logprob = 0.0;
  int length() const noexcept { return static_cast<int>(path.size()); }
};

/// Applies path to start and checks that it ends on a goal.
bool verify_solution(const GraphSpec& spec, const State& start, const SolveResult& result);

struct WalkOptions {
  /// Stop as soon as a goal is reached; otherwise always walk down to t = 0
  /// and report solved only if x_0 is a goal.
  bool stop_at_goal = true;
};

/// One sample of the backward process from x_{T_b} = start.
SolveResult backward_walk(const GraphSpec& spec, const ScoreFunction& score, const State& start,
                          int T_b, Rng& rng, const BallTable* ball = nullptr,
                          const WalkOptions& options = {});

struct BeamOptions {
  int width = 1;
  /// 0 expands every generator. Otherwise each candidate draws this many
  /// generators from its kernel row (duplicates collapse).
  int sample_alpha = 0;
  std::uint64_t seed = 0;  ///< only used when sample_alpha > 0
};

/// Keeps the `width` most probable backward walks per time step, deduplicated
/// by state. Width 1 is greedy with lowest-index tie-breaking.
SolveResult beam_search(const GraphSpec& spec, const ScoreFunction& score, const State& start,
                        int T_b, const BeamOptions& options, const BallTable* ball = nullptr);

using Solver = std::function<SolveResult(int horizon)>;

/// Re-solves with the horizon shrunk to the best length found until there
/// is no improvement or `max_rounds` re-solves have run (negative: no cap).
/// Seconds and nodes accumulate across attempts.
SolveResult t_calibrate(const Solver& solver, int T_initial, int max_rounds = -1);

struct BenchOptions {
  int beam_width = 1;
  const BallTable* ball = nullptr;
  int horizon = 1;  ///< T_b
  /// T-calibration re-solves per instance; 0 disables, negative is unbounded.
  int calibrate_rounds = 0;
  int threads = 1;
};

struct BenchSummary {
  int beam_width = 0;
  int ball_radius = 0;
  double solve_rate = 0.0;
  double mean_length = 0.0;  ///< over solved instances
  double mean_excess = 0.0;  ///< length minus optimal, over solved; NaN without distances
  double opt_pct = 0.0;      ///< percent of solved that are optimal; NaN without distances
  double mean_nodes = 0.0;
  double mean_seconds = 0.0;
  std::vector<SolveResult> results;  ///< one per start, in input order
};

/// Beam-searches every start (split across threads) and summarizes.
/// `optimal` holds oracle distances per start or is empty. Every solved
/// path is verified; a bad path is a DomainError.
BenchSummary run_benchmark(const GraphSpec& spec, const ScoreFunction& score,
                           std::span<const State> starts, std::span<const int> optimal,
                           const BenchOptions& options);

std::string bench_csv_header();
std::string format_bench_row(const BenchSummary& s);

/// Mean steps over solved walks, T_penalty for unsolved ones.
double estimate_expected_time(std::span<const SolveResult> walks, double T_penalty);
/// Same, weighted by each walk's backward-process probability.
double estimate_expected_time_weighted(std::span<const SolveResult> walks, double T_penalty);

}  // namespace cayley
