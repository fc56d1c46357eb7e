#include "cayley/diffusion.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "cayley/error.hpp"

namespace cayley {
namespace {

Move sample_index(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  Move last_positive = 0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] > 0.0) last_positive = static_cast<Move>(a);
    acc += probs[a];
    if (r < acc) return static_cast<Move>(a);
  }
  return last_positive;
}

// Normalizes the weights of one reversed-score step in place.
void normalize_weights(std::span<double> w) {
  double total = 0.0;
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) {
      throw NumericError("reversed-score step: non-finite or negative score");
    }
    total += v;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericError("reversed-score step: scores sum to zero or overflow");
  }
  for (double& v : w) v /= total;
}

}  // namespace

bool is_valid_trajectory(const GraphSpec& spec, const Trajectory& traj,
                         bool allow_scrambled_start) {
  if (traj.states.size() != traj.moves.size() + 1) return false;
  if (!allow_scrambled_start && !spec.is_goal(traj.states.front())) return false;
  State next;
  for (std::size_t t = 1; t < traj.states.size(); ++t) {
    const Move a = traj.moves[t - 1];
    if (a < 0 || static_cast<std::size_t>(a) >= spec.num_generators()) return false;
    if (!spec.is_valid(traj.states[t - 1])) return false;
    spec.apply_into(traj.states[t - 1], a, next);
    if (next != traj.states[t]) return false;
  }
  return true;
}

std::pair<Move, State> forward_step_uniform(const GraphSpec& spec, const State& x, Rng& rng) {
  std::uniform_int_distribution<Move> pick(0, static_cast<Move>(spec.num_generators()) - 1);
  const Move a = pick(rng);
  State y;
  spec.apply_into(x, a, y);
  return {a, std::move(y)};
}

std::vector<double> reversed_score_probabilities(const GraphSpec& spec, const State& x, int t,
                                                 const ScoreFunction& score) {
  const auto n = spec.num_generators();
  std::vector<State> succ(n);
  for (std::size_t a = 0; a < n; ++a) spec.apply_into(x, static_cast<Move>(a), succ[a]);
  std::vector<double> out(n * n);
  score.scores(succ, t + 1, out);
  std::vector<double> w(n);
  for (std::size_t a = 0; a < n; ++a) {
    w[a] = out[a * n + static_cast<std::size_t>(spec.generators().inverse(static_cast<Move>(a)))];
  }
  normalize_weights(w);
  return w;
}

std::pair<Move, State> forward_step_reversed_score(const GraphSpec& spec, const State& x, int t,
                                                   const ScoreFunction& score, Rng& rng) {
  const auto probs = reversed_score_probabilities(spec, x, t, score);
  const Move a = sample_index(probs, rng);
  State y;
  spec.apply_into(x, a, y);
  return {a, std::move(y)};
}

std::vector<Trajectory> sample_trajectories(const GraphSpec& spec, int T, int count,
                                            const ForwardProcess& process, Rng& rng,
                                            const SamplingOptions& options) {
  if (T < 1) throw DomainError("sample_trajectories: T must be >= 1");
  if (count < 1) throw DomainError("sample_trajectories: count must be >= 1");
  const auto goals = spec.goals();
  std::uniform_int_distribution<std::size_t> pick_goal(0, goals.size() - 1);
  const auto start = [&]() {
    if (options.scramble_n_max) return scramble(spec, rng, *options.scramble_n_max);
    return goals[pick_goal(rng)];
  };

  std::vector<Trajectory> out(static_cast<std::size_t>(count));
  if (!process.score) {
    for (auto& traj : out) {
      traj.states.reserve(static_cast<std::size_t>(T) + 1);
      traj.moves.reserve(static_cast<std::size_t>(T));
      traj.states.push_back(start());
      for (int t = 0; t < T; ++t) {
        auto [a, y] = forward_step_uniform(spec, traj.states.back(), rng);
        traj.moves.push_back(a);
        traj.states.push_back(std::move(y));
      }
    }
    return out;
  }

  const auto n = spec.num_generators();
  if (process.score->num_generators() != n) {
    throw DomainError("sample_trajectories: score width does not match generator count");
  }
  for (auto& traj : out) {
    traj.states.reserve(static_cast<std::size_t>(T) + 1);
    traj.moves.reserve(static_cast<std::size_t>(T));
    traj.states.push_back(start());
  }
  std::vector<State> succ(out.size() * n);
  std::vector<double> scores(succ.size() * n);
  std::vector<double> w(n);
  for (int t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t a = 0; a < n; ++a) {
        spec.apply_into(out[i].states.back(), static_cast<Move>(a), succ[i * n + a]);
      }
    }
    process.score->scores(succ, t + 1, scores);
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t a = 0; a < n; ++a) {
        const auto inv = static_cast<std::size_t>(spec.generators().inverse(static_cast<Move>(a)));
        w[a] = scores[(i * n + a) * n + inv];
      }
      normalize_weights(w);
      const Move a = sample_index(w, rng);
      out[i].moves.push_back(a);
      out[i].states.push_back(succ[i * n + static_cast<std::size_t>(a)]);
    }
  }
  return out;
}

KernelRow backward_kernel(const GraphSpec& spec, std::span<const double> score) {
  if (score.size() != spec.num_generators()) {
    throw DomainError("backward_kernel: score has wrong length");
  }
  KernelRow row;
  row.probs.assign(score.begin(), score.end());
  double total = 0.0;
  for (double v : row.probs) {
    if (!std::isfinite(v) || v < 0.0) throw NumericError("backward_kernel: invalid score entry");
    total += v;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericError("backward_kernel: score is identically zero or overflows");
  }
  for (double& v : row.probs) v /= total;
  return row;
}

std::string format_trajectory(const Trajectory& traj) {
  std::string out = to_string(traj.states.front()) + " |";
  for (std::size_t i = 0; i < traj.moves.size(); ++i) {
    out += i ? "," : " ";
    out += std::to_string(traj.moves[i]);
  }
  return out;
}

Trajectory parse_trajectory(const GraphSpec& spec, std::string_view line) {
  const auto bar = line.find('|');
  if (bar == std::string_view::npos) throw FormatError("trajectory line lacks '|' separator");
  Trajectory traj;
  traj.states.push_back(parse_state(line.substr(0, bar)));
  spec.validate(traj.states.front());
  std::string rest(line.substr(bar + 1));
  for (char& c : rest) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(rest);
  int a = 0;
  while (in >> a) {
    traj.states.push_back(spec.apply(traj.states.back(), a));
    traj.moves.push_back(a);
  }
  if (!in.eof()) throw FormatError("trajectory line: bad move list");
  return traj;
}

}  // namespace cayley
