#include "cayley/search.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "cayley/diffusion.hpp"
#include "cayley/error.hpp"

namespace cayley {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Node {
  State state;
  double logprob;
  int parent;  // index into the previous layer, -1 for the root
  Move move;
};

std::vector<Move> trace_path(const std::vector<std::vector<Node>>& layers, std::size_t layer,
                             int index) {
  std::vector<Move> path;
  for (std::size_t l = layer; l > 0; --l) {
    const auto& n = layers[l][static_cast<std::size_t>(index)];
    path.push_back(n.move);
    index = n.parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

bool verify_solution(const GraphSpec& spec, const State& start, const SolveResult& result) {
  if (!result.solved) return false;
  for (Move a : result.path) {
    if (a < 0 || static_cast<std::size_t>(a) >= spec.num_generators()) return false;
  }
  return spec.is_goal(spec.apply_word(start, result.path));
}

SolveResult backward_walk(const GraphSpec& spec, const ScoreFunction& score, const State& start,
                          int T_b, Rng& rng, const BallTable* ball, const WalkOptions& options) {
  const auto t0 = Clock::now();
  spec.validate(start);
  SolveResult r;
  const auto finish_in_ball = [&](const State& x) {
    const auto tail = ball->path_to_goal(spec, x);
    r.path.insert(r.path.end(), tail.begin(), tail.end());
    r.solved = true;
  };
  if (options.stop_at_goal && spec.is_goal(start)) {
    r.solved = true;
  } else if (options.stop_at_goal && ball && ball->find(start)) {
    finish_in_ball(start);
  } else {
    const std::size_t n = spec.num_generators();
    std::vector<double> s(n);
    State x = start, y;
    for (int t = T_b; t >= 1; --t) {
      score.scores(std::span<const State>(&x, 1), t, s);
      const auto row = backward_kernel(spec, s);
      std::discrete_distribution<int> pick(row.probs.begin(), row.probs.end());
      const Move a = pick(rng);
      r.cum_logprob += std::log(row.probs[static_cast<std::size_t>(a)]);
      r.nodes_expanded += n;
      spec.apply_into(x, a, y);
      std::swap(x, y);
      r.path.push_back(a);
      ++r.steps;
      if (!options.stop_at_goal) continue;
      if (spec.is_goal(x)) {
        r.solved = true;
        break;
      }
      if (ball && ball->find(x)) {
        finish_in_ball(x);
        break;
      }
    }
    if (!options.stop_at_goal) r.solved = spec.is_goal(x);
  }
  r.seconds = elapsed(t0);
  return r;
}

SolveResult beam_search(const GraphSpec& spec, const ScoreFunction& score, const State& start,
                        int T_b, const BeamOptions& options, const BallTable* ball) {
  const auto t0 = Clock::now();
  if (options.width < 1) throw DomainError("beam width must be >= 1");
  spec.validate(start);
  SolveResult r;
  if (spec.is_goal(start)) {
    r.solved = true;
    r.seconds = elapsed(t0);
    return r;
  }
  if (ball && ball->find(start)) {
    r.path = ball->path_to_goal(spec, start);
    r.solved = true;
    r.seconds = elapsed(t0);
    return r;
  }

  const std::size_t n = spec.num_generators();
  const auto width = static_cast<std::size_t>(options.width);
  Rng rng(options.seed);
  std::vector<std::vector<Node>> layers;
  layers.push_back({Node{start, 0.0, -1, -1}});
  std::vector<State> states;
  std::vector<double> s;
  std::vector<int> drawn(n);
  std::unordered_map<State, std::size_t, StateHash> seen;

  for (int t = T_b; t >= 1; --t) {
    const auto& cur = layers.back();
    states.clear();
    for (const auto& c : cur) states.push_back(c.state);
    s.resize(states.size() * n);
    score.scores(states, t, s);

    std::vector<Node> next;
    seen.clear();
    State y;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const auto row = backward_kernel(spec, std::span<const double>(s).subspan(i * n, n));
      if (options.sample_alpha > 0) {
        std::fill(drawn.begin(), drawn.end(), 0);
        std::discrete_distribution<int> pick(row.probs.begin(), row.probs.end());
        for (int k = 0; k < options.sample_alpha; ++k) drawn[static_cast<std::size_t>(pick(rng))] = 1;
      }
      for (std::size_t a = 0; a < n; ++a) {
        if (options.sample_alpha > 0 && !drawn[a]) continue;
        if (row.probs[a] <= 0.0) continue;
        spec.apply_into(cur[i].state, static_cast<Move>(a), y);
        ++r.nodes_expanded;
        const double lp = cur[i].logprob + std::log(row.probs[a]);
        auto [it, inserted] = seen.try_emplace(y, next.size());
        if (inserted) {
          next.push_back(Node{y, lp, static_cast<int>(i), static_cast<Move>(a)});
        } else if (lp > next[it->second].logprob) {
          next[it->second].logprob = lp;
          next[it->second].parent = static_cast<int>(i);
          next[it->second].move = static_cast<Move>(a);
        }
      }
    }
    // Stable: equal log-probabilities keep generation order, so width 1
    // picks the lowest generator index among tied maxima.
    std::stable_sort(next.begin(), next.end(),
                     [](const Node& a, const Node& b) { return a.logprob > b.logprob; });
    if (next.size() > width) next.resize(width);
    layers.push_back(std::move(next));
    ++r.steps;

    const auto& kept = layers.back();
    int best = -1;
    std::size_t best_len = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < kept.size(); ++i) {
      std::size_t extra;
      if (spec.is_goal(kept[i].state)) {
        extra = 0;
      } else if (const BallEntry* e = ball ? ball->find(kept[i].state) : nullptr) {
        extra = e->distance;
      } else {
        continue;
      }
      if (extra < best_len) {  // kept is sorted, so ties keep the more probable walk
        best_len = extra;
        best = static_cast<int>(i);
      }
    }
    if (best >= 0) {
      const auto& hit = kept[static_cast<std::size_t>(best)];
      r.path = trace_path(layers, layers.size() - 1, best);
      r.cum_logprob = hit.logprob;
      if (!spec.is_goal(hit.state)) {
        const auto tail = ball->path_to_goal(spec, hit.state);
        r.path.insert(r.path.end(), tail.begin(), tail.end());
      }
      r.solved = true;
      break;
    }
    if (layers.back().empty()) break;
  }
  if (!r.solved && !layers.back().empty()) r.cum_logprob = layers.back().front().logprob;
  r.seconds = elapsed(t0);
  return r;
}

SolveResult t_calibrate(const Solver& solver, int T_initial, int max_rounds) {
  SolveResult best = solver(T_initial);
  if (!best.solved) return best;
  double seconds = best.seconds;
  std::uint64_t nodes = best.nodes_expanded;
  int horizon = T_initial;
  for (int round = 0; max_rounds < 0 || round < max_rounds; ++round) {
    if (best.length() >= horizon || best.length() == 0) break;
    horizon = best.length();
    auto attempt = solver(horizon);
    seconds += attempt.seconds;
    nodes += attempt.nodes_expanded;
    if (!attempt.solved || attempt.length() >= best.length()) break;
    best = std::move(attempt);
  }
  best.seconds = seconds;
  best.nodes_expanded = nodes;
  return best;
}

BenchSummary run_benchmark(const GraphSpec& spec, const ScoreFunction& score,
                           std::span<const State> starts, std::span<const int> optimal,
                           const BenchOptions& options) {
  if (!optimal.empty() && optimal.size() != starts.size()) {
    throw DomainError("run_benchmark: one optimal distance per start expected");
  }
  BenchSummary out;
  out.beam_width = options.beam_width;
  out.ball_radius = options.ball ? options.ball->radius() : 0;
  out.results.resize(starts.size());
  BeamOptions beam;
  beam.width = options.beam_width;
  const auto solve_one = [&](std::size_t i) {
    const Solver solver = [&](int horizon) {
      return beam_search(spec, score, starts[i], horizon, beam, options.ball);
    };
    auto r = options.calibrate_rounds == 0
                 ? solver(options.horizon)
                 : t_calibrate(solver, options.horizon, options.calibrate_rounds);
    if (r.solved && !verify_solution(spec, starts[i], r)) {
      throw DomainError("search returned a path that does not reach the goal set");
    }
    out.results[i] = std::move(r);
  };
  const auto threads = static_cast<std::size_t>(std::max(1, options.threads));
  if (threads == 1 || starts.size() < 2) {
    for (std::size_t i = 0; i < starts.size(); ++i) solve_one(i);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < starts.size(); i += threads) solve_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::size_t solved = 0, optimal_count = 0;
  double length = 0.0, excess = 0.0, nodes = 0.0, seconds = 0.0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto& r = out.results[i];
    nodes += static_cast<double>(r.nodes_expanded);
    seconds += r.seconds;
    if (!r.solved) continue;
    ++solved;
    length += r.length();
    if (!optimal.empty()) {
      excess += r.length() - optimal[i];
      if (r.length() == optimal[i]) ++optimal_count;
    }
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, starts.size()));
  const double ns = static_cast<double>(std::max<std::size_t>(1, solved));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.solve_rate = static_cast<double>(solved) / n;
  out.mean_length = solved ? length / ns : nan;
  out.mean_excess = optimal.empty() || !solved ? nan : excess / ns;
  out.opt_pct = optimal.empty() || !solved ? nan : 100.0 * static_cast<double>(optimal_count) / ns;
  out.mean_nodes = nodes / n;
  out.mean_seconds = seconds / n;
  return out;
}

std::string bench_csv_header() {
  return "beam_width,ball_radius,solve_rate,mean_length,mean_excess,opt_pct,mean_nodes,mean_seconds";
}

std::string format_bench_row(const BenchSummary& s) {
  std::ostringstream out;
  out.precision(6);
  out << s.beam_width << ',' << s.ball_radius << ',' << s.solve_rate << ',' << s.mean_length << ','
      << s.mean_excess << ',' << s.opt_pct << ',' << s.mean_nodes << ',' << s.mean_seconds;
  return out.str();
}

double estimate_expected_time(std::span<const SolveResult> walks, double T_penalty) {
  if (walks.empty()) throw DomainError("estimate_expected_time: no walks");
  double total = 0.0;
  for (const auto& w : walks) total += w.solved ? w.steps : T_penalty;
  return total / static_cast<double>(walks.size());
}

double estimate_expected_time_weighted(std::span<const SolveResult> walks, double T_penalty) {
  if (walks.empty()) throw DomainError("estimate_expected_time: no walks");
  double max_lp = -std::numeric_limits<double>::infinity();
  for (const auto& w : walks) max_lp = std::max(max_lp, w.cum_logprob);
  double num = 0.0, den = 0.0;
  for (const auto& w : walks) {
    const double weight = std::exp(w.cum_logprob - max_lp);
    num += weight * (w.solved ? w.steps : T_penalty);
    den += weight;
  }
  return num / den;
}

}  // namespace cayley
