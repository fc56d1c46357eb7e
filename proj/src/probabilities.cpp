#include <cmath>
#include <deque>

#include "cayley/error.hpp"
#include "cayley/oracle.hpp"

namespace cayley {

std::int64_t ProbabilityTables::index_of(const State& x) const {
  auto it = index_.find(x);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

double ProbabilityTables::p(int t, const State& x) const {
  if (t < 0 || t > horizon()) throw DomainError("time outside the probability tables");
  const auto i = index_of(x);
  return i < 0 ? 0.0 : p_[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
}

ProbabilityTables exact_probabilities(const GraphSpec& spec, int T, std::size_t max_states) {
  if (T < 0) throw DomainError("exact_probabilities: T must be >= 0");
  ProbabilityTables tab;
  const std::size_t n = spec.num_generators();
  tab.n_gen_ = n;
  std::deque<std::size_t> queue;
  const auto intern = [&](const State& x) {
    auto [it, inserted] = tab.index_.try_emplace(x, tab.states_.size());
    if (inserted) {
      if (tab.states_.size() >= max_states) {
        throw ResourceError(spec.label() + ": component exceeds " + std::to_string(max_states) +
                            " states; exact probabilities unavailable");
      }
      tab.states_.push_back(x);
      queue.push_back(it->second);
    }
    return it->second;
  };
  for (const auto& g : spec.goals()) intern(g);
  State y;
  while (!queue.empty()) {
    const auto i = queue.front();
    queue.pop_front();
    for (std::size_t a = 0; a < n; ++a) {
      spec.apply_into(tab.states_[i], static_cast<Move>(a), y);
      const auto j = intern(y);
      if (tab.neighbours_.size() < (i + 1) * n) tab.neighbours_.resize((i + 1) * n);
      tab.neighbours_[i * n + a] = j;
    }
  }
  const std::size_t m = tab.states_.size();
  tab.neighbours_.resize(m * n);
  tab.p_.assign(static_cast<std::size_t>(T) + 1, std::vector<double>(m, 0.0));
  const double goal_mass = 1.0 / static_cast<double>(spec.goals().size());
  for (const auto& g : spec.goals()) tab.p_[0][tab.index_.at(g)] = goal_mass;
  const double step = 1.0 / static_cast<double>(n);
  for (int t = 1; t <= T; ++t) {
    const auto& prev = tab.p_[static_cast<std::size_t>(t - 1)];
    auto& cur = tab.p_[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < m; ++i) {
      if (prev[i] == 0.0) continue;
      for (std::size_t a = 0; a < n; ++a) cur[tab.neighbours_[i * n + a]] += prev[i] * step;
    }
  }
  return tab;
}

double exact_score(const ProbabilityTables& tables, const GraphSpec& spec, const State& x, int t,
                   Move a) {
  if (t < 1 || t > tables.horizon()) throw DomainError("exact_score: t must be in 1..T");
  if (a < 0 || static_cast<std::size_t>(a) >= spec.num_generators()) {
    throw DomainError("exact_score: generator index out of range");
  }
  const auto i = tables.index_of(x);
  if (i < 0 || tables.p_by_index(t, static_cast<std::size_t>(i)) == 0.0) {
    throw DomainError("exact_score: p_t(x) = 0 at t = " + std::to_string(t));
  }
  const auto idx = static_cast<std::size_t>(i);
  return tables.p_by_index(t - 1, tables.neighbour(idx, a)) / tables.p_by_index(t, idx);
}

double exact_loss_minimum(const ProbabilityTables& tables, const GraphSpec& spec) {
  const std::size_t n = spec.num_generators();
  double loss = 0.0;
  for (int t = 1; t <= tables.horizon(); ++t) {
    loss += static_cast<double>(n);
    for (std::size_t y = 0; y < tables.size(); ++y) {
      const double prev = tables.p_by_index(t - 1, y);
      if (prev == 0.0) continue;
      for (std::size_t a = 0; a < n; ++a) {
        loss -= prev * std::log(prev / tables.p_by_index(t, tables.neighbour(y, static_cast<Move>(a))));
      }
    }
  }
  return loss;
}

void ExactScore::scores(std::span<const State> states, int t, std::span<double> out) const {
  const std::size_t n = spec_.num_generators();
  for (std::size_t k = 0; k < states.size(); ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      out[k * n + a] = exact_score(tables_, spec_, states[k], t, static_cast<Move>(a));
    }
  }
}

}  // namespace cayley
