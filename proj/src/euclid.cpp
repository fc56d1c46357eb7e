#include <array>
#include <deque>
#include <map>

#include "cayley/error.hpp"
#include "cayley/oracle.hpp"

namespace cayley {
namespace {

constexpr Move kTPlus = 0, kTMinus = 1, kUPlus = 2, kUMinus = 3;

IntMatrix2 generator_matrix(Move g) {
  switch (g) {
    case kTPlus: return {1, 1, 0, 1};
    case kTMinus: return {1, -1, 0, 1};
    case kUPlus: return {1, 0, 1, 1};
    case kUMinus: return {1, 0, -1, 1};
  }
  throw DomainError("SL2(Z) generator index out of range");
}

// Shortest word for -I, found by BFS over small matrices and checked.
const std::vector<Move>& minus_identity_word() {
  static const std::vector<Move> word = [] {
    const IntMatrix2 target{-1, 0, 0, -1};
    using Key = std::array<long long, 4>;
    std::map<Key, std::vector<Move>> seen;
    std::deque<std::pair<IntMatrix2, std::vector<Move>>> queue;
    queue.push_back({IntMatrix2{1, 0, 0, 1}, {}});
    seen[{1, 0, 0, 1}] = {};
    while (!queue.empty()) {
      auto [m, w] = queue.front();
      queue.pop_front();
      if (m == target) return w;
      if (w.size() >= 10) continue;
      for (Move g = 0; g < 4; ++g) {
        auto next = m * generator_matrix(g);
        Key key{static_cast<long long>(next.a), static_cast<long long>(next.b),
                static_cast<long long>(next.c), static_cast<long long>(next.d)};
        if (!seen.emplace(key, std::vector<Move>{}).second) continue;
        auto nw = w;
        nw.push_back(g);
        queue.push_back({std::move(next), std::move(nw)});
      }
    }
    throw DomainError("no word for -I within the search bound");
  }();
  return word;
}

struct Power {
  bool is_t;  // T_k when true, U_k otherwise
  BigInt k;
};

}  // namespace

IntMatrix2 operator*(const IntMatrix2& x, const IntMatrix2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
          x.c * y.b + x.d * y.d};
}

IntMatrix2 word_product(std::span<const Move> word) {
  IntMatrix2 m{1, 0, 0, 1};
  for (Move g : word) m = m * generator_matrix(g);
  return m;
}

// Right-multiplying by T_k adds k·a to b; by U_k adds k·b to a. The top row
// is reduced to (±1, 0) with every applied power recorded, and the input is
// rebuilt as (base) · (inverse powers in reverse order).
EuclidResult euclid_solve(const IntMatrix2& input, std::size_t max_word_length) {
  if (input.a * input.d - input.b * input.c != 1) {
    throw DomainError("euclid_solve: determinant must be exactly 1");
  }
  IntMatrix2 m = input;
  std::vector<Power> ops;
  EuclidResult result;
  const auto apply = [&](bool is_t, const BigInt& k) {
    if (k == 0) return;
    if (is_t) {
      m.b += k * m.a;
      m.d += k * m.c;
    } else {
      m.a += k * m.b;
      m.c += k * m.d;
    }
    ops.push_back({is_t, k});
  };
  const auto top_max = [&] { return std::max(abs(m.a), abs(m.b)); };

  result.division_maxima.push_back(top_max());
  while (abs(m.a) >= 2 && abs(m.b) >= 2) {
    // gcd(a, b) = 1, so neither divides the other and the remainder is a
    // nonzero value of smaller magnitude.
    if (abs(m.a) > abs(m.b)) {
      apply(false, -(m.a / m.b));
    } else {
      apply(true, -(m.b / m.a));
    }
    result.division_maxima.push_back(top_max());
  }
  // Base cases: one top-row entry is 0 or ±1.
  if (m.b != 0 && abs(m.b) == 1 && m.a != 0 && abs(m.a) != 1) {
    apply(false, -(m.a - 1) * m.b);  // a -> 1
  }
  if (m.a == 0) apply(false, m.b);   // b = ±1, a -> 1
  if (m.b != 0) apply(true, -m.b * m.a);  // |a| = 1, b -> 0
  if (m.b != 0 || abs(m.a) != 1) throw DomainError("euclid_solve: reduction failed");

  BigInt total = 0;
  for (const auto& op : ops) total += abs(op.k);
  total += abs(m.c) + (m.a == -1 ? minus_identity_word().size() : 0);
  if (total > max_word_length) {
    throw ResourceError("euclid_solve: word of length " + total.str() + " exceeds the cap of " +
                        std::to_string(max_word_length));
  }
  auto& word = result.word;
  word.reserve(static_cast<std::size_t>(total));
  const auto emit = [&](bool is_t, const BigInt& k) {
    const Move g = is_t ? (k > 0 ? kTPlus : kTMinus) : (k > 0 ? kUPlus : kUMinus);
    for (BigInt i = 0; i < abs(k); ++i) word.push_back(g);
  };
  // Reduced matrix is U_c, or -I · U_{-c}.
  if (m.a == 1) {
    emit(false, m.c);
  } else {
    word = minus_identity_word();
    emit(false, -m.c);
  }
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) emit(it->is_t, -it->k);
  if (!(word_product(word) == input)) throw DomainError("euclid_solve: verification failed");
  return result;
}

}  // namespace cayley
