#include <algorithm>

#include "cayley/error.hpp"
#include "cayley/group.hpp"

namespace cayley {
namespace {

// Generator order: T+1, T-1, U+1, U-1.
constexpr int kShift[4] = {1, -1, 1, -1};

class Sl2pGraph final : public GraphSpec {
 public:
  Sl2pGraph(int p, std::vector<State> goals)
      : GraphSpec(Family::kSl2p, "sl2p(p=" + std::to_string(p) + ")",
                  GeneratorSet({"T+1", "T-1", "U+1", "U-1"}, {1, 0, 3, 2}), 4,
                  4 * static_cast<std::size_t>(p)),
        p_(p) {
    set_goals(std::move(goals));
  }

  State identity() const override { return State{1, 0, 0, 1}; }

  bool is_valid(const State& x) const override {
    if (x.size() != 4) return false;
    for (auto v : x) {
      if (v >= p_) return false;
    }
    const long det = static_cast<long>(x[0]) * x[3] - static_cast<long>(x[1]) * x[2];
    return ((det % p_) + p_) % p_ == 1 % p_;
  }

  void apply_into(const State& x, Move a, State& out) const override {
    out = x;
    const int k = (kShift[a] + p_) % p_;
    if (a < 2) {
      // [[a, b], [c, d]] * [[1, k], [0, 1]] = [[a, ak + b], [c, ck + d]]
      out[1] = static_cast<State::value_type>((x[0] * k + x[1]) % p_);
      out[3] = static_cast<State::value_type>((x[2] * k + x[3]) % p_);
    } else {
      // [[a, b], [c, d]] * [[1, 0], [k, 1]] = [[a + bk, b], [c + dk, d]]
      out[0] = static_cast<State::value_type>((x[0] + x[1] * k) % p_);
      out[2] = static_cast<State::value_type>((x[2] + x[3] * k) % p_);
    }
  }

  void encode_features_into(const State& x, std::span<float> out) const override {
    std::fill(out.begin(), out.end(), 0.0f);
    for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i * p_ + x[i])] = 1.0f;
  }

  std::optional<std::uint64_t> rank_space_size() const override {
    const auto p = static_cast<std::uint64_t>(p_);
    return p * p * p * p;
  }

  std::uint64_t rank(const State& x) const override {
    std::uint64_t r = 0;
    for (int i = 0; i < 4; ++i) r = r * static_cast<std::uint64_t>(p_) + x[i];
    return r;
  }

  State unrank(std::uint64_t r) const override {
    State x(4);
    for (int i = 3; i >= 0; --i) {
      x[i] = static_cast<State::value_type>(r % static_cast<std::uint64_t>(p_));
      r /= static_cast<std::uint64_t>(p_);
    }
    return x;
  }

  int p() const noexcept { return p_; }

 private:
  int p_;
};

bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

long mod_inverse(long a, long p) {
  long t = 0, new_t = 1, r = p, new_r = a;
  while (new_r != 0) {
    const long q = r / new_r;
    t = std::exchange(new_t, t - q * new_t);
    r = std::exchange(new_r, r - q * new_r);
  }
  return ((t % p) + p) % p;
}

}  // namespace

GraphSpecPtr make_sl2p(int p, std::vector<State> goals) {
  if (!is_prime(p)) throw DomainError("sl2p: p must be prime, got " + std::to_string(p));
  if (p > 65535) throw DomainError("sl2p: p too large for 16-bit residues");
  return std::make_shared<Sl2pGraph>(p, std::move(goals));
}

State sl2p_uniform(const GraphSpec& spec, Rng& rng) {
  const auto& g = dynamic_cast<const Sl2pGraph&>(spec);
  const long p = g.p();
  std::uniform_int_distribution<long> residue(0, p - 1);
  long a = 0, c = 0;
  do {
    a = residue(rng);
    c = residue(rng);
  } while (a == 0 && c == 0);
  // Solutions (b, d) of ad - bc = 1 form the line (b0, d0) + s (a, c).
  long b0 = 0, d0 = 0;
  if (a != 0) {
    d0 = mod_inverse(a, p);
  } else {
    b0 = (p - mod_inverse(c, p)) % p;
  }
  const long s = residue(rng);
  State x(4);
  x[0] = static_cast<State::value_type>(a);
  x[1] = static_cast<State::value_type>((b0 + s * a) % p);
  x[2] = static_cast<State::value_type>(c);
  x[3] = static_cast<State::value_type>((d0 + s * c) % p);
  return x;
}

}  // namespace cayley
