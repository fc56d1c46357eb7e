#include <array>
#include <numeric>

#include "cayley/error.hpp"
#include "families.hpp"

namespace cayley {
namespace {

struct Vec3 {
  int v[3];
  friend bool operator==(const Vec3& a, const Vec3& b) {
    return a.v[0] == b.v[0] && a.v[1] == b.v[1] && a.v[2] == b.v[2];
  }
};

int det3(const Vec3& a, const Vec3& b, const Vec3& c) {
  return a.v[0] * (b.v[1] * c.v[2] - b.v[2] * c.v[1]) -
         a.v[1] * (b.v[0] * c.v[2] - b.v[2] * c.v[0]) +
         a.v[2] * (b.v[0] * c.v[1] - b.v[1] * c.v[0]);
}

Vec3 axis_vector(int axis, int sign) {
  Vec3 e{{0, 0, 0}};
  e.v[axis] = sign;
  return e;
}

// Quarter rotation about coordinate axis `axis`; dir = +1 is counterclockwise
// seen from the tip of +e_axis.
Vec3 rotate(const Vec3& p, int axis, int dir) {
  const int j = (axis + 1) % 3;
  const int k = (axis + 2) % 3;
  Vec3 out = p;
  out.v[j] = -dir * p.v[k];
  out.v[k] = dir * p.v[j];
  return out;
}

// A cubie slot: its position and its stickers' outward normals in reference
// order. Corners list the U/D sticker first and then the remaining two in
// right-handed cyclic order; edges list the U/D sticker first when present,
// otherwise the F/B sticker.
struct Slot {
  Vec3 pos;
  std::array<Vec3, 3> normals;
  int n_stickers;
};

struct Face {
  const char* name;
  int axis;
  int sign;
};

// U=+z, D=-z, R=+x, L=-x, F=+y, B=-y.
constexpr std::array<Face, 6> kFaces = {{
    {"U", 2, 1}, {"D", 2, -1}, {"R", 0, 1}, {"L", 0, -1}, {"F", 1, 1}, {"B", 1, -1},
}};

std::vector<Slot> corner_slots() {
  std::vector<Slot> slots;
  for (int x : {1, -1}) {
    for (int y : {1, -1}) {
      for (int z : {1, -1}) {
        Slot s{{{x, y, z}}, {}, 3};
        s.normals[0] = axis_vector(2, z);
        s.normals[1] = axis_vector(0, x);
        s.normals[2] = axis_vector(1, y);
        if (det3(s.normals[0], s.normals[1], s.normals[2]) < 0) {
          std::swap(s.normals[1], s.normals[2]);
        }
        slots.push_back(s);
      }
    }
  }
  // The last slot is (-1,-1,-1): the DLB corner held fixed by cube2.
  return slots;
}

std::vector<Slot> edge_slots() {
  std::vector<Slot> slots;
  for (int x = -1; x <= 1; ++x) {
    for (int y = -1; y <= 1; ++y) {
      for (int z = -1; z <= 1; ++z) {
        const int zeros = (x == 0) + (y == 0) + (z == 0);
        if (zeros != 1) continue;
        Slot s{{{x, y, z}}, {}, 2};
        if (z != 0) {
          s.normals[0] = axis_vector(2, z);
          s.normals[1] = x != 0 ? axis_vector(0, x) : axis_vector(1, y);
        } else {
          s.normals[0] = axis_vector(1, y);
          s.normals[1] = axis_vector(0, x);
        }
        slots.push_back(s);
      }
    }
  }
  return slots;
}

// Effect of one quarter turn on one kind of cubie: slot s goes to target[s]
// and its orientation increases by shift[s].
struct PieceMove {
  std::vector<int> target;
  std::vector<int> shift;
};

PieceMove piece_move(const std::vector<Slot>& slots, int axis, int sign, int dir) {
  PieceMove m;
  const auto n = slots.size();
  m.target.resize(n);
  m.shift.assign(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& slot = slots[s];
    if (slot.pos.v[axis] != sign) {
      m.target[s] = static_cast<int>(s);
      continue;
    }
    const Vec3 dest = rotate(slot.pos, axis, dir);
    int t = -1;
    for (std::size_t u = 0; u < n; ++u) {
      if (slots[u].pos == dest) t = static_cast<int>(u);
    }
    const Vec3 ref = rotate(slot.normals[0], axis, dir);
    int d = -1;
    for (int j = 0; j < slot.n_stickers; ++j) {
      if (slots[t].normals[j] == ref) d = j;
    }
    // Remaining stickers must follow the same cyclic shift.
    for (int j = 0; j < slot.n_stickers; ++j) {
      const Vec3 moved = rotate(slot.normals[j], axis, dir);
      if (!(slots[t].normals[(j + d) % slot.n_stickers] == moved)) {
        throw std::logic_error("cube geometry: inconsistent sticker order");
      }
    }
    m.target[s] = t;
    m.shift[s] = d;
  }
  return m;
}

struct CubeMove {
  PieceMove corners;
  PieceMove edges;
};

class CubeGraph final : public GraphSpec {
 public:
  CubeGraph(bool full, GeneratorSet gens, std::vector<CubeMove> moves, std::vector<State> goals)
      : GraphSpec(full ? Family::kCube3 : Family::kCube2, full ? "cube3" : "cube2",
                  std::move(gens), full ? kCube3Length : 2 * kCorners,
                  full ? 48 * 48 : 24 * 24),
        full_(full),
        moves_(std::move(moves)) {
    set_goals(std::move(goals));
  }

  State identity() const override {
    State x(state_length(), 0);
    for (int i = 0; i < kCorners; ++i) x[corner_perm_at() + i] = static_cast<State::value_type>(i);
    if (full_) {
      for (int i = 0; i < kEdges; ++i) x[kCube3EdgePerm + i] = static_cast<State::value_type>(i);
    }
    return x;
  }

  bool is_valid(const State& x) const override {
    if (x.size() != state_length()) return false;
    if (!is_perm(x, corner_perm_at(), kCorners)) return false;
    for (int i = 0; i < kCorners; ++i) {
      if (x[corner_twist_at() + i] > 2) return false;
    }
    if (full_) {
      if (!is_perm(x, kCube3EdgePerm, kEdges)) return false;
      for (int i = 0; i < kEdges; ++i) {
        if (x[kCube3EdgeFlip + i] > 1) return false;
      }
    } else {
      if (x[kCorners - 1] != kCorners - 1 || x[corner_twist_at() + kCorners - 1] != 0) {
        return false;
      }
    }
    return true;
  }

  void apply_into(const State& x, Move a, State& out) const override {
    out = x;
    const auto& m = moves_[static_cast<std::size_t>(a)];
    const int cp = corner_perm_at(), ct = corner_twist_at();
    for (int s = 0; s < kCorners; ++s) {
      const int t = m.corners.target[s];
      out[cp + t] = x[cp + s];
      out[ct + t] = static_cast<State::value_type>((x[ct + s] + m.corners.shift[s]) % 3);
    }
    if (full_) {
      for (int s = 0; s < kEdges; ++s) {
        const int t = m.edges.target[s];
        out[kCube3EdgePerm + t] = x[kCube3EdgePerm + s];
        out[kCube3EdgeFlip + t] =
            static_cast<State::value_type>((x[kCube3EdgeFlip + s] + m.edges.shift[s]) % 2);
      }
    }
  }

  // Facet one-hot: feature (label, position) is 1 when the sticker carrying
  // `label` in the solved cube currently sits at `position`.
  void encode_features_into(const State& x, std::span<float> out) const override {
    std::fill(out.begin(), out.end(), 0.0f);
    const std::size_t n_facets = full_ ? 48 : 24;
    const int cp = corner_perm_at(), ct = corner_twist_at();
    for (int s = 0; s < kCorners; ++s) {
      const int c = x[cp + s], o = x[ct + s];
      for (int j = 0; j < 3; ++j) {
        const std::size_t label = static_cast<std::size_t>(3 * c + (j - o + 3) % 3);
        const std::size_t pos = static_cast<std::size_t>(3 * s + j);
        out[label * n_facets + pos] = 1.0f;
      }
    }
    if (!full_) return;
    for (int s = 0; s < kEdges; ++s) {
      const int c = x[kCube3EdgePerm + s], o = x[kCube3EdgeFlip + s];
      for (int j = 0; j < 2; ++j) {
        const std::size_t label = static_cast<std::size_t>(24 + 2 * c + (j - o + 2) % 2);
        const std::size_t pos = static_cast<std::size_t>(24 + 2 * s + j);
        out[label * n_facets + pos] = 1.0f;
      }
    }
  }

  std::optional<std::uint64_t> rank_space_size() const override {
    if (full_) return std::nullopt;
    return kPermCount * kTwistCount;
  }

  // cube2 rank: Lehmer code of the 7 free corners, then base-3 twists of the
  // first 6 slots (the 7th twist is fixed by the zero-sum rule).
  std::uint64_t rank(const State& x) const override {
    if (full_) return GraphSpec::rank(x);
    int twist_sum = 0;
    for (int i = 0; i < kCorners; ++i) twist_sum += x[kCorners + i];
    if (twist_sum % 3 != 0) {
      throw DomainError("cube2: state lies outside the solvable orbit (twist sum != 0 mod 3)");
    }
    std::uint64_t perm_rank = 0;
    for (int i = 0; i < 7; ++i) {
      int smaller = 0;
      for (int j = i + 1; j < 7; ++j) smaller += x[j] < x[i];
      perm_rank = perm_rank * static_cast<std::uint64_t>(7 - i) + static_cast<std::uint64_t>(smaller);
    }
    std::uint64_t twist_rank = 0;
    for (int i = 5; i >= 0; --i) twist_rank = twist_rank * 3 + x[kCorners + i];
    return perm_rank * kTwistCount + twist_rank;
  }

  State unrank(std::uint64_t r) const override {
    if (full_) return GraphSpec::unrank(r);
    if (r >= kPermCount * kTwistCount) throw DomainError("cube2: rank out of range");
    State x = identity();
    std::uint64_t twist_rank = r % kTwistCount;
    std::uint64_t perm_rank = r / kTwistCount;
    std::array<int, 7> digits{};
    for (int i = 6; i >= 0; --i) {
      digits[i] = static_cast<int>(perm_rank % static_cast<std::uint64_t>(7 - i));
      perm_rank /= static_cast<std::uint64_t>(7 - i);
    }
    std::vector<int> pool(7);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < 7; ++i) {
      x[i] = static_cast<State::value_type>(pool[digits[i]]);
      pool.erase(pool.begin() + digits[i]);
    }
    int sum = 0;
    for (int i = 0; i < 6; ++i) {
      x[kCorners + i] = static_cast<State::value_type>(twist_rank % 3);
      sum += x[kCorners + i];
      twist_rank /= 3;
    }
    x[kCorners + 6] = static_cast<State::value_type>((3 - sum % 3) % 3);
    return x;
  }

  bool full() const noexcept { return full_; }

 private:
  static constexpr std::uint64_t kPermCount = 5040;
  static constexpr std::uint64_t kTwistCount = 729;

  int corner_perm_at() const noexcept { return 0; }
  int corner_twist_at() const noexcept { return full_ ? kCube3CornerTwist : kCorners; }

  static bool is_perm(const State& x, int offset, int n) {
    std::array<bool, 12> seen{};
    for (int i = 0; i < n; ++i) {
      const int v = x[offset + i];
      if (v >= n || seen[v]) return false;
      seen[v] = true;
    }
    return true;
  }

  bool full_;
  std::vector<CubeMove> moves_;
};

GraphSpecPtr build_cube(bool full, std::vector<State> goals) {
  const auto corners = corner_slots();
  const auto edges = edge_slots();
  std::vector<std::string> names;
  std::vector<Move> inverse;
  std::vector<CubeMove> moves;
  for (const auto& face : kFaces) {
    if (!full && !(face.sign == 1)) continue;  // cube2 keeps U, R, F only
    for (int quarter = 0; quarter < 2; ++quarter) {
      // Clockwise seen from outside the face is a negative rotation about
      // the outward normal.
      const int dir = quarter == 0 ? -face.sign : face.sign;
      names.push_back(std::string(face.name) + (quarter == 0 ? "" : "'"));
      const auto idx = static_cast<Move>(moves.size());
      inverse.push_back(quarter == 0 ? idx + 1 : idx - 1);
      moves.push_back({piece_move(corners, face.axis, face.sign, dir),
                       piece_move(edges, face.axis, face.sign, dir)});
    }
  }
  return std::make_shared<CubeGraph>(full, GeneratorSet(std::move(names), std::move(inverse)),
                                     std::move(moves), std::move(goals));
}

const CubeGraph& as_cube3(const GraphSpec& spec) {
  const auto* cube = dynamic_cast<const CubeGraph*>(&spec);
  if (!cube || !cube->full()) {
    throw DomainError(spec.label() + ": operation requires the cube3 family");
  }
  return *cube;
}

}  // namespace

GraphSpecPtr make_cube3(std::vector<State> goals) { return build_cube(true, std::move(goals)); }

GraphSpecPtr make_cube2(std::vector<State> goals) { return build_cube(false, std::move(goals)); }

State cube_uniform(const GraphSpec& spec, Rng& rng) {
  const auto& cube = dynamic_cast<const CubeGraph&>(spec);
  if (!cube.full()) {
    std::uniform_int_distribution<std::uint64_t> pick(0, *cube.rank_space_size() - 1);
    return cube.unrank(pick(rng));
  }
  State x = cube.identity();
  auto* cp = x.data() + kCube3CornerPerm;
  auto* ep = x.data() + kCube3EdgePerm;
  std::shuffle(cp, cp + kCorners, rng);
  std::shuffle(ep, ep + kEdges, rng);
  const int cpar = permutation_parity({cp, static_cast<std::size_t>(kCorners)});
  const int epar = permutation_parity({ep, static_cast<std::size_t>(kEdges)});
  if (cpar != epar) std::swap(ep[0], ep[1]);
  std::uniform_int_distribution<int> twist(0, 2), flip(0, 1);
  int tsum = 0, fsum = 0;
  for (int i = 0; i < kCorners - 1; ++i) {
    x[kCube3CornerTwist + i] = static_cast<State::value_type>(twist(rng));
    tsum += x[kCube3CornerTwist + i];
  }
  x[kCube3CornerTwist + kCorners - 1] = static_cast<State::value_type>((3 - tsum % 3) % 3);
  for (int i = 0; i < kEdges - 1; ++i) {
    x[kCube3EdgeFlip + i] = static_cast<State::value_type>(flip(rng));
    fsum += x[kCube3EdgeFlip + i];
  }
  x[kCube3EdgeFlip + kEdges - 1] = static_cast<State::value_type>(fsum % 2);
  return x;
}

OrbitInvariant orbit_invariant(const GraphSpec& spec, const State& x) {
  as_cube3(spec).validate(x);
  OrbitInvariant inv;
  for (int i = 0; i < kCorners; ++i) inv.corner_twist += x[kCube3CornerTwist + i];
  for (int i = 0; i < kEdges; ++i) inv.edge_flip += x[kCube3EdgeFlip + i];
  inv.corner_twist %= 3;
  inv.edge_flip %= 2;
  const auto v = x.values();
  inv.parity = permutation_parity(v.subspan(kCube3CornerPerm, kCorners)) ^
               permutation_parity(v.subspan(kCube3EdgePerm, kEdges));
  return inv;
}

State cube3_twist_corner(const State& x, int slot, int amount) {
  State y = x;
  auto& t = y[kCube3CornerTwist + slot];
  t = static_cast<State::value_type>((t + amount % 3 + 3) % 3);
  return y;
}

State cube3_flip_edge(const State& x, int slot) {
  State y = x;
  y[kCube3EdgeFlip + slot] ^= 1;
  return y;
}

State cube3_swap_edges(const State& x, int slot_a, int slot_b) {
  State y = x;
  std::swap(y[kCube3EdgePerm + slot_a], y[kCube3EdgePerm + slot_b]);
  std::swap(y[kCube3EdgeFlip + slot_a], y[kCube3EdgeFlip + slot_b]);
  return y;
}

}  // namespace cayley
