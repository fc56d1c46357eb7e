#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "cayley/error.hpp"
#include "cayley/group.hpp"

using namespace cayley;

namespace {

std::vector<State> all_states(const GraphSpec& spec) {
  std::vector<State> out;
  for (std::uint64_t r = 0; r < *spec.rank_space_size(); ++r) {
    auto x = spec.unrank(r);
    if (spec.is_valid(x)) out.push_back(std::move(x));
  }
  return out;
}

State random_state(const GraphSpec& spec, Rng& rng) {
  if (spec.family() == Family::kGenericPerm) return scramble(spec, rng, 200);
  return uniform_state(spec, rng);
}

std::vector<GraphSpecPtr> every_family() {
  return {make_cube3(), make_cube2(), make_sl2p(31), make_sl2p(7), make_cyclic(12),
          make_permutation_group("S5", 5, {{"s", {1, 0, 2, 3, 4}}, {"c", {1, 2, 3, 4, 0}}})};
}

}  // namespace

TEST_CASE("generator sets pair every generator with its inverse") {
  for (const auto& spec : every_family()) {
    const auto& gens = spec->generators();
    for (Move a = 0; a < static_cast<Move>(gens.size()); ++a) {
      CHECK(gens.inverse(gens.inverse(a)) == a);
    }
  }
  CHECK_THROWS_AS(GeneratorSet({"a", "b"}, {1, 1}), DomainError);
}

TEST_CASE("sl2p apply matches the matrix generators") {
  auto spec = make_sl2p(7);
  CHECK(spec->apply(spec->identity(), 0) == State{1, 1, 0, 1});
  CHECK(spec->apply(spec->identity(), 1) == State{1, 6, 0, 1});
  CHECK(spec->apply(spec->identity(), 2) == State{1, 0, 1, 1});
  CHECK(spec->apply(spec->identity(), 3) == State{1, 0, 6, 1});
  CHECK(spec->generators().name(0) == "T+1");
}

TEST_CASE("apply rejects bad input") {
  auto spec = make_sl2p(7);
  CHECK_THROWS_AS(spec->apply(State{1, 1, 1, 1}, 0), EncodingError);
  CHECK_THROWS_AS(spec->apply(State{1, 0, 0}, 0), EncodingError);
  CHECK_THROWS_AS(spec->apply(spec->identity(), 4), DomainError);
  CHECK_THROWS_AS(spec->apply(spec->identity(), -1), DomainError);
  auto cube = make_cube3();
  auto bad = cube->identity();
  bad[0] = 1;  // two copies of corner 1
  CHECK_THROWS_AS(cube->apply(bad, 0), EncodingError);
  CHECK_THROWS_AS(make_sl2p(9), DomainError);
}

TEST_CASE("inverse edge undoes every generator") {
  Rng rng(1);
  for (const auto& spec : every_family()) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = random_state(*spec, rng);
      for (Move a = 0; a < static_cast<Move>(spec->num_generators()); ++a) {
        CHECK(spec->apply(spec->apply(x, a), spec->generators().inverse(a)) == x);
      }
    }
  }
}

TEST_CASE("cube face turns have order four") {
  auto spec = make_cube3();
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = uniform_state(*spec, rng);
    for (Move a = 0; a < 12; ++a) {
      auto y = x;
      for (int k = 0; k < 4; ++k) y = spec->apply(y, a);
      CHECK(y == x);
      CHECK(spec->apply(x, a) != x);
    }
  }
}

TEST_CASE("cube3 has twelve distinct quarter turns") {
  auto spec = make_cube3();
  std::set<State> seen;
  for (Move a = 0; a < 12; ++a) seen.insert(spec->apply(spec->identity(), a));
  CHECK(seen.size() == 12);
  CHECK(spec->generators().names() ==
        std::vector<std::string>{"U", "U'", "D", "D'", "R", "R'", "L", "L'", "F", "F'", "B", "B'"});
}

TEST_CASE("group law: words followed by their formal inverse") {
  Rng rng(3);
  for (const auto& spec : every_family()) {
    std::uniform_int_distribution<int> len(0, 40);
    std::uniform_int_distribution<Move> gen(0, static_cast<Move>(spec->num_generators()) - 1);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto x = random_state(*spec, rng);
      std::vector<Move> w(static_cast<std::size_t>(len(rng)));
      for (auto& a : w) a = gen(rng);
      const auto y = spec->apply_word(x, w);
      REQUIRE(spec->apply_word(y, spec->inverse_word(w)) == x);
    }
  }
}

TEST_CASE("sl2p determinant is preserved exhaustively for small p") {
  for (int p : {2, 3, 5, 7}) {
    auto spec = make_sl2p(p);
    const auto states = all_states(*spec);
    CHECK(states.size() == static_cast<std::size_t>(p * (p * p - 1)));
    for (const auto& x : states) {
      for (Move a = 0; a < 4; ++a) {
        const auto y = spec->apply(x, a);
        const int det = (y[0] * y[3] - y[1] * y[2]) % p;
        REQUIRE(((det % p) + p) % p == 1);
      }
    }
  }
}

TEST_CASE("feature encodings") {
  SUBCASE("cube3 identity is a flattened permutation matrix") {
    auto spec = make_cube3();
    CHECK(spec->feature_dim() == 48 * 48);
    const auto f = spec->encode_features(spec->identity());
    int ones = 0, others = 0;
    for (float v : f) {
      if (v == 1.0f) ++ones;
      else if (v != 0.0f) ++others;
    }
    CHECK(ones == 48);
    CHECK(others == 0);
  }
  SUBCASE("cube2 and sl2p widths") {
    CHECK(make_cube2()->feature_dim() == 24 * 24);
    CHECK(make_sl2p(31)->feature_dim() == 4 * 31);
  }
  SUBCASE("sl2p identity is four one-hot residues") {
    auto spec = make_sl2p(5);
    const auto f = spec->encode_features(spec->identity());
    std::vector<float> expected(20, 0.0f);
    expected[0 * 5 + 1] = expected[1 * 5 + 0] = expected[2 * 5 + 0] = expected[3 * 5 + 1] = 1.0f;
    CHECK(f == expected);
  }
  SUBCASE("invalid states are rejected") {
    CHECK_THROWS_AS(make_sl2p(5)->encode_features(State{0, 0, 0, 0}), EncodingError);
  }
  SUBCASE("deterministic and fixed length") {
    auto spec = make_cube2();
    Rng rng(4);
    const auto x = uniform_state(*spec, rng);
    CHECK(spec->encode_features(x) == spec->encode_features(x));
    CHECK(spec->encode_features(x).size() == spec->feature_dim());
  }
}

TEST_CASE("sl2p features are injective exhaustively for p <= 5") {
  for (int p : {2, 3, 5}) {
    auto spec = make_sl2p(p);
    std::set<std::vector<float>> seen;
    const auto states = all_states(*spec);
    for (const auto& x : states) seen.insert(spec->encode_features(x));
    CHECK(seen.size() == states.size());
  }
}

TEST_CASE("cube3 features are collision-free over 10^6 sampled states") {
  auto spec = make_cube3();
  Rng rng(5);
  std::unordered_map<std::uint64_t, std::uint64_t> feature_to_state;
  feature_to_state.reserve(1'200'000);
  std::vector<float> f(spec->feature_dim());
  std::size_t clashes = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    const auto x = uniform_state(*spec, rng);
    spec->encode_features_into(x, f);
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (f[k] != 0.0f) h = (h ^ k) * 1099511628211ULL;
    }
    const auto sh = static_cast<std::uint64_t>(StateHash{}(x));
    auto [it, inserted] = feature_to_state.emplace(h, sh);
    if (!inserted && it->second != sh) ++clashes;
  }
  CHECK(clashes == 0);
}

TEST_CASE("scramble") {
  auto spec = make_sl2p(11);
  Rng rng(6);
  SUBCASE("zero moves returns a goal") {
    for (int i = 0; i < 20; ++i) CHECK(spec->is_goal(scramble(*spec, rng, 0)));
  }
  SUBCASE("one move stays within the goal's neighbourhood") {
    std::set<State> allowed{spec->identity()};
    for (Move a = 0; a < 4; ++a) allowed.insert(spec->apply(spec->identity(), a));
    for (int i = 0; i < 200; ++i) CHECK(allowed.count(scramble(*spec, rng, 1)) == 1);
  }
  SUBCASE("fixed seed is reproducible") {
    Rng a(42), b(42);
    for (int i = 0; i < 20; ++i) CHECK(scramble(*spec, a, 10) == scramble(*spec, b, 10));
  }
  SUBCASE("results are valid") {
    auto cube = make_cube3();
    for (int i = 0; i < 100; ++i) CHECK(cube->is_valid(scramble(*cube, rng, 30)));
  }
}

TEST_CASE("cube3 orbit invariant") {
  auto spec = make_cube3();
  const auto id = spec->identity();
  CHECK(orbit_invariant(*spec, id) == OrbitInvariant{0, 0, 0});
  CHECK_THROWS_AS(orbit_invariant(*make_cube2(), make_cube2()->identity()), DomainError);

  SUBCASE("conserved along every edge") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
      const auto x = scramble(*spec, rng, 40);
      const auto inv = orbit_invariant(*spec, x);
      for (Move a = 0; a < 12; ++a) REQUIRE(orbit_invariant(*spec, spec->apply(x, a)) == inv);
    }
  }
  SUBCASE("single-cubelet edits reach twelve classes") {
    std::set<OrbitInvariant> classes;
    Rng rng(8);
    for (int twist = 0; twist < 3; ++twist) {
      for (int flip = 0; flip < 2; ++flip) {
        for (int swap = 0; swap < 2; ++swap) {
          for (int trial = 0; trial < 3; ++trial) {
            auto x = scramble(*spec, rng, 20);
            if (twist) x = cube3_twist_corner(x, trial % 8, twist);
            if (flip) x = cube3_flip_edge(x, (trial * 5) % 12);
            if (swap) x = cube3_swap_edges(x, trial % 12, (trial + 3) % 12);
            classes.insert(orbit_invariant(*spec, x));
          }
        }
      }
    }
    CHECK(classes.size() == 12);
  }
}

TEST_CASE("permutation parity") {
  std::vector<State::value_type> id{0, 1, 2, 3}, swap{1, 0, 2, 3}, cycle{1, 2, 0, 3};
  CHECK(permutation_parity(id) == 0);
  CHECK(permutation_parity(swap) == 1);
  CHECK(permutation_parity(cycle) == 0);
}

TEST_CASE("generic permutation groups from files") {
  const auto dir = std::filesystem::temp_directory_path() / "cayley_group_test";
  std::filesystem::create_directories(dir);
  const auto gen_path = dir / "gens.txt";
  {
    std::ofstream out(gen_path);
    out << "# S4 by a transposition and a 4-cycle\n4\nswap 1 0 2 3\ncycle 1 2 3 0\n";
  }
  auto spec = load_permutation_group(gen_path);
  CHECK(spec->family() == Family::kGenericPerm);
  // swap is an involution, cycle gets an appended inverse.
  CHECK(spec->num_generators() == 3);
  CHECK(spec->generators().name(2) == "cycle'");
  CHECK(spec->generators().inverse(0) == 0);
  CHECK(spec->generators().inverse(1) == 2);
  CHECK(spec->feature_dim() == 16);
  CHECK(spec->apply(spec->identity(), 1) == State{3, 0, 1, 2});

  const auto goal_path = dir / "goals.txt";
  {
    std::ofstream out(goal_path);
    out << "0 1 2 3\n1,0,2,3\n";
  }
  auto two_goals = load_permutation_group(gen_path, goal_path);
  CHECK(two_goals->goals().size() == 2);
  {
    std::ofstream out(goal_path);
    out << "0 1 2 3\n0 1 2 3\n";
  }
  CHECK_THROWS_AS(load_permutation_group(gen_path, goal_path), DomainError);
  {
    std::ofstream out(gen_path);
    out << "3\nbad 0 0 1\n";
  }
  CHECK_THROWS_AS(load_permutation_group(gen_path), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cyclic group") {
  auto z4 = make_cyclic(4);
  CHECK(z4->num_generators() == 2);
  auto x = z4->identity();
  for (int k = 0; k < 4; ++k) x = z4->apply(x, 0);
  CHECK(x == z4->identity());
  CHECK(z4->apply(z4->apply(z4->identity(), 0), 1) == z4->identity());
}

TEST_CASE("dense ranks are perfect") {
  for (const auto& spec : {make_sl2p(5), make_cube2()}) {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
      const auto x = uniform_state(*spec, rng);
      const auto r = spec->rank(x);
      CHECK(r < *spec->rank_space_size());
      CHECK(spec->unrank(r) == x);
    }
  }
  CHECK(*make_cube2()->rank_space_size() == 3'674'160);
  CHECK_FALSE(make_cube3()->rank_space_size().has_value());
}

TEST_CASE("state text round-trip") {
  const State x{3, 0, 65535, 12};
  CHECK(parse_state(to_string(x)) == x);
  CHECK(parse_state(" 3 0,65535  12 ") == x);
  CHECK_THROWS_AS(parse_state("1,x"), FormatError);
  CHECK_THROWS_AS(parse_state("70000"), FormatError);
}
