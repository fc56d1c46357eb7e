#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>

#include "cayley/diffusion.hpp"
#include "cayley/error.hpp"
#include "cayley/oracle.hpp"

using namespace cayley;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cayley_oracle_test_" + name);
}

/// Vertex k of the n-cycle: k applications of "+1" to the identity.
State cycle_vertex(const GraphSpec& spec, int k) {
  auto x = spec.identity();
  for (int i = 0; i < k; ++i) x = spec.apply(x, 0);
  return x;
}

/// Counts matrices with determinant 1 mod p by brute force over Z_p^4.
std::uint64_t count_sl2(int p) {
  std::uint64_t n = 0;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int c = 0; c < p; ++c)
        for (int d = 0; d < p; ++d) n += ((a * d - b * c) % p + p) % p == 1;
  return n;
}

void check_triangle(const GraphSpec& spec, const DistanceTable& table, std::uint64_t r) {
  const int d = table.by_rank(r);
  if (d == DistanceTable::kUnreached) return;
  const auto x = spec.unrank(r);
  bool has_closer = d == 0;
  for (Move a = 0; a < static_cast<Move>(spec.num_generators()); ++a) {
    const int e = table.by_rank(spec.rank(spec.apply(x, a)));
    REQUIRE(e != DistanceTable::kUnreached);
    REQUIRE(std::abs(d - e) <= 1);
    has_closer = has_closer || e == d - 1;
  }
  REQUIRE(has_closer);
}

}  // namespace

TEST_CASE("sl2p component sizes match the group order") {
  for (int p : {2, 3, 5, 7, 11}) {
    CAPTURE(p);
    const auto table = bfs_distances(*make_sl2p(p));
    const auto order = static_cast<std::uint64_t>(p) * (p * p - 1);
    CHECK(table.count() == order);
    CHECK(count_sl2(p) == order);
    CHECK(std::accumulate(table.histogram().begin(), table.histogram().end(), std::uint64_t{0}) ==
          order);
  }
  const auto t5 = bfs_distances(*make_sl2p(5));
  CHECK(t5.count() == 120);
  CHECK(t5.diameter() == 6);
  CHECK(t5.histogram()[0] == 1);
  CHECK(t5.histogram()[1] == 4);
}

TEST_CASE("distance tables are triangle-consistent") {
  for (int p : {2, 3, 5, 7, 11}) {
    auto spec = make_sl2p(p);
    const auto table = bfs_distances(*spec);
    for (std::uint64_t r = 0; r < table.rank_space(); ++r) check_triangle(*spec, table, r);
  }
  auto z = make_cyclic(9);
  const auto tz = bfs_distances(*z);
  CHECK(tz.diameter() == 4);
  for (std::uint64_t r = 0; r < tz.rank_space(); ++r) check_triangle(*z, tz, r);
}

TEST_CASE("cube2 full BFS") {
  auto spec = make_cube2();
  const auto table = bfs_distances(*spec);
  CHECK(table.count() == 3674160);
  CHECK(table.diameter() == 14);
  const std::vector<std::uint64_t> histogram{1,      6,      27,      120,     534,
                                             2256,   8969,   33058,   114149,  360508,
                                             930588, 1350852, 782536, 90280,   276};
  CHECK(table.histogram() == histogram);
  Rng rng(11);
  std::uniform_int_distribution<std::uint64_t> pick(0, table.rank_space() - 1);
  for (int i = 0; i < 20000; ++i) check_triangle(*spec, table, pick(rng));
}

TEST_CASE("distance table budget and families") {
  CHECK_THROWS_AS(bfs_distances(*make_cube3()), DomainError);
  CHECK_THROWS_AS(bfs_distances(*make_sl2p(31), 1000), ResourceError);
  auto spec = make_sl2p(7);
  const auto table = bfs_distances(*spec);
  CHECK(table.distance(*spec, spec->identity()) == 0);
  CHECK(table.distance(*spec, spec->apply(spec->identity(), 2)) == 1);
}

TEST_CASE("distance table save and load") {
  auto spec = make_sl2p(11);
  const auto table = bfs_distances(*spec);
  const auto path = temp_file("sl2p11.cddt");
  save_distance_table(path, table);
  const auto back = load_distance_table(path);
  CHECK(back.label() == table.label());
  CHECK(back.raw() == table.raw());
  CHECK(back.diameter() == table.diameter());
  CHECK(back.mean() == doctest::Approx(table.mean()));

  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 3);
  CHECK_THROWS_AS(load_distance_table(path), FormatError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "XXXXjunk";
  }
  CHECK_THROWS_AS(load_distance_table(path), FormatError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_distance_table(path), FormatError);
}

TEST_CASE("exact forward marginals") {
  SUBCASE("single goal and its neighbours") {
    auto spec = make_sl2p(7);
    const auto tab = exact_probabilities(*spec, 3);
    const auto id = spec->identity();
    CHECK(tab.p(0, id) == 1.0);
    for (Move a = 0; a < 4; ++a) CHECK(tab.p(1, spec->apply(id, a)) == doctest::Approx(0.25));
    CHECK(tab.p(1, id) == 0.0);
  }
  SUBCASE("Z4 two steps") {
    auto spec = make_cyclic(4);
    const auto tab = exact_probabilities(*spec, 2);
    const std::vector<double> expected{0.5, 0.0, 0.5, 0.0};
    for (int k = 0; k < 4; ++k) CHECK(tab.p(2, cycle_vertex(*spec, k)) == expected[static_cast<std::size_t>(k)]);
  }
  SUBCASE("mass is conserved") {
    for (auto spec : {make_sl2p(5), make_cyclic(12), make_cube2()}) {
      if (spec->family() == Family::kCube2) {
        CHECK_THROWS_AS(exact_probabilities(*spec, 2), ResourceError);
        continue;
      }
      const auto tab = exact_probabilities(*spec, 40);
      for (int t = 0; t <= 40; ++t) {
        double total = 0.0;
        for (std::size_t i = 0; i < tab.size(); ++i) total += tab.p_by_index(t, i);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("exact scores") {
  auto spec = make_sl2p(5);
  const auto tab = exact_probabilities(*spec, 12);
  const auto id = spec->identity();
  const auto x = spec->apply(id, 0);
  // T-1 takes x back to the goal.
  CHECK(exact_score(tab, *spec, x, 1, 1) == doctest::Approx(tab.p(0, id) / tab.p(1, x)));
  CHECK(exact_score(tab, *spec, x, 1, 1) == doctest::Approx(4.0));
  CHECK(exact_score(tab, *spec, x, 1, 0) == 0.0);
  CHECK_THROWS_AS(exact_score(tab, *spec, id, 1, 0), DomainError);
  CHECK_THROWS_AS(exact_score(tab, *spec, x, 0, 0), DomainError);
  CHECK_THROWS_AS(exact_score(tab, *spec, x, 13, 0), DomainError);

  // The scores of a state sum to |S| because the generators are closed under inverse.
  for (int t = 1; t <= 12; ++t) {
    for (std::size_t i = 0; i < tab.size(); ++i) {
      const auto& s = tab.states()[i];
      if (tab.p_by_index(t, i) == 0.0) continue;
      double sum = 0.0;
      for (Move a = 0; a < 4; ++a) sum += exact_score(tab, *spec, s, t, a);
      REQUIRE(sum == doctest::Approx(4.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact scores approach one near stationarity") {
  auto spec = make_sl2p(3);
  const auto tab = exact_probabilities(*spec, 200);
  for (const auto& x : tab.states()) {
    for (Move a = 0; a < 4; ++a) CHECK(std::abs(exact_score(tab, *spec, x, 200, a) - 1.0) < 1e-3);
  }
}

TEST_CASE("exact loss minimum matches a Monte Carlo estimate") {
  auto z4 = make_cyclic(4);
  const auto t4 = exact_probabilities(*z4, 1);
  CHECK(exact_loss_minimum(t4, *z4) == doctest::Approx(2.0 - 2.0 * std::log(2.0)));

  auto spec = make_sl2p(5);
  const int T = 6;
  const auto tab = exact_probabilities(*spec, T);
  Rng rng(12);
  const int n = 20000;
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& traj : sample_trajectories(*spec, T, n, ForwardProcess::uniform(), rng)) {
    double l = 0.0;
    for (int t = 1; t <= T; ++t) {
      const auto& xt = traj.states[static_cast<std::size_t>(t)];
      const auto& prev = traj.states[static_cast<std::size_t>(t - 1)];
      for (Move a = 0; a < 4; ++a) {
        l += exact_score(tab, *spec, xt, t, a);
        l -= std::log(exact_score(tab, *spec, spec->apply(prev, a), t, spec->generators().inverse(a)));
      }
    }
    sum += l;
    sum_sq += l * l;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  const double exact = exact_loss_minimum(tab, *spec);
  CHECK(exact < T * 4.0);
  CHECK(std::abs(mean - exact) < 4 * se);
}

TEST_CASE("euclid_solve examples") {
  CHECK(euclid_solve({1, 0, 0, 1}).word.empty());
  CHECK(euclid_solve({1, 3, 0, 1}).word == std::vector<Move>{0, 0, 0});
  CHECK(euclid_solve({2, 1, 1, 1}).word == std::vector<Move>{0, 2});
  CHECK(word_product(std::vector<Move>{0, 2}) == IntMatrix2{2, 1, 1, 1});
  const IntMatrix2 minus{-1, 0, 0, -1};
  const auto w = euclid_solve(minus).word;
  CHECK_FALSE(w.empty());
  CHECK(word_product(w) == minus);
  CHECK_THROWS_AS(euclid_solve({2, 0, 0, 1}), DomainError);
  CHECK_THROWS_AS(euclid_solve({1, 1, 1, 1}), DomainError);
}

TEST_CASE("euclid_solve round-trips random words") {
  Rng rng(13);
  std::uniform_int_distribution<int> length(0, 50), gen(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Move> word(static_cast<std::size_t>(length(rng)));
    for (auto& g : word) g = static_cast<Move>(gen(rng));
    const auto m = word_product(word);
    const auto solved = euclid_solve(m);
    REQUIRE(word_product(solved.word) == m);
    const auto& maxima = solved.division_maxima;
    for (std::size_t i = 1; i < maxima.size(); ++i) REQUIRE(maxima[i] < maxima[i - 1]);
  }
}

TEST_CASE("euclid_solve handles large entries exactly") {
  // Consecutive Fibonacci numbers give the longest Euclidean chains.
  BigInt f0 = 1, f1 = 1;
  for (int i = 0; i < 150; ++i) {
    BigInt f2 = f0 + f1;
    f0 = f1;
    f1 = f2;
  }
  // [[f_{n+1}, f_n], [f_n, f_{n-1}]] has determinant (-1)^n; fix the sign
  // by negating a column when needed.
  IntMatrix2 m{f1, f0, f0, f1 - f0};
  if (m.a * m.d - m.b * m.c != 1) m = {f1, -f0, f0, -(f1 - f0)};
  REQUIRE(m.a * m.d - m.b * m.c == 1);
  const auto solved = euclid_solve(m);
  CHECK(word_product(solved.word) == m);
  CHECK(solved.division_maxima.size() > 100);
  CHECK_THROWS_AS(euclid_solve({BigInt(1) << 40, 1, (BigInt(1) << 40) - 1, 1}, 1000), ResourceError);
}
