#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles/edit_oracles.hpp"
#include "semseq/metric.hpp"

using namespace semseq;
using semseq::testing::corpus_from_text;
using semseq::testing::reference_graph;

namespace {

// Symbols 0 = a, 1 = b, 2 = c; a and b are siblings.
SimilarityTable abc_table() {
  const double values[3][3] = {{1.0, 0.5, 0.0}, {0.5, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  return SimilarityTable(3, [&](std::size_t x, std::size_t y) { return values[x][y]; });
}

SimilarityTable identity_table(std::size_t n) {
  return SimilarityTable(n, [](std::size_t x, std::size_t y) { return x == y ? 1.0 : 0.0; });
}

std::vector<std::size_t> seq(std::initializer_list<std::size_t> s) { return s; }

}  // namespace

TEST_CASE("context kernel") {
  CHECK(context_kernel(3, 3, 2.0) == 1.0);
  // exp(-1/40.5), evaluated independently.
  CHECK(context_kernel(1, 2, 4.5) == doctest::Approx(0.9756109800648459).epsilon(1e-14));
  double last = 1.0;
  for (long d = 1; d < 60; ++d) {
    const double v = context_kernel(0, d, 4.5);
    CHECK(v < last);
    CHECK(v == context_kernel(0, -d, 4.5));
    last = v;
  }
  CHECK(last < 1e-30);
}

TEST_CASE("auto sigma is half the median length") {
  std::vector<std::size_t> odd{5, 9, 13};
  CHECK(auto_sigma(odd) == 4.5);
  std::vector<std::size_t> even{4, 6, 9, 20};
  CHECK(auto_sigma(even) == 3.75);
  CHECK_THROWS_AS(auto_sigma(std::vector<std::size_t>{}), ConfigError);
}

TEST_CASE("edit cost") {
  const auto sim = identity_table(3);
  SUBCASE("alpha 1, substitution by the same symbol is free") {
    CedEngine e(sim, 1.0, 4.5);
    CHECK(e.edit_cost({EditKind::mod, 2, 1}, seq({0, 1, 2})) == 0.0);
    CHECK(e.edit_cost({EditKind::mod, 2, 0}, seq({0, 1, 2})) == 1.0);
    CHECK(e.edit_cost({EditKind::add, 0, 0}, seq({0, 1})) == 1.0);
  }
  SUBCASE("alpha 0, inserting next to the same symbol") {
    CedEngine e(sim, 0.0, 4.5);
    CHECK(e.edit_cost({EditKind::add, 2, 0}, seq({0, 1})) == doctest::Approx(0.024389019935154077).epsilon(1e-12));
  }
  SUBCASE("alpha 0, inserting an unrelated symbol") {
    CedEngine e(sim, 0.0, 4.5);
    CHECK(e.edit_cost({EditKind::add, 1, 2}, seq({0, 1, 0})) == 1.0);
  }
  SUBCASE("deleting a nearby repeat is cheaper than an isolated symbol") {
    CedEngine e(sim, 0.0, 4.5);
    const auto s = seq({0, 1, 0, 2});
    CHECK(e.edit_cost({EditKind::del, 1, 0}, s) < e.edit_cost({EditKind::del, 4, 0}, s));
    CHECK(e.edit_cost({EditKind::del, 4, 0}, s) == 1.0);
  }
  SUBCASE("positions are validated") {
    CedEngine e(sim, 0.0, 4.5);
    CHECK_THROWS_AS(e.edit_cost({EditKind::mod, 0, 0}, seq({0})), std::out_of_range);
    CHECK_THROWS_AS(e.edit_cost({EditKind::del, 2, 0}, seq({0})), std::out_of_range);
    CHECK_NOTHROW(e.edit_cost({EditKind::add, 1, 0}, seq({0})));
    CHECK_THROWS_AS(e.edit_cost({EditKind::add, 2, 0}, seq({0})), std::out_of_range);
  }
  SUBCASE("parameters are validated") {
    CHECK_THROWS_AS(CedEngine(sim, 1.5, 1.0), ConfigError);
    CHECK_THROWS_AS(CedEngine(sim, 0.5, 0.0), ConfigError);
  }
}

TEST_CASE("edit cost stays in [0,1]") {
  const auto sim = abc_table();
  std::mt19937 rng(3);
  for (double alpha : {0.0, 0.3, 1.0}) {
    CedEngine e(sim, alpha, 1.7);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<std::size_t> s(1 + rng() % 8);
      for (auto& x : s) x = rng() % 3;
      const auto n = s.size();
      const double add = e.edit_cost({EditKind::add, rng() % (n + 1), rng() % 3}, s);
      const double mod = e.edit_cost({EditKind::mod, 1 + rng() % n, rng() % 3}, s);
      const double del = e.edit_cost({EditKind::del, 1 + rng() % n, 0}, s);
      for (double v : {add, mod, del}) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
      }
    }
  }
}

TEST_CASE("one-sided distance on a short example") {
  // sim(a, b) = 0, sigma = 4.5. Values frozen from the brute-force oracle.
  const auto sim = identity_table(2);
  CedEngine e(sim, 0.0, 4.5);
  const auto ab = seq({0, 1});
  const auto aba = seq({0, 1, 0});
  // Appending a lands after source index 2, one step from the a at index 1.
  CHECK(e.one_sided(ab, aba) == doctest::Approx(0.024389019935154077).epsilon(1e-12));
  // Deleting the final a: the other a is two steps away.
  CHECK(e.one_sided(aba, ab) == doctest::Approx(0.09404480889049038).epsilon(1e-12));
  CHECK(e.distance(ab, aba) == doctest::Approx(0.09404480889049038).epsilon(1e-12));

  oracle::CedModel model{[](int x, int y) { return x == y ? 1.0 : 0.0; }, 0.0, 4.5};
  CHECK(oracle::ced_brute_force({0, 1}, {0, 1, 0}, model) == doctest::Approx(0.024389019935154077).epsilon(1e-12));
  CHECK(oracle::ced_brute_force({0, 1, 0}, {0, 1}, model) == doctest::Approx(0.09404480889049038).epsilon(1e-12));
}

TEST_CASE("identity and empty edge cases") {
  const auto sim = abc_table();
  CedEngine e(sim, 0.0, 2.0);
  const auto s = seq({0, 2, 1, 2, 0});
  CHECK(e.one_sided(s, s) == 0.0);
  CHECK(e.distance(s, s) == 0.0);
  CHECK(e.one_sided({}, seq({0, 1})) == 2.0);
  CHECK(e.one_sided(seq({0}), {}) == 1.0);
}

TEST_CASE("alpha 1 reduces to Wagner-Fischer with similarity substitution") {
  const auto sim = abc_table();
  CedEngine e(sim, 1.0, 3.0);
  auto oracle_sim = [&](int x, int y) { return sim(x, y); };
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::size_t> a(1 + rng() % 9), b(1 + rng() % 9);
    for (auto& x : a) x = rng() % 3;
    for (auto& x : b) x = rng() % 3;
    std::vector<int> ai(a.begin(), a.end()), bi(b.begin(), b.end());
    REQUIRE(std::abs(e.one_sided(a, b) - oracle::wagner_fischer(ai, bi, oracle_sim)) <= 1e-12);
  }
}

TEST_CASE("dynamic programme matches exhaustive edit paths") {
  const auto sim = abc_table();
  auto oracle_sim = [&](int x, int y) { return sim(x, y); };
  std::mt19937 rng(5);
  for (double alpha : {0.0, 0.4}) {
    CedEngine e(sim, alpha, 1.5);
    oracle::CedModel model{oracle_sim, alpha, 1.5};
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::size_t> a(1 + rng() % 5), b(1 + rng() % 5);
      for (auto& x : a) x = rng() % 3;
      for (auto& x : b) x = rng() % 3;
      std::vector<int> ai(a.begin(), a.end()), bi(b.begin(), b.end());
      REQUIRE(std::abs(e.one_sided(a, b) - oracle::ced_brute_force(ai, bi, model)) <= 1e-12);
    }
  }
}

TEST_CASE("semi-metric properties") {
  const auto sim = abc_table();
  CedEngine e(sim, 0.0, 2.0);
  std::mt19937 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::size_t> a(1 + rng() % 10), b(1 + rng() % 10);
    for (auto& x : a) x = rng() % 3;
    for (auto& x : b) x = rng() % 3;
    const double d = e.distance(a, b);
    REQUIRE(d == e.distance(b, a));
    REQUIRE(d >= 0.0);
    REQUIRE(d <= static_cast<double>(std::max(a.size(), b.size())));
    if (a != b) REQUIRE(d > 0.0);
  }
}

TEST_CASE("context lowers insertion cost") {
  const auto sim = identity_table(3);
  CedEngine e(sim, 0.0, 2.0);
  // Inserting a next to an a versus far from any a.
  const auto near = seq({1, 0, 1, 1, 2, 2, 2, 2});
  const auto far = seq({0, 1, 2, 1, 2, 1, 2, 1});
  CHECK(e.edit_cost({EditKind::add, 2, 0}, near) < e.edit_cost({EditKind::add, 8, 0}, far));
}

TEST_CASE("distance matrix over a corpus") {
  auto c = corpus_from_text(
      "id,activities\n"
      "a,1 121 11 121 1\n"
      "b,1 122 11 122 1\n"
      "c,1 100 33 100 1\n"
      "d,1 121 11 121 1\n");
  auto r = distance_matrix(c, CedParams{});
  CHECK(r.sigma == 2.5);
  CHECK(r.cache == CacheStatus::disabled);
  const auto& m = r.matrix;
  REQUIRE(m.size() == 4);
  CHECK(m(0, 3) == 0.0);
  CHECK(m(0, 1) > 0.0);
  CHECK(m(0, 1) < m(0, 2));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(m(i, i) == 0.0);
    for (std::size_t j = 0; j < 4; ++j) CHECK(m(i, j) == m(j, i));
  }

  SUBCASE("single sequence") {
    auto one = corpus_from_text("id,activities\na,1 121 1\n");
    auto r1 = distance_matrix(one, CedParams{});
    CHECK(r1.matrix.size() == 1);
    CHECK(r1.matrix(0, 0) == 0.0);
  }
}

TEST_CASE("parallel matrix is bit-identical to sequential") {
  const auto sim = abc_table();
  CedEngine e(sim, 0.0, 3.0);
  std::mt19937 rng(99);
  std::vector<std::vector<std::size_t>> encoded(100);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    encoded[i].resize(1 + rng() % 12);
    for (auto& x : encoded[i]) x = rng() % 3;
    ids.push_back("s" + std::to_string(i));
  }
  auto seq_m = compute_matrix(encoded, ids, e, 1);
  auto par_m = compute_matrix(encoded, ids, e, 4);
  CHECK(seq_m.lower_triangle() == par_m.lower_triangle());
}

TEST_CASE("matrix cache round trip and fingerprint mismatch") {
  auto c = corpus_from_text("id,activities\na,1 121 11 121 1\nb,1 100 33 100 1\nc,1 131 22 131 1\n");
  const auto dir = std::filesystem::temp_directory_path() / "semseq_cache_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "m.bin").string();
  std::filesystem::remove(path);

  MatrixOptions opts;
  opts.cache_path = path;
  auto first = distance_matrix(c, CedParams{}, opts);
  CHECK(first.cache == CacheStatus::miss);
  auto second = distance_matrix(c, CedParams{}, opts);
  CHECK(second.cache == CacheStatus::hit);
  CHECK(second.matrix == first.matrix);

  CedParams other;
  other.sigma = 1.0;
  auto third = distance_matrix(c, other, opts);
  CHECK(third.cache == CacheStatus::mismatch);
  CHECK(third.matrix.fingerprint != first.matrix.fingerprint);

  {
    std::ofstream junk(path, std::ios::binary | std::ios::trunc);
    junk << "nope";
  }
  CHECK_THROWS_AS(distance_matrix(c, CedParams{}, opts), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("matrix CSV export") {
  DistanceMatrix m({"x", "y"});
  m.set(1, 0, 1.0 / 3.0);
  std::ostringstream out;
  write_matrix_csv(out, m);
  CHECK(out.str() == "id,x,y\nx,0,0.333333333\ny,0.333333333,0\n");
  CHECK_THROWS(DistanceMatrix::from_full({"x", "y"}, {{0, 1}, {2, 0}}));
  CHECK_THROWS(DistanceMatrix::from_full({"x", "y"}, {{0, -1}, {-1, 0}}));
}
