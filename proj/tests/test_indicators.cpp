#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles/motif_oracles.hpp"
#include "semseq/indicators.hpp"

using namespace semseq;
using semseq::testing::corpus_from_text;
using semseq::testing::reference_graph;

namespace {

using oracle::Adjacency;
using oracle::from_mask;
using oracle::permute;

void check_keys_against_orbits(std::size_t n, bool loops) {
  const auto r = oracle::check_keys_against_orbits(n, loops, [](const Adjacency& a) { return canonical_key(a).str(); });
  CHECK(r.consistent);
  CHECK(r.keys == r.classes);
}

bool isomorphic_oracle(const Adjacency& a, const Adjacency& b) { return oracle::isomorphic(a, b); }

Adjacency pattern_graph(std::span<const ConceptId> s) {
  std::vector<ConceptId> order;
  for (auto a : s) {
    if (std::find(order.begin(), order.end(), a) == order.end()) order.push_back(a);
  }
  auto idx = [&](ConceptId a) { return static_cast<std::size_t>(std::find(order.begin(), order.end(), a) - order.begin()); };
  Adjacency g(order.size(), std::vector<bool>(order.size(), false));
  for (std::size_t k = 0; k + 1 < s.size(); ++k) g[idx(s[k])][idx(s[k + 1])] = true;
  return g;
}

}  // namespace

TEST_CASE("interval binning") {
  IntervalBinning b;
  CHECK(b.index(1) == 1);
  CHECK(b.index(3) == 1);
  CHECK(b.index(5) == 1);
  CHECK(b.index(6) == 2);
  CHECK(b.index(7) == 2);
  CHECK(b.index(8) == 3);
  for (std::size_t n = 3; n < 60; ++n) {
    const double expect = std::max(1.0, std::ceil((static_cast<double>(n) - 3.0) / 2.0));
    REQUIRE(b.index(n) == static_cast<int>(expect));
    REQUIRE(b.describe(b.index(n)).size() > 0);
  }
  CHECK(b.describe(1) == "1-5");
  CHECK(b.describe(3) == "8-9");

  auto c = parse_binning("3,7");
  CHECK(c.index(1) == 0);
  CHECK(c.index(3) == 0);
  CHECK(c.index(4) == 1);
  CHECK(c.index(8) == 2);
  CHECK(c.describe(1) == "4-7");
  CHECK(c.describe(2) == "8+");
  CHECK_THROWS_AS(parse_binning("3,3"), ConfigError);
  CHECK_THROWS_AS(parse_binning("x"), ConfigError);
}

TEST_CASE("length distribution") {
  auto c = corpus_from_text("id,activities\na,1 100 1\nb,1 121 11 121 1\nc,1 100 33 100 34 100 1\n");
  auto d = length_distribution(c);
  // Lengths 3, 5, 7 map to 1, 1, 2.
  REQUIRE(d.histogram.bins.size() == 2);
  CHECK(d.histogram.bins[0] == std::pair<std::string, std::size_t>{"1", 2});
  CHECK(d.histogram.bins[1] == std::pair<std::string, std::size_t>{"2", 1});
  CHECK(d.histogram.total == 3);
  CHECK(d.poisson_lambda == doctest::Approx(4.0 / 3.0));

  SUBCASE("empty bins are kept") {
    auto e = corpus_from_text("id,activities\na,1 100 1\nb,1 100 33 100 34 100 33 100 1\n");
    auto h = length_distribution(e).histogram;
    REQUIRE(h.bins.size() == 3);
    CHECK(h.bins[1].second == 0);
  }
  SUBCASE("constant sample") {
    auto e = corpus_from_text("id,activities\na,1 100 33 100 1 121\nb,1 121 33 121 1 100\n");
    CHECK(length_distribution(e).poisson_lambda == 2.0);
  }
}

TEST_CASE("Poisson MLE recovers the generating rate") {
  std::mt19937_64 rng(136);
  std::poisson_distribution<int> pois(1.36);
  std::vector<int> k(10000);
  for (auto& x : k) x = pois(rng);
  CHECK(std::abs(poisson_mle(k) - 1.36) <= 0.05);

  // Through a corpus: breakpoints 1,2,3,... make the interval index n - 1.
  IntervalBinning b;
  for (std::size_t i = 1; i < 40; ++i) b.breakpoints.push_back(i);
  std::ostringstream csv;
  csv << "id,activities\n";
  for (std::size_t i = 0; i < 2000; ++i) {
    csv << 'p' << i << ',';
    const int len = pois(rng) + 1;
    for (int j = 0; j < len; ++j) csv << (j ? " " : "") << (j % 2 ? 100 : 1);
    csv << '\n';
  }
  auto c = corpus_from_text(csv.str());
  auto d = length_distribution(c, b);
  double mean = 0;
  for (const auto& s : c.sequences()) mean += static_cast<double>(s.size() - 1);
  CHECK(d.poisson_lambda == doctest::Approx(mean / 2000.0));
}

TEST_CASE("state distribution and Zipf fit") {
  auto c = corpus_from_text("id,activities\na,1 100\nb,1 100\n");
  auto d = state_distribution(c);
  REQUIRE(d.ranked.size() == 2);
  CHECK(d.ranked[0].count == 2);
  CHECK(d.ranked[1].count == 2);
  CHECK(d.ranked[0].id == 1);  // ties by id
  CHECK_FALSE(d.zipf);
  CHECK_FALSE(d.notice.empty());

  std::vector<std::size_t> exact;
  for (std::size_t r = 1; r <= 20; ++r) exact.push_back(1000 / r);
  auto fit = zipf_fit(exact);
  REQUIRE(fit);
  CHECK(std::abs(fit->slope + 1.0) <= 0.02);
  CHECK(fit->r2 >= 0.99);

  CHECK_FALSE(zipf_fit(std::vector<std::size_t>{5, 0, 3}));

  auto one = state_distribution(corpus_from_text("id,activities\na,1\nb,1\n"));
  CHECK_FALSE(one.zipf);
  CHECK(one.total == 2);
}

TEST_CASE("state distribution at category level") {
  auto c = corpus_from_text("id,activities\nsam,1 100 131 11 100 1\n");
  auto d = state_distribution(c, CategoryLevel{});
  std::map<ConceptId, std::size_t> m;
  for (auto s : d.ranked) m[s.id] = s.count;
  CHECK(m == std::map<ConceptId, std::size_t>{{1000, 2}, {1110, 2}, {1122, 1}, {1001, 1}});
}

TEST_CASE("origin-destination matrix") {
  auto c = corpus_from_text("id,activities\na,1 11 1\nsam,1 100 131 11 100 1\n");
  auto stops = od_matrix(c, true);
  CHECK(stops.concepts == std::vector<ConceptId>{1, 11});
  CHECK(stops.at(1, 11) == 2);
  CHECK(stops.at(11, 1) == 2);
  CHECK(stops.total() == 4);

  auto all = od_matrix(c, false);
  CHECK(all.total() == 2 + 5);
  CHECK(all.at(100, 131) == 1);

  SUBCASE("conservation on random corpora") {
    std::vector<ConceptId> leaves;
    for (const auto& n : reference_graph()->nodes()) {
      if (n.kind == ConceptKind::stop || n.kind == ConceptKind::move) leaves.push_back(n.id);
    }
    std::mt19937 rng(2);
    std::ostringstream csv;
    csv << "id,activities\n";
    for (int i = 0; i < 300; ++i) {
      csv << 'p' << i << ',';
      const int len = 1 + static_cast<int>(rng() % 10);
      for (int k = 0; k < len; ++k) csv << (k ? " " : "") << leaves[rng() % leaves.size()];
      csv << '\n';
    }
    auto r = corpus_from_text(csv.str());
    for (bool stops_only : {false, true}) {
      for (const AggregationLevel& level : {AggregationLevel{LeafLevel{}}, AggregationLevel{CategoryLevel{}}}) {
        auto m = od_matrix(r, stops_only, level);
        std::size_t expect = 0;
        for (const auto& s : r.sequences()) {
          auto a = stops_only ? stop_projection(r.graph(), s.activities) : s.activities;
          a = aggregate_activities(r.graph(), a, level);
          if (!a.empty()) expect += a.size() - 1;
        }
        CHECK(m.total() == expect);
      }
    }
  }
}

TEST_CASE("daily patterns") {
  std::vector<ConceptId> a{1, 11, 1}, b{2, 33, 2};
  CHECK(daily_pattern(a) == daily_pattern(b));
  CHECK(daily_pattern(a).nodes == 2);
  CHECK(daily_pattern(a).edges == 2);

  std::vector<ConceptId> single{1};
  auto k = daily_pattern(single);
  CHECK(k.nodes == 1);
  CHECK(k.edges == 0);

  std::vector<ConceptId> path{1, 11, 33};
  CHECK_FALSE(daily_pattern(path) == daily_pattern(a));

  const auto& g = *reference_graph();
  SemanticSequence sam{"sam", {1, 100, 131, 11, 100, 1}};
  CHECK(*daily_pattern(g, sam) == daily_pattern(a));
  CHECK(daily_pattern(g, sam, false)->nodes == 4);
  CHECK_FALSE(daily_pattern(g, SemanticSequence{"m", {100}}));
}

TEST_CASE("motif keys survive relabeling") {
  std::mt19937 rng(10);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    Adjacency a(n, std::vector<bool>(n, false));
    const double density = (rng() % 100) / 100.0;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) a[u][v] = (rng() % 1000) < density * 1000;
    }
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    REQUIRE(canonical_key(a) == canonical_key(permute(a, p)));
  }
}

TEST_CASE("motif keys decode to an isomorphic graph") {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    Adjacency a(n, std::vector<bool>(n, false));
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) a[u][v] = rng() % 3 == 0;
    }
    const auto key = canonical_key(a);
    REQUIRE(isomorphic_oracle(decode_motif(key), a));
  }
  const auto dot = motif_dot(daily_pattern(std::vector<ConceptId>{1, 11, 1}), "m0");
  CHECK(dot == "digraph \"m0\" {\n  v0;\n  v1;\n  v0 -> v1;\n  v1 -> v0;\n}\n");
}

TEST_CASE("motif keys match isomorphism classes exhaustively") {
  for (std::size_t n = 1; n <= 3; ++n) check_keys_against_orbits(n, true);
  for (std::size_t n = 1; n <= 5; ++n) check_keys_against_orbits(n, false);
}

TEST_CASE("large and symmetric motifs stay tractable") {
  for (std::size_t n : {10, 12}) {
    Adjacency empty(n, std::vector<bool>(n, false));
    CHECK(canonical_key(empty).edges == 0);
    Adjacency cycle = empty;
    for (std::size_t v = 0; v < n; ++v) cycle[v][(v + 1) % n] = true;
    CHECK(canonical_key(cycle).edges == static_cast<int>(n));
    Adjacency full(n, std::vector<bool>(n, true));
    CHECK(canonical_key(full).edges == static_cast<int>(n * n));
  }
  CHECK_THROWS_AS(canonical_key(Adjacency(13, std::vector<bool>(13, false))), std::invalid_argument);
}

TEST_CASE("motif census") {
  auto c = corpus_from_text("id,activities\na,1 121 11 121 1\nb,1 121 11 121 1\nc,1 121 11 121 1\n");
  auto census = motif_census(c);
  REQUIRE(census.motifs.size() == 1);
  CHECK(census.motifs[0].count == 3);
  CHECK(census.motifs[0].example == "a");
  CHECK(census.coverage(11) == 1.0);

  auto moving = corpus_from_text("id,activities\nm,100\ns,1 100 1\n");
  auto mc = motif_census(moving);
  CHECK(mc.skipped == 1);
  CHECK(mc.counted == 1);
}

TEST_CASE("motif census agrees with pairwise isomorphism grouping") {
  const std::vector<ConceptId> stops{1, 11, 33, 51};
  std::mt19937 rng(21);
  std::ostringstream csv;
  csv << "id,activities\n";
  for (int i = 0; i < 150; ++i) {
    csv << 'p' << i << ',';
    const int len = 1 + static_cast<int>(rng() % 7);
    for (int k = 0; k < len; ++k) csv << (k ? " " : "") << stops[rng() % stops.size()];
    csv << '\n';
  }
  auto c = corpus_from_text(csv.str());
  auto census = motif_census(c);

  std::vector<Adjacency> reps;
  std::vector<std::size_t> counts;
  for (const auto& s : c.sequences()) {
    const auto g = pattern_graph(s.activities);
    std::size_t r = 0;
    while (r < reps.size() && !isomorphic_oracle(reps[r], g)) ++r;
    if (r == reps.size()) {
      reps.push_back(g);
      counts.push_back(0);
    }
    ++counts[r];
  }
  REQUIRE(census.motifs.size() == reps.size());
  std::vector<std::size_t> mine;
  for (const auto& m : census.motifs) mine.push_back(m.count);
  std::sort(counts.rbegin(), counts.rend());
  CHECK(mine == counts);
  for (const auto& m : census.motifs) {
    bool found = false;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if (isomorphic_oracle(decode_motif(m.key), reps[r])) {
        CHECK(counts.size() > 0);
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("entropy profile") {
  std::vector<ConceptId> four{1, 2, 3, 4};
  auto e = entropy_profile(four);
  CHECK(e.delta == 4);
  CHECK(e.h_rand == 2.0);
  CHECK(e.h_unc == doctest::Approx(2.0).epsilon(1e-15));

  std::vector<ConceptId> abab{1, 2, 1, 2, 1, 2, 1, 2};
  CHECK(lz_match_lengths(abab) == std::vector<std::size_t>{1, 1, 3, 3, 5, 4, 3, 2});
  CHECK(lz_entropy(abab) == doctest::Approx(12.0 / 11.0).epsilon(1e-15));

  std::vector<ConceptId> one{7};
  auto o = entropy_profile(one);
  CHECK(o.h_rand == 0.0);
  CHECK(o.h_est == 0.0);
  CHECK(o.pi_max == 1.0);

  std::vector<ConceptId> skew{1, 2, 1, 3, 1, 2, 1};
  auto s = entropy_profile(skew);
  CHECK(s.h_unc < s.h_rand);
  CHECK(s.support == 3);
  CHECK(entropy_profile(skew, FanoSupport::length_minus_one).support == 6);
}

TEST_CASE("match lengths agree with a direct substring search") {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ConceptId> s(1 + rng() % 30);
    for (auto& x : s) x = static_cast<ConceptId>(rng() % 3);
    const auto lambda = lz_match_lengths(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::size_t want = s.size() - i + 1;
      for (std::size_t len = 1; i + len <= s.size(); ++len) {
        bool inside = false;
        for (std::size_t j = 0; j + len <= i && !inside; ++j) {
          inside = std::equal(s.begin() + static_cast<long>(j), s.begin() + static_cast<long>(j + len),
                              s.begin() + static_cast<long>(i));
        }
        if (!inside) {
          want = len;
          break;
        }
      }
      if (i == 0) want = 1;
      REQUIRE(lambda[i] == want);
    }
  }
}

TEST_CASE("entropy properties") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ConceptId> s(1 + rng() % 40);
    for (auto& x : s) x = static_cast<ConceptId>(rng() % 5);
    auto e = entropy_profile(s);
    REQUIRE(e.h_unc <= e.h_rand);
    REQUIRE(e.h_unc >= 0.0);
    REQUIRE(e.h_est >= 0.0);
    for (double p : {e.pi_rand, e.pi_unc, e.pi_max}) {
      REQUIRE(p >= 0.0);
      REQUIRE(p <= 1.0);
    }
  }

  std::vector<ConceptId> period(1000);
  for (std::size_t i = 0; i < period.size(); ++i) period[i] = static_cast<ConceptId>(i % 2);
  CHECK(lz_entropy(period) < 0.5);

  std::vector<ConceptId> iid(10000);
  for (auto& x : iid) x = static_cast<ConceptId>(rng() % 4);
  const double h = lz_entropy(iid);
  CHECK(h >= 1.7);
  CHECK(h <= 2.3);
}

TEST_CASE("predictability") {
  CHECK(predictability_max(0.0, 5).value == 1.0);
  CHECK(predictability_max(2.0, 1).value == 1.0);
  CHECK(predictability_max(1.0, 2).value == 0.5);

  auto over = predictability_max(3.0, 4);
  CHECK(over.clamped);
  CHECK(over.value == 0.25);
  CHECK_FALSE(predictability_max(2.0, 4).clamped);
  CHECK(predictability_max(2.0, 4).value == 0.25);

  std::mt19937 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    const double h = unit(rng) * std::log2(static_cast<double>(n));
    const double p = predictability_max(h, n).value;
    REQUIRE(p >= 1.0 / static_cast<double>(n));
    REQUIRE(p <= 1.0);
    const double back = (p < 1.0 ? -p * std::log2(p) - (1 - p) * std::log2(1 - p) : 0.0) +
                        (1 - p) * std::log2(static_cast<double>(n) - 1.0);
    REQUIRE(std::abs(back - h) <= 1e-6);
  }

  for (std::size_t n : {2, 3, 7, 50}) {
    double last = 1.0;
    for (double h = 0.0; h <= std::log2(static_cast<double>(n)) + 0.5; h += 0.01) {
      const double p = predictability_max(h, n).value;
      REQUIRE(p <= last);
      last = p;
    }
  }
}

TEST_CASE("distinct stats and correlation") {
  auto c = corpus_from_text("id,activities\na,1 100 1\nb,1 121 11 121 1\n");
  auto d = distinct_stats(c);
  REQUIRE(d.rows.size() == 2);
  CHECK(d.rows[0].delta == 2);
  CHECK(d.rows[0].delta_move == 1);
  CHECK(d.rows[1].delta == 3);
  CHECK_FALSE(d.rho_delta);  // both lengths fall in interval 1

  std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  CHECK(*pearson(x, y) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> flat{2, 2, 2, 2};
  CHECK_FALSE(pearson(x, flat));

  std::mt19937 rng(1);
  std::normal_distribution<double> norm;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(50), b(50);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = norm(rng);
      b[i] = 0.5 * a[i] + norm(rng);
    }
    // Textbook form: cov / (sd_a sd_b) with n - 1 denominators.
    const double n = 50;
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      cov += (a[i] - ma) * (b[i] - mb) / (n - 1);
      va += (a[i] - ma) * (a[i] - ma) / (n - 1);
      vb += (b[i] - mb) * (b[i] - mb) / (n - 1);
    }
    REQUIRE(std::abs(*pearson(a, b) - cov / std::sqrt(va) / std::sqrt(vb)) <= 1e-12);
  }
}

TEST_CASE("indicator CSV exports") {
  auto c = corpus_from_text("id,activities\na,1 11 1\nb,1 11 1\n");
  std::ostringstream census;
  write_census_csv(census, motif_census(c));
  CHECK(census.str().rfind("key,nodes,edges,count,share\n", 0) == 0);
  CHECK(census.str().find(",2,2,2,1\n") != std::string::npos);

  std::ostringstream od;
  write_od_csv(od, od_matrix(c, true));
  CHECK(od.str() == "from,1,11\n1,0,2\n11,2,0\n");

  std::ostringstream len;
  write_length_csv(len, length_distribution(c), IntervalBinning{});
  CHECK(len.str() == "k,lengths,count\n1,1-5,2\n");
}
