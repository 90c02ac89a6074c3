#pragma once
// Exhaustive medoid, mode and scatter over one cluster of a distance matrix.

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "semseq/metric.hpp"

namespace semseq::oracle {

struct Centrality {
  std::size_t medoid = 0;
  std::vector<ConceptId> mode;
  std::size_t mode_count = 0;
  double diameter = 0, radius = 0, diameter95 = 0, radius95 = 0;
};

// Medoid ties go to the smallest id, mode ties to the smallest sequence.
// The trimmed variants drop the ceil(trim_pct% of |C|) members farthest from
// the medoid (id ascending among equals), never the medoid itself.
inline Centrality brute_centrality(const std::vector<std::size_t>& g, const DistanceMatrix& m,
                                   const std::vector<std::vector<ConceptId>>& sequences, std::size_t trim_pct = 5) {
  const auto& ids = m.ids();
  Centrality c;
  std::vector<std::pair<double, std::string>> sums;
  for (auto i : g) {
    double s = 0;
    for (auto j : g) s += m(i, j);
    sums.emplace_back(s, ids[i]);
  }
  const auto best = *std::min_element(sums.begin(), sums.end());
  for (auto i : g) {
    if (ids[i] == best.second) c.medoid = i;
  }

  std::map<std::vector<ConceptId>, std::size_t> tally;
  for (auto i : g) ++tally[sequences[i]];
  for (const auto& [seq, count] : tally) {
    if (count > c.mode_count) {
      c.mode_count = count;
      c.mode = seq;
    }
  }

  const auto med = c.medoid;
  for (auto i : g) {
    c.radius = std::max(c.radius, m(med, i));
    for (auto j : g) c.diameter = std::max(c.diameter, m(i, j));
  }
  std::vector<std::tuple<double, std::string, std::size_t>> far;
  for (auto i : g) {
    if (i != med) far.emplace_back(-m(med, i), ids[i], i);
  }
  std::sort(far.begin(), far.end());
  std::size_t drop = (g.size() * trim_pct + 99) / 100;
  drop = std::min(drop, g.size() - 1);
  std::vector<std::size_t> kept{med};
  for (std::size_t t = drop; t < far.size(); ++t) kept.push_back(std::get<2>(far[t]));
  for (auto i : kept) {
    c.radius95 = std::max(c.radius95, m(med, i));
    for (auto j : kept) c.diameter95 = std::max(c.diameter95, m(i, j));
  }
  return c;
}

}  // namespace semseq::oracle
