#pragma once
// Naive O(n^3) Ward on explicit Euclidean points: merge the pair with the
// smallest increase in within-cluster sum of squares, recomputed from
// centroids at every step.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace semseq::oracle {

struct WardStep {
  std::size_t left, right;
  double height;
  std::size_t size;
};

inline std::vector<WardStep> naive_ward(const std::vector<std::vector<double>>& points) {
  struct Cluster {
    std::size_t id;
    std::vector<std::size_t> members;
  };
  const std::size_t n = points.size();
  const std::size_t dim = n ? points[0].size() : 0;
  std::vector<Cluster> live;
  for (std::size_t i = 0; i < n; ++i) live.push_back({i, {i}});

  auto centroid = [&](const Cluster& c) {
    std::vector<double> mu(dim, 0.0);
    for (auto i : c.members) {
      for (std::size_t t = 0; t < dim; ++t) mu[t] += points[i][t];
    }
    for (auto& v : mu) v /= static_cast<double>(c.members.size());
    return mu;
  };

  std::vector<WardStep> steps;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = i + 1; j < live.size(); ++j) {
        const auto ci = centroid(live[i]), cj = centroid(live[j]);
        double sq = 0.0;
        for (std::size_t t = 0; t < dim; ++t) sq += (ci[t] - cj[t]) * (ci[t] - cj[t]);
        const double a = static_cast<double>(live[i].members.size());
        const double b = static_cast<double>(live[j].members.size());
        const double cost = a * b / (a + b) * sq;
        if (cost < best) {
          best = cost;
          bi = i;
          bj = j;
        }
      }
    }
    Cluster merged{n + step, live[bi].members};
    merged.members.insert(merged.members.end(), live[bj].members.begin(), live[bj].members.end());
    const std::size_t l = std::min(live[bi].id, live[bj].id), r = std::max(live[bi].id, live[bj].id);
    steps.push_back({l, r, std::sqrt(2.0 * best), merged.members.size()});
    live.erase(live.begin() + static_cast<long>(bj));
    live.erase(live.begin() + static_cast<long>(bi));
    live.push_back(std::move(merged));
  }
  return steps;
}

}  // namespace semseq::oracle
