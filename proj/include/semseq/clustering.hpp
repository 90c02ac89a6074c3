#pragma once
// Ward hierarchical clustering over a precomputed dissimilarity matrix,
// dendrogram cuts, validity indices and per-cluster centrality/scatter.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semseq/corpus.hpp"
#include "semseq/metric.hpp"

namespace semseq {

// squared: Lance-Williams on squared dissimilarities, heights reported as
// square roots (ward.D2). raw: recurrence on the dissimilarities as given.
enum class WardMode { squared, raw };

struct Merge {
  std::size_t left = 0;  // node ids: leaves 0..n-1, merge i creates n+i
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::vector<std::string> ids;
  std::vector<Merge> merges;  // n - 1 entries in agglomeration order

  std::size_t leaves() const { return ids.size(); }
};

// Repeatedly merges the globally closest pair; ties go to the lowest
// (left, right) node pair.
Dendrogram hac_ward(const DistanceMatrix& m, WardMode mode = WardMode::squared);

struct Clustering {
  std::vector<std::string> ids;
  std::vector<int> labels;  // 1..k, aligned with ids
  int k = 0;

  std::vector<std::vector<std::size_t>> members() const;  // index lists per label
};

// Applies the first n - k merges. Labels follow the smallest member index.
Clustering cut(const Dendrogram& d, int k);

struct Gap {
  int k = 0;
  double gap = 0.0;
};

// gap(k) = h[n-k+1] - h[n-k] with h[0] = 0, for k = 2..n, largest first.
std::vector<Gap> inertia_gaps(const Dendrogram& d);

struct Silhouette {
  std::vector<double> point;
  std::vector<double> cluster;  // mean over members, index label - 1
  double mean = 0.0;
};

// Singletons score 0. Throws ConfigError when k < 2.
Silhouette silhouette(const DistanceMatrix& m, const Clustering& cl);

// Smallest summed distance; ties to the smallest id.
std::size_t medoid(std::span<const std::size_t> members, const DistanceMatrix& m);

struct Mode {
  std::vector<ConceptId> activities;
  std::size_t count = 0;
};

// Most frequent aggregated sequence; ties to the lexicographically smallest.
Mode mode(const Corpus& corpus, std::span<const std::size_t> members, const AggregationLevel& level);

struct Scatter {
  double diameter = 0.0;
  double diameter95 = 0.0;
  double radius = 0.0;
  double radius95 = 0.0;
};

// The trimmed variants drop ceil(trim * |C|) members farthest from the
// medoid (never the medoid itself); radius stays relative to that medoid.
Scatter scatter(std::span<const std::size_t> members, const DistanceMatrix& m, double trim = 0.05);

struct ClusterStats {
  int label = 0;
  std::size_t size = 0;
  double share = 0.0;
  double silhouette = 0.0;
  Scatter scatter;
  std::string medoid;
  Mode mode;
};

// The corpus and the matrix must list the same ids in the same order.
std::vector<ClusterStats> cluster_stats(const Corpus& corpus, const DistanceMatrix& m, const Clustering& cl,
                                        const AggregationLevel& mode_level = LeafLevel{}, double trim = 0.05);

struct KScore {
  int k = 0;
  double silhouette = 0.0;
  double gap = 0.0;
};

struct KSuggestion {
  std::vector<KScore> table;     // ascending k
  std::vector<int> by_silhouette;  // best first; ties to smaller k
  std::vector<int> by_gap;
};

// Requires 2 <= lo <= hi <= n - 1.
KSuggestion suggest_k(const Dendrogram& d, const DistanceMatrix& m, int lo, int hi);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

void write_dendrogram_csv(std::ostream& out, const Dendrogram& d);
void write_labels_csv(std::ostream& out, const Clustering& cl);
void write_stats_csv(std::ostream& out, const std::vector<ClusterStats>& stats);
void write_suggestion_csv(std::ostream& out, const KSuggestion& s);

// Reads `id,cluster` aligned to `ids`; every id must appear exactly once and
// labels must cover 1..k. Throws ValidationError.
Clustering read_labels_csv(std::istream& in, const std::vector<std::string>& ids);

std::string format_sequence(std::span<const ConceptId> activities);

}  // namespace semseq
