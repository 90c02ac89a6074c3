#pragma once
// Corpus-level descriptive indicators: length and state distributions,
// origin-destination counts, daily-pattern motifs, entropy and
// predictability, distinct-activity statistics.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semseq/corpus.hpp"

namespace semseq {

// Maps a sequence length n to an interval index k.
// Default: k = max(1, ceil((n - 3) / 2)).
// With breakpoints b_1 < b_2 < ...: k = #{b_i < n}, so I_0 = [1, b_1],
// I_1 = (b_1, b_2], and the last interval is open.
struct IntervalBinning {
  std::vector<std::size_t> breakpoints;

  int index(std::size_t length) const;
  // "lo-hi" or "lo+" in sequence lengths.
  std::string describe(int k) const;
};

// Parses a comma-separated breakpoint list; empty text gives the default.
IntervalBinning parse_binning(const std::string& text);

struct Histogram {
  std::vector<std::pair<std::string, std::size_t>> bins;
  std::size_t total = 0;
};

struct LengthDistribution {
  Histogram histogram;  // every k from the smallest to the largest observed
  std::vector<int> index;  // per sequence
  double poisson_lambda = 0.0;
};

double poisson_mle(std::span<const int> samples);

LengthDistribution length_distribution(const Corpus& corpus, const IntervalBinning& binning = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least squares on (ln rank, ln count). Zero counts are dropped; needs at
// least 3 remaining points.
std::optional<LinearFit> zipf_fit(std::span<const std::size_t> ranked_counts);

struct StateCount {
  ConceptId id = 0;
  std::size_t count = 0;
};

struct StateDistribution {
  std::vector<StateCount> ranked;  // count descending, then id ascending
  std::size_t total = 0;
  std::optional<LinearFit> zipf;
  std::string notice;  // why the fit was skipped
};

StateDistribution state_distribution(const Corpus& corpus, const AggregationLevel& level = LeafLevel{});

struct OdMatrix {
  std::vector<ConceptId> concepts;  // ascending
  std::vector<std::vector<std::size_t>> t;

  std::size_t total() const;
  std::size_t at(ConceptId from, ConceptId to) const;
};

// Consecutive pair counts after the optional stop projection, then aggregation.
OdMatrix od_matrix(const Corpus& corpus, bool stops_only, const AggregationLevel& level = LeafLevel{});

// Canonical form of an unlabeled directed graph. Equal keys iff isomorphic.
struct MotifKey {
  int nodes = 0;
  int edges = 0;
  std::string code;  // hex of the canonical adjacency bits

  std::string str() const;  // "<nodes>.<edges>.<code>"
  auto operator<=>(const MotifKey&) const = default;
};

inline constexpr int kMaxMotifNodes = 12;

// adjacency[i][j] = edge i -> j; self loops allowed. Throws
// std::invalid_argument above kMaxMotifNodes nodes.
MotifKey canonical_key(const std::vector<std::vector<bool>>& adjacency);

// Vertices are the distinct activities, edges the consecutive transitions.
MotifKey daily_pattern(std::span<const ConceptId> activities);
// Stop projection first unless stops_only is false. Empty when the
// projection has no activity.
std::optional<MotifKey> daily_pattern(const KnowledgeGraph& graph, const SemanticSequence& s, bool stops_only = true);

std::vector<std::vector<bool>> decode_motif(const MotifKey& key);
std::string motif_dot(const MotifKey& key, const std::string& name = "motif");

struct MotifCount {
  MotifKey key;
  std::size_t count = 0;
  std::string example;  // first person id showing the pattern
};

struct MotifCensus {
  std::vector<MotifCount> motifs;  // count descending, then key
  std::size_t counted = 0;
  std::size_t skipped = 0;  // empty projection

  // Share of counted sequences covered by the `top` most frequent motifs.
  double coverage(std::size_t top) const;
  std::map<MotifKey, std::size_t> as_map() const;
};

MotifCensus motif_census(const Corpus& corpus, bool stops_only = true);

// lambda_i: length of the shortest substring starting at i that does not
// occur inside x_1..x_{i-1}; n - i + 2 when none exists. lambda_1 = 1.
std::vector<std::size_t> lz_match_lengths(std::span<const ConceptId> s);
// n log2 n / sum(lambda); 0 for n = 1.
double lz_entropy(std::span<const ConceptId> s);

struct Predictability {
  double value = 1.0;
  bool clamped = false;  // h above log2(support); value set to 1/support
};

// Root of H(p) + (1 - p) log2(N - 1) = h on [1/N, 1] by bisection.
Predictability predictability_max(double h, std::size_t support);

enum class FanoSupport { distinct, length_minus_one };

struct EntropyProfile {
  std::size_t length = 0;
  std::size_t delta = 0;
  std::size_t support = 0;
  double h_rand = 0.0;
  double h_unc = 0.0;
  double h_est = 0.0;
  double pi_rand = 1.0;
  double pi_unc = 1.0;
  double pi_max = 1.0;
  bool clamped = false;
};

EntropyProfile entropy_profile(std::span<const ConceptId> s, FanoSupport support = FanoSupport::distinct);

struct DistinctRow {
  std::string person_id;
  std::size_t length = 0;
  int interval = 0;
  std::size_t delta = 0;
  std::size_t delta_move = 0;
};

struct DistinctStats {
  std::vector<DistinctRow> rows;
  std::optional<double> rho_delta;  // interval index vs delta; empty if undefined
  std::optional<double> rho_delta_move;
};

std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

DistinctStats distinct_stats(const Corpus& corpus, const IntervalBinning& binning = {});

void write_length_csv(std::ostream& out, const LengthDistribution& d, const IntervalBinning& binning);
void write_states_csv(std::ostream& out, const StateDistribution& d, const KnowledgeGraph& graph);
void write_od_csv(std::ostream& out, const OdMatrix& m);
void write_census_csv(std::ostream& out, const MotifCensus& c);
void write_profiles_csv(std::ostream& out, const Corpus& corpus, const DistinctStats& d,
                        const std::vector<EntropyProfile>& profiles);

}  // namespace semseq
