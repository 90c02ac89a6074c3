#pragma once
// Cluster explanation: contingency tables and residuals, per-cluster
// profiles, behavior summaries and the consolidated report.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semseq/clustering.hpp"
#include "semseq/indicators.hpp"

namespace semseq {

enum class Weighting { occurrence, presence };

struct ContingencyTable {
  std::vector<std::string> rows;  // categories
  std::vector<std::string> cols;  // clusters
  std::vector<std::vector<double>> counts;

  std::vector<double> row_totals() const;
  std::vector<double> col_totals() const;
  double total() const;
};

// features[i] lists the categories of sequence i. Rows are ordered
// numerically when every label is an integer, lexicographically otherwise.
ContingencyTable contingency(const Clustering& cl, const std::vector<std::vector<std::string>>& features,
                             Weighting weighting = Weighting::occurrence);

ContingencyTable activity_table(const Corpus& corpus, const Clustering& cl, const AggregationLevel& level,
                                Weighting weighting = Weighting::occurrence);
// One motif per sequence; sequences without a motif are left out.
ContingencyTable motif_table(const Corpus& corpus, const Clustering& cl, bool stops_only = true);

struct Residuals {
  std::vector<std::vector<double>> r;         // 0 where excluded
  std::vector<std::vector<double>> expected;  // n_i+ n_+j / N
  std::vector<std::vector<bool>> significant;  // |r| >= threshold
  std::vector<std::vector<bool>> excluded;     // zero marginal
  std::vector<std::string> notices;
};

Residuals pearson_residuals(const ContingencyTable& t, double threshold = 2.0);

struct ChiSquared {
  double statistic = 0.0;
  int df = 0;
  std::optional<double> p_value;  // empty when df = 0
  bool small_expected = false;    // some expected count below 5
};

// Rows and columns with a zero marginal are ignored.
ChiSquared chi_squared(const ContingencyTable& t);
// Throws std::invalid_argument on tables smaller than 2x2 after dropping
// empty rows and columns.
double cramers_v(const ContingencyTable& t);

struct BoxStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double lower_whisker = 0, upper_whisker = 0;  // extreme data within 1.5 IQR
  std::vector<double> outliers;
};

// Quartiles by linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double p);
BoxStats box_stats(std::vector<double> values);

struct AnalysisOptions {
  AggregationLevel level = CategoryLevel{};  // states, OD, contingency, typical activities
  bool stops_only = true;                    // OD and motifs
  IntervalBinning binning;
  double residual_threshold = 4.0;
  FanoSupport support = FanoSupport::distinct;
  Weighting weighting = Weighting::occurrence;
  double trim = 0.05;
};

struct GlobalIndicators {
  LengthDistribution lengths;
  StateDistribution states;
  OdMatrix od;
  MotifCensus motifs;
  DistinctStats distinct;
  std::vector<EntropyProfile> entropy;
};

GlobalIndicators global_indicators(const Corpus& corpus, const AnalysisOptions& options);

struct ClusterProfile {
  ClusterStats stats;
  BoxStats length;
  LengthDistribution lengths;
  StateDistribution states;
  OdMatrix od;
  MotifCensus motifs;
};

Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& members);

std::vector<ClusterProfile> cluster_profiles(const Corpus& corpus, const Clustering& cl, const DistanceMatrix& m,
                                             const AnalysisOptions& options);

enum class LengthClass { short_, medium, long_ };
const char* to_string(LengthClass c);

struct TypicalActivity {
  ConceptId id = 0;
  double residual = 0.0;
};

struct BehaviorSummary {
  int cluster = 0;
  double share_pct = 0.0;
  std::vector<TypicalActivity> typical;  // residual descending
  double median_length = 0.0;
  LengthClass length_class = LengthClass::short_;
  std::vector<MotifKey> daily_patterns;
  std::string medoid;
  std::vector<ConceptId> medoid_sequence;
  std::vector<ConceptId> mode_sequence;  // at the analysis level
  std::string label;                     // left for a human
};

// Typical activities: residual >= threshold at the analysis level and
// present in the aggregated medoid or mode. Length class from the interval
// of the median length: lowest interval Short, next Medium, else Long.
// Daily patterns: motif residual >= threshold.
std::vector<BehaviorSummary> behavior_summary(const Corpus& corpus, const Clustering& cl, const DistanceMatrix& m,
                                              const AnalysisOptions& options);

struct Association {
  ContingencyTable table;
  Residuals residuals;
  ChiSquared chi2;
  std::optional<double> cramers_v;
};

Association associate(const ContingencyTable& t);

struct InputStamp {
  std::string path;
  std::string modified;  // ISO 8601 UTC of the file's mtime
};

struct ReportMeta {
  std::string version;
  std::string fingerprint;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<InputStamp> inputs;
};

struct ClusterSection {
  Dendrogram dendrogram;
  Clustering clustering;
  std::optional<KSuggestion> suggestion;
  std::vector<int> suggested;
};

struct ReportData {
  ReportMeta meta;
  const Corpus* corpus = nullptr;
  AnalysisOptions options;
  GlobalIndicators global;
  std::optional<ClusterSection> clusters;
  std::vector<ClusterProfile> profiles;
  std::vector<BehaviorSummary> summaries;
  std::optional<Association> activities;
  std::optional<Association> motifs;
};

// global_*.csv plus one DOT file per census motif.
void write_global_section(const std::string& out_dir, const Corpus& corpus, const GlobalIndicators& g,
                          const AnalysisOptions& options);

// report.json with the global section files, clustering_*, cluster<i>_*,
// explain_* CSVs and DOT files. Creates out_dir.
void emit_report(const ReportData& data, const std::string& out_dir);

// Just the JSON text of the report.
std::string report_json(const ReportData& data);

}  // namespace semseq
