#include "semseq/explain.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>

namespace semseq {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::vector<double> ContingencyTable::row_totals() const {
  std::vector<double> out(rows.size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (double v : counts[i]) out[i] += v;
  }
  return out;
}

std::vector<double> ContingencyTable::col_totals() const {
  std::vector<double> out(cols.size(), 0.0);
  for (const auto& row : counts) {
    for (std::size_t j = 0; j < cols.size(); ++j) out[j] += row[j];
  }
  return out;
}

double ContingencyTable::total() const {
  double sum = 0.0;
  for (const auto& row : counts) {
    for (double v : row) sum += v;
  }
  return sum;
}

namespace {

bool is_integer(const std::string& s) {
  if (s.empty()) return false;
  std::size_t start = s[0] == '-' ? 1 : 0;
  return start < s.size() && std::all_of(s.begin() + static_cast<long>(start), s.end(), [](char c) {
           return c >= '0' && c <= '9';
         });
}

}  // namespace

ContingencyTable contingency(const Clustering& cl, const std::vector<std::vector<std::string>>& features,
                             Weighting weighting) {
  if (features.size() != cl.labels.size()) throw std::invalid_argument("one feature list per sequence expected");
  std::set<std::string> domain;
  for (const auto& f : features) domain.insert(f.begin(), f.end());
  if (domain.empty()) throw std::invalid_argument("empty feature domain");

  ContingencyTable t;
  t.rows.assign(domain.begin(), domain.end());
  if (std::all_of(t.rows.begin(), t.rows.end(), is_integer)) {
    std::sort(t.rows.begin(), t.rows.end(),
              [](const std::string& a, const std::string& b) { return std::stoll(a) < std::stoll(b); });
  }
  for (int k = 1; k <= cl.k; ++k) t.cols.push_back(std::to_string(k));
  t.counts.assign(t.rows.size(), std::vector<double>(t.cols.size(), 0.0));
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < t.rows.size(); ++i) row_of[t.rows[i]] = i;

  for (std::size_t s = 0; s < features.size(); ++s) {
    const auto col = static_cast<std::size_t>(cl.labels[s] - 1);
    if (weighting == Weighting::presence) {
      for (const auto& f : std::set<std::string>(features[s].begin(), features[s].end())) t.counts[row_of[f]][col] += 1;
    } else {
      for (const auto& f : features[s]) t.counts[row_of[f]][col] += 1;
    }
  }
  return t;
}

ContingencyTable activity_table(const Corpus& corpus, const Clustering& cl, const AggregationLevel& level,
                                Weighting weighting) {
  std::vector<std::vector<std::string>> features;
  for (const auto& s : corpus.sequences()) {
    std::vector<std::string> f;
    for (auto a : aggregate_activities(corpus.graph(), s.activities, level)) f.push_back(std::to_string(a));
    features.push_back(std::move(f));
  }
  return contingency(cl, features, weighting);
}

ContingencyTable motif_table(const Corpus& corpus, const Clustering& cl, bool stops_only) {
  std::vector<std::vector<std::string>> features;
  for (const auto& s : corpus.sequences()) {
    const auto key = daily_pattern(corpus.graph(), s, stops_only);
    features.push_back(key ? std::vector<std::string>{key->str()} : std::vector<std::string>{});
  }
  return contingency(cl, features, Weighting::presence);
}

Residuals pearson_residuals(const ContingencyTable& t, double threshold) {
  const auto rt = t.row_totals();
  const auto ct = t.col_totals();
  const double n = t.total();
  Residuals res;
  const std::size_t p = t.rows.size(), q = t.cols.size();
  res.r.assign(p, std::vector<double>(q, 0.0));
  res.expected.assign(p, std::vector<double>(q, 0.0));
  res.significant.assign(p, std::vector<bool>(q, false));
  res.excluded.assign(p, std::vector<bool>(q, false));
  for (std::size_t i = 0; i < p; ++i) {
    if (rt[i] == 0.0) res.notices.push_back("row " + t.rows[i] + " has no observations; excluded");
  }
  for (std::size_t j = 0; j < q; ++j) {
    if (ct[j] == 0.0) res.notices.push_back("column " + t.cols[j] + " has no observations; excluded");
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      const double e = n > 0.0 ? rt[i] * ct[j] / n : 0.0;
      res.expected[i][j] = e;
      if (e <= 0.0) {
        res.excluded[i][j] = true;
        continue;
      }
      res.r[i][j] = (t.counts[i][j] - e) / std::sqrt(e);
      res.significant[i][j] = std::abs(res.r[i][j]) >= threshold;
    }
  }
  return res;
}

ChiSquared chi_squared(const ContingencyTable& t) {
  const auto rt = t.row_totals();
  const auto ct = t.col_totals();
  const double n = t.total();
  ChiSquared c;
  const long p = std::count_if(rt.begin(), rt.end(), [](double v) { return v > 0.0; });
  const long q = std::count_if(ct.begin(), ct.end(), [](double v) { return v > 0.0; });
  for (std::size_t i = 0; i < rt.size(); ++i) {
    for (std::size_t j = 0; j < ct.size(); ++j) {
      if (rt[i] == 0.0 || ct[j] == 0.0) continue;
      const double e = rt[i] * ct[j] / n;
      const double d = t.counts[i][j] - e;
      c.statistic += d * d / e;
      if (e < 5.0) c.small_expected = true;
    }
  }
  c.df = static_cast<int>(std::max(0L, (p - 1) * (q - 1)));
  if (c.df > 0) {
    c.p_value = c.statistic > 0.0 ? boost::math::gamma_q(c.df / 2.0, c.statistic / 2.0) : 1.0;
  }
  return c;
}

double cramers_v(const ContingencyTable& t) {
  const auto rt = t.row_totals();
  const auto ct = t.col_totals();
  const long p = std::count_if(rt.begin(), rt.end(), [](double v) { return v > 0.0; });
  const long q = std::count_if(ct.begin(), ct.end(), [](double v) { return v > 0.0; });
  const double n = t.total();
  if (n <= 0.0 || p < 2 || q < 2) throw std::invalid_argument("Cramer's V needs at least a 2x2 table");
  // Complete association: each category of the longer side occurs in a single
  // category of the shorter side. Then chi2 = N (min(p, q) - 1) exactly.
  const bool by_col = p <= q;
  const std::size_t outer = by_col ? ct.size() : rt.size(), inner = by_col ? rt.size() : ct.size();
  bool complete = true;
  for (std::size_t a = 0; a < outer && complete; ++a) {
    int nonzero = 0;
    for (std::size_t b = 0; b < inner; ++b) nonzero += (by_col ? t.counts[b][a] : t.counts[a][b]) != 0.0;
    complete = nonzero <= 1;
  }
  if (complete) return 1.0;
  const double v = std::sqrt(chi_squared(t).statistic / (n * static_cast<double>(std::min(p, q) - 1)));
  return std::min(1.0, v);
}

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.min = values.front();
  b.max = values.back();
  b.q1 = quantile(values, 0.25);
  b.median = quantile(values, 0.5);
  b.q3 = quantile(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo = b.q1 - 1.5 * iqr, hi = b.q3 + 1.5 * iqr;
  b.lower_whisker = b.max;
  b.upper_whisker = b.min;
  for (double v : values) {
    if (v < lo || v > hi) {
      b.outliers.push_back(v);
    } else {
      b.lower_whisker = std::min(b.lower_whisker, v);
      b.upper_whisker = std::max(b.upper_whisker, v);
    }
  }
  return b;
}

GlobalIndicators global_indicators(const Corpus& corpus, const AnalysisOptions& options) {
  GlobalIndicators g;
  g.lengths = length_distribution(corpus, options.binning);
  g.states = state_distribution(corpus, options.level);
  g.od = od_matrix(corpus, options.stops_only, options.level);
  g.motifs = motif_census(corpus, options.stops_only);
  g.distinct = distinct_stats(corpus, options.binning);
  for (const auto& s : corpus.sequences()) g.entropy.push_back(entropy_profile(s.activities, options.support));
  return g;
}

Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& members) {
  std::vector<SemanticSequence> seqs;
  for (auto i : members) seqs.push_back(corpus[i]);
  return Corpus(corpus.graph_ptr(), std::move(seqs));
}

std::vector<ClusterProfile> cluster_profiles(const Corpus& corpus, const Clustering& cl, const DistanceMatrix& m,
                                             const AnalysisOptions& options) {
  const auto stats = cluster_stats(corpus, m, cl, options.level, options.trim);
  const auto groups = cl.members();
  std::vector<ClusterProfile> out;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    const auto sub = subset(corpus, groups[c]);
    ClusterProfile p;
    p.stats = stats[c];
    std::vector<double> lengths;
    for (const auto& s : sub.sequences()) lengths.push_back(static_cast<double>(s.size()));
    p.length = box_stats(lengths);
    p.lengths = length_distribution(sub, options.binning);
    p.states = state_distribution(sub, options.level);
    p.od = od_matrix(sub, options.stops_only, options.level);
    p.motifs = motif_census(sub, options.stops_only);
    out.push_back(std::move(p));
  }
  return out;
}

const char* to_string(LengthClass c) {
  switch (c) {
    case LengthClass::short_:
      return "Short";
    case LengthClass::medium:
      return "Medium";
    case LengthClass::long_:
      return "Long";
  }
  return "";
}

std::vector<BehaviorSummary> behavior_summary(const Corpus& corpus, const Clustering& cl, const DistanceMatrix& m,
                                              const AnalysisOptions& options) {
  const auto groups = cl.members();
  const auto activities = activity_table(corpus, cl, options.level, options.weighting);
  const auto act_res = pearson_residuals(activities, options.residual_threshold);

  std::map<std::string, MotifKey> key_of;
  for (const auto& s : corpus.sequences()) {
    if (auto key = daily_pattern(corpus.graph(), s, options.stops_only)) key_of.emplace(key->str(), *key);
  }
  std::optional<ContingencyTable> motifs;
  std::optional<Residuals> motif_res;
  if (!key_of.empty()) {
    motifs = motif_table(corpus, cl, options.stops_only);
    motif_res = pearson_residuals(*motifs, options.residual_threshold);
  }

  const int first = options.binning.breakpoints.empty() ? 1 : 0;
  std::vector<BehaviorSummary> out;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    BehaviorSummary b;
    b.cluster = static_cast<int>(c + 1);
    b.share_pct = 100.0 * static_cast<double>(groups[c].size()) / static_cast<double>(corpus.size());
    const auto med = medoid(groups[c], m);
    b.medoid = corpus[med].person_id;
    b.medoid_sequence = corpus[med].activities;
    b.mode_sequence = mode(corpus, groups[c], options.level).activities;

    std::set<ConceptId> present(b.mode_sequence.begin(), b.mode_sequence.end());
    for (auto a : aggregate_activities(corpus.graph(), b.medoid_sequence, options.level)) present.insert(a);
    for (std::size_t i = 0; i < activities.rows.size(); ++i) {
      const double r = act_res.r[i][c];
      const ConceptId id = std::stoll(activities.rows[i]);
      if (!act_res.excluded[i][c] && r >= options.residual_threshold && present.count(id)) b.typical.push_back({id, r});
    }
    std::stable_sort(b.typical.begin(), b.typical.end(),
                     [](const TypicalActivity& x, const TypicalActivity& y) { return x.residual > y.residual; });

    std::vector<double> lengths;
    for (auto i : groups[c]) lengths.push_back(static_cast<double>(corpus[i].size()));
    std::sort(lengths.begin(), lengths.end());
    b.median_length = quantile(lengths, 0.5);
    const int k = options.binning.index(static_cast<std::size_t>(std::lround(b.median_length)));
    b.length_class = k <= first ? LengthClass::short_ : k == first + 1 ? LengthClass::medium : LengthClass::long_;

    if (motifs) {
      std::vector<std::pair<double, MotifKey>> found;
      for (std::size_t i = 0; i < motifs->rows.size(); ++i) {
        const double r = motif_res->r[i][c];
        if (!motif_res->excluded[i][c] && r >= options.residual_threshold) found.emplace_back(r, key_of.at(motifs->rows[i]));
      }
      std::stable_sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
      for (auto& f : found) b.daily_patterns.push_back(f.second);
    }
    out.push_back(std::move(b));
  }
  return out;
}

Association associate(const ContingencyTable& t) {
  Association a{t, pearson_residuals(t), chi_squared(t), std::nullopt};
  try {
    a.cramers_v = cramers_v(t);
  } catch (const std::invalid_argument&) {
    a.cramers_v.reset();
  }
  return a;
}

// Output

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string label_of(const KnowledgeGraph& g, ConceptId id) { return g.contains(id) ? g.concept_at(id).label : ""; }

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json sequence_json(const std::vector<ConceptId>& s) {
  Json a = Json::array();
  for (auto x : s) a.push_back(x);
  return a;
}

Json length_json(const LengthDistribution& d, const IntervalBinning& binning) {
  Json bins = Json::array();
  for (const auto& [label, count] : d.histogram.bins) {
    bins.push_back({{"k", std::stoi(label)}, {"lengths", binning.describe(std::stoi(label))}, {"count", count}});
  }
  return {{"bins", bins}, {"total", d.histogram.total}, {"poisson_lambda", d.poisson_lambda}};
}

Json states_json(const StateDistribution& d, const KnowledgeGraph& g) {
  Json ranked = Json::array();
  for (const auto& s : d.ranked) ranked.push_back({{"id", s.id}, {"label", label_of(g, s.id)}, {"count", s.count}});
  Json zipf = nullptr;
  if (d.zipf) zipf = {{"slope", d.zipf->slope}, {"intercept", d.zipf->intercept}, {"r2", d.zipf->r2}};
  return {{"total", d.total}, {"ranked", ranked}, {"zipf", zipf}, {"notice", d.notice}};
}

Json od_json(const OdMatrix& m) {
  Json counts = Json::array();
  for (const auto& row : m.t) counts.push_back(row);
  return {{"concepts", m.concepts}, {"counts", counts}, {"total", m.total()}};
}

Json census_json(const MotifCensus& c) {
  Json list = Json::array();
  for (const auto& m : c.motifs) {
    list.push_back({{"key", m.key.str()},
                    {"nodes", m.key.nodes},
                    {"edges", m.key.edges},
                    {"count", m.count},
                    {"share", static_cast<double>(m.count) / static_cast<double>(c.counted)},
                    {"example", m.example}});
  }
  return {{"counted", c.counted}, {"skipped", c.skipped}, {"coverage_top11", c.coverage(11)}, {"census", list}};
}

Json box_json(const BoxStats& b) {
  return {{"min", b.min},       {"q1", b.q1},
          {"median", b.median}, {"q3", b.q3},
          {"max", b.max},       {"lower_whisker", b.lower_whisker},
          {"upper_whisker", b.upper_whisker}, {"outliers", b.outliers}};
}

Json association_json(const Association& a) {
  return {{"rows", a.table.rows.size()},
          {"chi2", a.chi2.statistic},
          {"df", a.chi2.df},
          {"p_value", optional_number(a.chi2.p_value)},
          {"small_expected", a.chi2.small_expected},
          {"cramers_v", optional_number(a.cramers_v)},
          {"notices", a.residuals.notices}};
}

double mean_of(const std::vector<EntropyProfile>& e, double EntropyProfile::*field) {
  if (e.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : e) sum += p.*field;
  return sum / static_cast<double>(e.size());
}

void write_table_csv(std::ostream& out, const ContingencyTable& t, const std::vector<std::vector<double>>& cells,
                     const std::vector<std::vector<bool>>* excluded) {
  out << "category";
  for (const auto& c : t.cols) out << ",cluster" << c;
  out << '\n';
  out.precision(9);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    out << t.rows[i];
    for (std::size_t j = 0; j < t.cols.size(); ++j) {
      out << ',';
      if (!excluded || !(*excluded)[i][j]) out << cells[i][j];
    }
    out << '\n';
  }
}

std::string rank_name(std::size_t r) {
  std::ostringstream s;
  s.width(3);
  s.fill('0');
  s << r;
  return s.str();
}

}  // namespace

void write_global_section(const std::string& out_dir, const Corpus& corpus, const GlobalIndicators& g,
                          const AnalysisOptions& options) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_file(dir / "global_length.csv", [&](std::ostream& o) { write_length_csv(o, g.lengths, options.binning); });
  write_file(dir / "global_states.csv", [&](std::ostream& o) { write_states_csv(o, g.states, corpus.graph()); });
  write_file(dir / "global_od.csv", [&](std::ostream& o) { write_od_csv(o, g.od); });
  write_file(dir / "global_motifs.csv", [&](std::ostream& o) { write_census_csv(o, g.motifs); });
  write_file(dir / "global_profiles.csv",
             [&](std::ostream& o) { write_profiles_csv(o, corpus, g.distinct, g.entropy); });
  for (std::size_t r = 0; r < g.motifs.motifs.size(); ++r) {
    const auto name = "global_motif" + rank_name(r + 1);
    write_file(dir / (name + ".dot"), [&](std::ostream& o) { o << motif_dot(g.motifs.motifs[r].key, name); });
  }
}

std::string report_json(const ReportData& data) {
  const auto& corpus = *data.corpus;
  const auto& g = corpus.graph();
  const auto& opt = data.options;

  Json meta = {{"tool", "semseq"}, {"version", data.meta.version}, {"fingerprint", data.meta.fingerprint}};
  Json params = Json::object();
  for (const auto& [k, v] : data.meta.params) params[k] = v;
  meta["params"] = params;
  Json inputs = Json::array();
  for (const auto& in : data.meta.inputs) inputs.push_back({{"path", in.path}, {"modified", in.modified}});
  meta["inputs"] = inputs;

  const auto& gi = data.global;
  Json entropy = {{"mean_h_rand", mean_of(gi.entropy, &EntropyProfile::h_rand)},
                  {"mean_h_unc", mean_of(gi.entropy, &EntropyProfile::h_unc)},
                  {"mean_h_est", mean_of(gi.entropy, &EntropyProfile::h_est)},
                  {"mean_pi_max", mean_of(gi.entropy, &EntropyProfile::pi_max)},
                  {"clamped", std::count_if(gi.entropy.begin(), gi.entropy.end(),
                                            [](const EntropyProfile& e) { return e.clamped; })}};
  Json global = {{"sequences", corpus.size()},
                 {"level", to_string(opt.level)},
                 {"stops_only", opt.stops_only},
                 {"length", length_json(gi.lengths, opt.binning)},
                 {"states", states_json(gi.states, g)},
                 {"od", od_json(gi.od)},
                 {"motifs", census_json(gi.motifs)},
                 {"entropy", entropy},
                 {"distinct",
                  {{"rho_delta", optional_number(gi.distinct.rho_delta)},
                   {"rho_delta_move", optional_number(gi.distinct.rho_delta_move)}}}};

  Json clusters = Json::array();
  for (std::size_t c = 0; c < data.profiles.size(); ++c) {
    const auto& p = data.profiles[c];
    const auto& s = p.stats;
    Json entry = {{"cluster", s.label},
                  {"size", s.size},
                  {"share", s.share},
                  {"silhouette", s.silhouette},
                  {"diameter", s.scatter.diameter},
                  {"diameter95", s.scatter.diameter95},
                  {"radius", s.scatter.radius},
                  {"radius95", s.scatter.radius95},
                  {"medoid", s.medoid},
                  {"mode", {{"activities", sequence_json(s.mode.activities)}, {"count", s.mode.count}}},
                  {"length_box", box_json(p.length)},
                  {"length", length_json(p.lengths, opt.binning)},
                  {"states", states_json(p.states, g)},
                  {"od", od_json(p.od)},
                  {"motifs", census_json(p.motifs)}};
    if (c < data.summaries.size()) {
      const auto& b = data.summaries[c];
      Json typical = Json::array();
      for (const auto& t : b.typical) {
        typical.push_back({{"id", t.id}, {"label", label_of(g, t.id)}, {"residual", t.residual}});
      }
      Json patterns = Json::array();
      for (const auto& k : b.daily_patterns) patterns.push_back(k.str());
      entry["summary"] = {{"share_pct", b.share_pct},
                          {"typical_activities", typical},
                          {"median_length", b.median_length},
                          {"length_class", to_string(b.length_class)},
                          {"daily_patterns", patterns},
                          {"medoid", b.medoid},
                          {"medoid_sequence", sequence_json(b.medoid_sequence)},
                          {"mode_sequence", sequence_json(b.mode_sequence)},
                          {"label", b.label}};
    }
    clusters.push_back(entry);
  }

  Json validity = Json::object();
  if (data.clusters) {
    const auto& cs = *data.clusters;
    validity["k"] = cs.clustering.k;
    validity["mean_silhouette"] = nullptr;
    if (cs.clustering.k >= 2 && data.corpus->size() > 0) {
      double sum = 0.0;
      for (const auto& p : data.profiles) sum += p.stats.silhouette * static_cast<double>(p.stats.size);
      validity["mean_silhouette"] = sum / static_cast<double>(data.corpus->size());
    }
    Json table = Json::array();
    Json by_sil = Json::array(), by_gap = Json::array();
    if (cs.suggestion) {
      for (const auto& row : cs.suggestion->table) {
        table.push_back({{"k", row.k}, {"silhouette", row.silhouette}, {"gap", row.gap}});
      }
      by_sil = cs.suggestion->by_silhouette;
      by_gap = cs.suggestion->by_gap;
    }
    validity["table"] = table;
    validity["by_silhouette"] = by_sil;
    validity["by_gap"] = by_gap;
    validity["suggested"] = cs.suggested;
  }
  Json association = Json::object();
  if (data.activities) association["activities"] = association_json(*data.activities);
  if (data.motifs) association["motifs"] = association_json(*data.motifs);
  validity["association"] = association;

  Json report = {{"meta", meta}, {"global", global}, {"clusters", clusters}, {"validity", validity}};
  return report.dump(2) + "\n";
}

void emit_report(const ReportData& data, const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const auto& corpus = *data.corpus;
  write_global_section(out_dir, corpus, data.global, data.options);

  if (data.clusters) {
    const auto& cs = *data.clusters;
    write_file(dir / "clustering_dendrogram.csv", [&](std::ostream& o) { write_dendrogram_csv(o, cs.dendrogram); });
    write_file(dir / "clustering_labels.csv", [&](std::ostream& o) { write_labels_csv(o, cs.clustering); });
    if (cs.suggestion) {
      write_file(dir / "clustering_suggest.csv", [&](std::ostream& o) { write_suggestion_csv(o, *cs.suggestion); });
    }
    std::vector<ClusterStats> stats;
    for (const auto& p : data.profiles) stats.push_back(p.stats);
    write_file(dir / "clustering_stats.csv", [&](std::ostream& o) { write_stats_csv(o, stats); });
  }

  for (const auto& p : data.profiles) {
    const std::string prefix = "cluster" + std::to_string(p.stats.label) + "_";
    write_file(dir / (prefix + "length.csv"), [&](std::ostream& o) { write_length_csv(o, p.lengths, data.options.binning); });
    write_file(dir / (prefix + "states.csv"), [&](std::ostream& o) { write_states_csv(o, p.states, corpus.graph()); });
    write_file(dir / (prefix + "od.csv"), [&](std::ostream& o) { write_od_csv(o, p.od); });
    write_file(dir / (prefix + "motifs.csv"), [&](std::ostream& o) { write_census_csv(o, p.motifs); });
  }

  auto write_association = [&](const Association& a, const std::string& name) {
    write_file(dir / ("explain_" + name + ".csv"),
               [&](std::ostream& o) { write_table_csv(o, a.table, a.table.counts, nullptr); });
    write_file(dir / ("explain_" + name + "_residuals.csv"),
               [&](std::ostream& o) { write_table_csv(o, a.table, a.residuals.r, &a.residuals.excluded); });
  };
  if (data.activities) write_association(*data.activities, "activities");
  if (data.motifs) write_association(*data.motifs, "motifs");

  if (!data.summaries.empty()) {
    write_file(dir / "explain_summary.csv", [&](std::ostream& o) {
      o << "cluster,share_pct,typical_activities,median_length,length_class,daily_patterns,medoid,mode,label\n";
      o.precision(9);
      for (const auto& b : data.summaries) {
        std::string typical, patterns;
        for (const auto& t : b.typical) typical += (typical.empty() ? "" : " ") + std::to_string(t.id);
        for (const auto& k : b.daily_patterns) patterns += (patterns.empty() ? "" : " ") + k.str();
        o << b.cluster << ',' << b.share_pct << ',' << typical << ',' << b.median_length << ','
          << to_string(b.length_class) << ',' << patterns << ',' << b.medoid << ','
          << format_sequence(b.mode_sequence) << ',' << b.label << '\n';
      }
    });
    for (const auto& b : data.summaries) {
      for (std::size_t r = 0; r < b.daily_patterns.size(); ++r) {
        const auto name = "explain_cluster" + std::to_string(b.cluster) + "_pattern" + rank_name(r + 1);
        write_file(dir / (name + ".dot"), [&](std::ostream& o) { o << motif_dot(b.daily_patterns[r], name); });
      }
    }
  }

  const auto text = report_json(data);
  write_file(dir / "report.json", [&](std::ostream& o) { o << text; });
}

}  // namespace semseq
