#include "semseq/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace semseq {

int IntervalBinning::index(std::size_t length) const {
  if (breakpoints.empty()) {
    const long n = static_cast<long>(length);
    return static_cast<int>(std::max<long>(1, (n - 2) / 2));
  }
  return static_cast<int>(std::count_if(breakpoints.begin(), breakpoints.end(), [&](std::size_t b) { return b < length; }));
}

std::string IntervalBinning::describe(int k) const {
  std::size_t lo = 1, hi = 0;
  bool open = false;
  if (breakpoints.empty()) {
    // k = 1 covers 1..5; k >= 2 covers 2k+2 and 2k+3.
    if (k <= 1) {
      hi = 5;
    } else {
      lo = static_cast<std::size_t>(2 * k + 2);
      hi = lo + 1;
    }
  } else {
    const auto kk = static_cast<std::size_t>(k);
    lo = kk == 0 ? 1 : breakpoints[kk - 1] + 1;
    if (kk < breakpoints.size()) {
      hi = breakpoints[kk];
    } else {
      open = true;
    }
  }
  if (open) return std::to_string(lo) + "+";
  return std::to_string(lo) + "-" + std::to_string(hi);
}

IntervalBinning parse_binning(const std::string& text) {
  IntervalBinning b;
  if (text.empty()) return b;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty() || v < 1) throw ConfigError("invalid length breakpoint '" + item + "'");
    if (!b.breakpoints.empty() && static_cast<std::size_t>(v) <= b.breakpoints.back()) {
      throw ConfigError("length breakpoints must be strictly increasing");
    }
    b.breakpoints.push_back(static_cast<std::size_t>(v));
  }
  return b;
}

double poisson_mle(std::span<const int> samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (int k : samples) sum += k;
  return sum / static_cast<double>(samples.size());
}

LengthDistribution length_distribution(const Corpus& corpus, const IntervalBinning& binning) {
  LengthDistribution d;
  for (const auto& s : corpus.sequences()) d.index.push_back(binning.index(s.size()));
  if (d.index.empty()) return d;
  const auto [lo, hi] = std::minmax_element(d.index.begin(), d.index.end());
  std::vector<std::size_t> counts(static_cast<std::size_t>(*hi - *lo + 1), 0);
  for (int k : d.index) ++counts[static_cast<std::size_t>(k - *lo)];
  for (std::size_t i = 0; i < counts.size(); ++i) {
    d.histogram.bins.emplace_back(std::to_string(*lo + static_cast<int>(i)), counts[i]);
  }
  d.histogram.total = d.index.size();
  d.poisson_lambda = poisson_mle(d.index);
  return d;
}

std::optional<LinearFit> zipf_fit(std::span<const std::size_t> ranked_counts) {
  std::vector<double> x, y;
  for (std::size_t r = 0; r < ranked_counts.size(); ++r) {
    if (ranked_counts[r] == 0) continue;
    x.push_back(std::log(static_cast<double>(r + 1)));
    y.push_back(std::log(static_cast<double>(ranked_counts[r])));
  }
  if (x.size() < 3) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += e * e;
  }
  fit.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

StateDistribution state_distribution(const Corpus& corpus, const AggregationLevel& level) {
  std::map<ConceptId, std::size_t> counts;
  for (const auto& s : corpus.sequences()) {
    for (auto a : aggregate_activities(corpus.graph(), s.activities, level)) ++counts[a];
  }
  StateDistribution d;
  for (const auto& [id, c] : counts) {
    d.ranked.push_back({id, c});
    d.total += c;
  }
  std::stable_sort(d.ranked.begin(), d.ranked.end(),
                   [](const StateCount& a, const StateCount& b) { return a.count > b.count; });
  if (d.ranked.size() < 3) {
    d.notice = "Zipf fit skipped: fewer than 3 distinct activities";
  } else {
    std::vector<std::size_t> ranked;
    for (const auto& s : d.ranked) ranked.push_back(s.count);
    d.zipf = zipf_fit(ranked);
  }
  return d;
}

std::size_t OdMatrix::total() const {
  std::size_t sum = 0;
  for (const auto& row : t) sum = std::accumulate(row.begin(), row.end(), sum);
  return sum;
}

std::size_t OdMatrix::at(ConceptId from, ConceptId to) const {
  const auto i = std::lower_bound(concepts.begin(), concepts.end(), from);
  const auto j = std::lower_bound(concepts.begin(), concepts.end(), to);
  if (i == concepts.end() || *i != from || j == concepts.end() || *j != to) return 0;
  return t[static_cast<std::size_t>(i - concepts.begin())][static_cast<std::size_t>(j - concepts.begin())];
}

OdMatrix od_matrix(const Corpus& corpus, bool stops_only, const AggregationLevel& level) {
  std::vector<std::vector<ConceptId>> seqs;
  std::set<ConceptId> seen;
  for (const auto& s : corpus.sequences()) {
    std::vector<ConceptId> a = stops_only ? stop_projection(corpus.graph(), s.activities) : s.activities;
    a = aggregate_activities(corpus.graph(), a, level);
    seen.insert(a.begin(), a.end());
    seqs.push_back(std::move(a));
  }
  OdMatrix m;
  m.concepts.assign(seen.begin(), seen.end());
  m.t.assign(m.concepts.size(), std::vector<std::size_t>(m.concepts.size(), 0));
  auto pos = [&](ConceptId id) {
    return static_cast<std::size_t>(std::lower_bound(m.concepts.begin(), m.concepts.end(), id) - m.concepts.begin());
  };
  for (const auto& a : seqs) {
    for (std::size_t k = 0; k + 1 < a.size(); ++k) ++m.t[pos(a[k])][pos(a[k + 1])];
  }
  return m;
}

// Motifs

std::string MotifKey::str() const { return std::to_string(nodes) + "." + std::to_string(edges) + "." + code; }

namespace {

using Adjacency = std::vector<std::vector<bool>>;

// Colour refinement: start from (out, in, self) degrees and split by the
// multisets of neighbour colours until stable. Colours are ranks of sorted
// signatures, so they depend on structure only.
std::vector<int> refine_colours(const Adjacency& a) {
  const std::size_t n = a.size();
  std::vector<int> colour(n, 0);
  std::vector<std::vector<int>> sig(n);
  for (std::size_t v = 0; v < n; ++v) {
    int out = 0, in = 0;
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v) continue;
      out += a[v][u];
      in += a[u][v];
    }
    sig[v] = {out, in, static_cast<int>(a[v][v])};
  }
  std::size_t classes = 0;
  for (;;) {
    std::vector<std::vector<int>> sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t v = 0; v < n; ++v) {
      colour[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sig[v]) - sorted.begin());
    }
    if (sorted.size() == classes) break;
    classes = sorted.size();
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<int> out, in;
      for (std::size_t u = 0; u < n; ++u) {
        if (u == v) continue;
        if (a[v][u]) out.push_back(colour[u]);
        if (a[u][v]) in.push_back(colour[u]);
      }
      std::sort(out.begin(), out.end());
      std::sort(in.begin(), in.end());
      sig[v] = {colour[v], -1};
      sig[v].insert(sig[v].end(), out.begin(), out.end());
      sig[v].push_back(-2);
      sig[v].insert(sig[v].end(), in.begin(), in.end());
    }
  }
  return colour;
}

// u and v are interchangeable: swapping them is an automorphism.
bool twins(const Adjacency& a, std::size_t u, std::size_t v) {
  if (a[u][u] != a[v][v] || a[u][v] != a[v][u]) return false;
  for (std::size_t x = 0; x < a.size(); ++x) {
    if (x == u || x == v) continue;
    if (a[u][x] != a[v][x] || a[x][u] != a[x][v]) return false;
  }
  return true;
}

// Bits contributed by the node placed at position m: edges to earlier
// positions, edges from earlier positions, then its self loop.
void segment(const Adjacency& a, const std::vector<std::size_t>& perm, std::size_t m, std::vector<char>& out) {
  const std::size_t v = perm[m];
  for (std::size_t j = 0; j < m; ++j) out.push_back(a[v][perm[j]]);
  for (std::size_t j = 0; j < m; ++j) out.push_back(a[perm[j]][v]);
  out.push_back(a[v][v]);
}

class Canonicalizer {
 public:
  explicit Canonicalizer(const Adjacency& a) : a_(a), n_(a.size()), used_(n_, false) {
    colour_ = refine_colours(a_);
    slot_colour_ = colour_;
    std::sort(slot_colour_.begin(), slot_colour_.end());
    twin_of_.resize(n_);
    for (std::size_t v = 0; v < n_; ++v) {
      twin_of_[v] = v;
      for (std::size_t u = 0; u < v; ++u) {
        if (colour_[u] == colour_[v] && twins(a_, u, v)) {
          twin_of_[v] = twin_of_[u];
          break;
        }
      }
    }
  }

  // Lexicographically largest bit string over colour-respecting orders.
  std::vector<char> run() {
    perm_.clear();
    bits_.clear();
    search(false);
    return best_;
  }

 private:
  void search(bool ahead) {
    const std::size_t m = perm_.size();
    if (m == n_) {
      best_ = bits_;
      have_best_ = true;
      return;
    }
    std::vector<bool> tried_class(n_, false);
    for (std::size_t v = 0; v < n_; ++v) {
      if (used_[v] || colour_[v] != slot_colour_[m]) continue;
      if (tried_class[twin_of_[v]]) continue;
      tried_class[twin_of_[v]] = true;

      const std::size_t start = bits_.size();
      perm_.push_back(v);
      segment(a_, perm_, m, bits_);
      bool next_ahead = ahead || !have_best_;
      bool prune = false;
      if (!next_ahead) {
        for (std::size_t i = start; i < bits_.size(); ++i) {
          if (bits_[i] != best_[i]) {
            if (bits_[i] > best_[i]) {
              next_ahead = true;
            } else {
              prune = true;
            }
            break;
          }
        }
      }
      if (!prune) {
        used_[v] = true;
        search(next_ahead);
        used_[v] = false;
        // Any best found below shares this prefix.
        ahead = false;
      }
      perm_.pop_back();
      bits_.resize(start);
    }
  }

  const Adjacency& a_;
  std::size_t n_;
  std::vector<int> colour_;
  std::vector<int> slot_colour_;
  std::vector<std::size_t> twin_of_;
  std::vector<bool> used_;
  std::vector<std::size_t> perm_;
  std::vector<char> bits_;
  std::vector<char> best_;
  bool have_best_ = false;
};

const char* kHex = "0123456789abcdef";

}  // namespace

MotifKey canonical_key(const std::vector<std::vector<bool>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n > static_cast<std::size_t>(kMaxMotifNodes)) {
    throw std::invalid_argument("daily pattern has " + std::to_string(n) + " nodes; the limit is " +
                                std::to_string(kMaxMotifNodes));
  }
  MotifKey key;
  key.nodes = static_cast<int>(n);
  for (const auto& row : adjacency) {
    if (row.size() != n) throw std::invalid_argument("adjacency matrix is not square");
    key.edges += static_cast<int>(std::count(row.begin(), row.end(), true));
  }
  if (n == 0) return key;
  const auto bits = Canonicalizer(adjacency).run();
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    int nibble = 0;
    for (std::size_t b = 0; b < 4; ++b) nibble = nibble * 2 + (i + b < bits.size() ? bits[i + b] : 0);
    key.code.push_back(kHex[nibble]);
  }
  return key;
}

std::vector<std::vector<bool>> decode_motif(const MotifKey& key) {
  const auto n = static_cast<std::size_t>(key.nodes);
  std::vector<char> bits;
  for (char c : key.code) {
    const char* p = std::find(kHex, kHex + 16, c);
    if (p == kHex + 16) throw std::invalid_argument("invalid motif code '" + key.code + "'");
    const int v = static_cast<int>(p - kHex);
    for (int b = 3; b >= 0; --b) bits.push_back(static_cast<char>((v >> b) & 1));
  }
  if (bits.size() < n * n) throw std::invalid_argument("motif code too short");
  Adjacency a(n, std::vector<bool>(n, false));
  std::size_t i = 0;
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t j = 0; j < m; ++j) a[m][j] = bits[i++];
    for (std::size_t j = 0; j < m; ++j) a[j][m] = bits[i++];
    a[m][m] = bits[i++];
  }
  return a;
}

std::string motif_dot(const MotifKey& key, const std::string& name) {
  const auto a = decode_motif(key);
  std::ostringstream out;
  out << "digraph \"" << name << "\" {\n";
  for (std::size_t v = 0; v < a.size(); ++v) out << "  v" << v << ";\n";
  for (std::size_t u = 0; u < a.size(); ++u) {
    for (std::size_t v = 0; v < a.size(); ++v) {
      if (a[u][v]) out << "  v" << u << " -> v" << v << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

MotifKey daily_pattern(std::span<const ConceptId> activities) {
  std::vector<ConceptId> order;
  std::unordered_map<ConceptId, std::size_t> index;
  for (auto a : activities) {
    if (index.emplace(a, order.size()).second) order.push_back(a);
  }
  Adjacency adj(order.size(), std::vector<bool>(order.size(), false));
  for (std::size_t k = 0; k + 1 < activities.size(); ++k) adj[index[activities[k]]][index[activities[k + 1]]] = true;
  return canonical_key(adj);
}

std::optional<MotifKey> daily_pattern(const KnowledgeGraph& graph, const SemanticSequence& s, bool stops_only) {
  if (!stops_only) return daily_pattern(s.activities);
  const auto p = stop_projection(graph, s.activities);
  if (p.empty()) return std::nullopt;
  return daily_pattern(p);
}

double MotifCensus::coverage(std::size_t top) const {
  if (counted == 0) return 0.0;
  std::size_t sum = 0;
  for (std::size_t i = 0; i < std::min(top, motifs.size()); ++i) sum += motifs[i].count;
  return static_cast<double>(sum) / static_cast<double>(counted);
}

std::map<MotifKey, std::size_t> MotifCensus::as_map() const {
  std::map<MotifKey, std::size_t> m;
  for (const auto& c : motifs) m[c.key] = c.count;
  return m;
}

MotifCensus motif_census(const Corpus& corpus, bool stops_only) {
  MotifCensus census;
  std::map<MotifKey, MotifCount> counts;
  for (const auto& s : corpus.sequences()) {
    const auto key = daily_pattern(corpus.graph(), s, stops_only);
    if (!key) {
      ++census.skipped;
      continue;
    }
    auto [it, fresh] = counts.try_emplace(*key, MotifCount{*key, 0, s.person_id});
    ++it->second.count;
    ++census.counted;
  }
  for (auto& [key, c] : counts) census.motifs.push_back(std::move(c));
  std::stable_sort(census.motifs.begin(), census.motifs.end(),
                   [](const MotifCount& a, const MotifCount& b) { return a.count > b.count; });
  return census;
}

// Entropy and predictability

std::vector<std::size_t> lz_match_lengths(std::span<const ConceptId> s) {
  const std::size_t n = s.size();
  // best[i]: longest prefix of s[i..] that occurs entirely inside s[0..i).
  std::vector<std::size_t> best(n, 0);
  for (std::size_t d = 1; d < n; ++d) {
    std::size_t run = 0;
    for (std::size_t i = n; i-- > d;) {
      run = s[i] == s[i - d] ? run + 1 : 0;
      best[i] = std::max(best[i], std::min(run, d));
    }
  }
  std::vector<std::size_t> lambda(n);
  for (std::size_t i = 0; i < n; ++i) lambda[i] = best[i] + 1;
  return lambda;
}

double lz_entropy(std::span<const ConceptId> s) {
  const std::size_t n = s.size();
  if (n < 2) return 0.0;
  const auto lambda = lz_match_lengths(s);
  const double sum = static_cast<double>(std::accumulate(lambda.begin(), lambda.end(), std::size_t{0}));
  return static_cast<double>(n) * std::log2(static_cast<double>(n)) / sum;
}

namespace {

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace

Predictability predictability_max(double h, std::size_t support) {
  if (h < 0.0) throw std::invalid_argument("entropy must be non-negative");
  if (support == 0) throw std::invalid_argument("support must be at least 1");
  if (support == 1 || h == 0.0) return {1.0, false};
  const double n = static_cast<double>(support);
  const double tail = std::log2(n - 1.0);
  auto f = [&](double p) { return binary_entropy(p) + (1.0 - p) * tail - h; };
  double lo = 1.0 / n, hi = 1.0;
  const double f_lo = f(lo);
  if (f_lo <= 0.0) return {lo, f_lo < -1e-12};
  while (hi - lo > 0.0) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v = f(mid);
    if (v == 0.0) return {mid, false};
    (v > 0.0 ? lo : hi) = mid;
  }
  return {std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi, false};
}

EntropyProfile entropy_profile(std::span<const ConceptId> s, FanoSupport support) {
  if (s.empty()) throw std::invalid_argument("entropy profile of an empty sequence");
  EntropyProfile e;
  e.length = s.size();
  std::map<ConceptId, std::size_t> freq;
  for (auto a : s) ++freq[a];
  e.delta = freq.size();
  e.h_rand = std::log2(static_cast<double>(e.delta));
  for (const auto& [a, c] : freq) {
    const double p = static_cast<double>(c) / static_cast<double>(e.length);
    e.h_unc -= p * std::log2(p);
  }
  e.h_unc = std::max(0.0, std::min(e.h_unc, e.h_rand));
  e.h_est = lz_entropy(s);
  e.support = support == FanoSupport::distinct ? e.delta : std::max<std::size_t>(1, e.length - 1);
  const auto r = predictability_max(e.h_rand, e.support);
  const auto u = predictability_max(e.h_unc, e.support);
  const auto m = predictability_max(e.h_est, e.support);
  e.pi_rand = r.value;
  e.pi_unc = u.value;
  e.pi_max = m.value;
  e.clamped = r.clamped || u.clamped || m.clamped;
  return e;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: size mismatch");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

DistinctStats distinct_stats(const Corpus& corpus, const IntervalBinning& binning) {
  DistinctStats d;
  std::vector<double> k, delta, delta_move;
  for (const auto& s : corpus.sequences()) {
    std::set<ConceptId> all(s.activities.begin(), s.activities.end());
    std::size_t moves = 0;
    for (auto a : all) moves += corpus.graph().kind(a) == ConceptKind::move;
    DistinctRow row{s.person_id, s.size(), binning.index(s.size()), all.size(), moves};
    k.push_back(row.interval);
    delta.push_back(static_cast<double>(row.delta));
    delta_move.push_back(static_cast<double>(row.delta_move));
    d.rows.push_back(std::move(row));
  }
  d.rho_delta = pearson(k, delta);
  d.rho_delta_move = pearson(k, delta_move);
  return d;
}

// CSV export

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_length_csv(std::ostream& out, const LengthDistribution& d, const IntervalBinning& binning) {
  out << "k,lengths,count\n";
  for (const auto& [label, count] : d.histogram.bins) {
    out << label << ',' << binning.describe(std::stoi(label)) << ',' << count << '\n';
  }
}

void write_states_csv(std::ostream& out, const StateDistribution& d, const KnowledgeGraph& graph) {
  out << "rank,id,label,count,share\n";
  out.precision(9);
  for (std::size_t r = 0; r < d.ranked.size(); ++r) {
    const auto& s = d.ranked[r];
    out << r + 1 << ',' << s.id << ',' << csv_field(graph.concept_at(s.id).label) << ',' << s.count << ','
        << static_cast<double>(s.count) / static_cast<double>(d.total) << '\n';
  }
}

void write_od_csv(std::ostream& out, const OdMatrix& m) {
  out << "from";
  for (auto c : m.concepts) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < m.concepts.size(); ++i) {
    out << m.concepts[i];
    for (auto v : m.t[i]) out << ',' << v;
    out << '\n';
  }
}

void write_census_csv(std::ostream& out, const MotifCensus& c) {
  out << "key,nodes,edges,count,share\n";
  out.precision(9);
  for (const auto& m : c.motifs) {
    out << m.key.str() << ',' << m.key.nodes << ',' << m.key.edges << ',' << m.count << ','
        << static_cast<double>(m.count) / static_cast<double>(c.counted) << '\n';
  }
}

void write_profiles_csv(std::ostream& out, const Corpus& corpus, const DistinctStats& d,
                        const std::vector<EntropyProfile>& profiles) {
  out << "id,length,interval,delta,delta_move,h_rand,h_unc,h_est,pi_rand,pi_unc,pi_max,clamped\n";
  out.precision(9);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = d.rows[i];
    const auto& e = profiles[i];
    out << csv_field(r.person_id) << ',' << r.length << ',' << r.interval << ',' << r.delta << ',' << r.delta_move
        << ',' << e.h_rand << ',' << e.h_unc << ',' << e.h_est << ',' << e.pi_rand << ',' << e.pi_unc << ','
        << e.pi_max << ',' << (e.clamped ? 1 : 0) << '\n';
  }
}

}  // namespace semseq
