#include "semseq/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace semseq {

Dendrogram hac_ward(const DistanceMatrix& m, WardMode mode) {
  const std::size_t n = m.size();
  if (n == 0) throw ConfigError("cannot cluster an empty matrix");
  Dendrogram out;
  out.ids = m.ids();

  std::vector<double> d = m.lower_triangle();
  for (double& v : d) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("dissimilarities must be finite and non-negative");
    if (mode == WardMode::squared) v *= v;
  }
  auto dist = [&](std::size_t a, std::size_t b) -> double& {
    if (a < b) std::swap(a, b);
    return d[a * (a - 1) / 2 + b];
  };

  // Slots hold the active clusters; node[] is the public node id.
  std::vector<std::size_t> node(n), size(n, 1), nn(n, 0);
  std::vector<double> nn_dist(n, 0.0);
  std::vector<bool> active(n, true);
  std::iota(node.begin(), node.end(), 0);

  auto find_nn = [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      const double v = dist(i, j);
      if (v < best || (v == best && node[j] < node[arg])) {
        best = v;
        arg = j;
      }
    }
    nn[i] = arg;
    nn_dist[i] = best;
  };
  for (std::size_t i = 0; i < n && n > 1; ++i) find_nn(i);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t a = n, b = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      if (a == n) {
        a = i;
        continue;
      }
      const auto key = [&](std::size_t s) {
        return std::tuple(nn_dist[s], std::min(node[s], node[nn[s]]), std::max(node[s], node[nn[s]]));
      };
      if (key(i) < key(a)) a = i;
    }
    b = nn[a];
    if (node[b] < node[a]) std::swap(a, b);

    const double dab = dist(a, b);
    out.merges.push_back({node[a], node[b], mode == WardMode::squared ? std::sqrt(dab) : dab, size[a] + size[b]});

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double na = static_cast<double>(size[a]), nb = static_cast<double>(size[b]);
      const double nk = static_cast<double>(size[k]);
      dist(a, k) = ((na + nk) * dist(a, k) + (nb + nk) * dist(b, k) - nk * dab) / (na + nb + nk);
    }
    active[b] = false;
    node[a] = n + step;
    size[a] += size[b];

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k]) continue;
      if (k == a || nn[k] == a || nn[k] == b) {
        find_nn(k);
      } else if (dist(k, a) < nn_dist[k]) {
        nn[k] = a;
        nn_dist[k] = dist(k, a);
      }
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> Clustering::members() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i] - 1)].push_back(i);
  return out;
}

Clustering cut(const Dendrogram& d, int k) {
  const std::size_t n = d.leaves();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw ConfigError("k must lie in [1, " + std::to_string(n) + "], got " + std::to_string(k));
  }
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n - static_cast<std::size_t>(k); ++i) {
    parent[d.merges[i].left] = n + i;
    parent[d.merges[i].right] = n + i;
  }
  auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x];
    return x;
  };
  Clustering cl;
  cl.ids = d.ids;
  cl.k = k;
  std::unordered_map<std::size_t, int> label;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = label.emplace(root(i), static_cast<int>(label.size()) + 1);
    cl.labels.push_back(it->second);
  }
  return cl;
}

std::vector<Gap> inertia_gaps(const Dendrogram& d) {
  const std::size_t n = d.leaves();
  std::vector<Gap> gaps;
  for (std::size_t k = 2; k <= n; ++k) {
    const std::size_t upper = n - k;
    const double below = upper == 0 ? 0.0 : d.merges[upper - 1].height;
    gaps.push_back({static_cast<int>(k), d.merges[upper].height - below});
  }
  std::stable_sort(gaps.begin(), gaps.end(), [](const Gap& x, const Gap& y) { return x.gap > y.gap; });
  return gaps;
}

Silhouette silhouette(const DistanceMatrix& m, const Clustering& cl) {
  if (cl.k < 2) throw ConfigError("silhouette needs at least 2 clusters");
  const auto groups = cl.members();
  const std::size_t n = m.size();
  Silhouette s;
  s.point.assign(n, 0.0);
  s.cluster.assign(groups.size(), 0.0);
  std::vector<double> sums(groups.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(cl.labels[i] - 1);
    if (groups[own].size() == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[static_cast<std::size_t>(cl.labels[j] - 1)] += m(i, j);
    }
    const double a = sums[own] / static_cast<double>(groups[own].size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (c != own && !groups[c].empty()) b = std::min(b, sums[c] / static_cast<double>(groups[c].size()));
    }
    const double denom = std::max(a, b);
    s.point[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  for (std::size_t c = 0; c < groups.size(); ++c) {
    double sum = 0.0;
    for (auto i : groups[c]) sum += s.point[i];
    s.cluster[c] = groups[c].empty() ? 0.0 : sum / static_cast<double>(groups[c].size());
  }
  s.mean = n == 0 ? 0.0 : std::accumulate(s.point.begin(), s.point.end(), 0.0) / static_cast<double>(n);
  return s;
}

std::size_t medoid(std::span<const std::size_t> members, const DistanceMatrix& m) {
  if (members.empty()) throw std::invalid_argument("medoid of an empty cluster");
  std::size_t best = members[0];
  double best_sum = std::numeric_limits<double>::infinity();
  for (auto i : members) {
    double sum = 0.0;
    for (auto j : members) sum += m(i, j);
    if (sum < best_sum || (sum == best_sum && m.ids()[i] < m.ids()[best])) {
      best = i;
      best_sum = sum;
    }
  }
  return best;
}

Mode mode(const Corpus& corpus, std::span<const std::size_t> members, const AggregationLevel& level) {
  if (members.empty()) throw std::invalid_argument("mode of an empty cluster");
  std::map<std::vector<ConceptId>, std::size_t> counts;
  for (auto i : members) ++counts[aggregate_activities(corpus.graph(), corpus[i].activities, level)];
  Mode best;
  for (auto& [seq, c] : counts) {
    if (c > best.count) best = {seq, c};
  }
  return best;
}

Scatter scatter(std::span<const std::size_t> members, const DistanceMatrix& m, double trim) {
  Scatter s;
  if (members.size() <= 1) return s;
  const std::size_t c = medoid(members, m);
  std::vector<std::size_t> order;
  for (auto i : members) {
    if (i != c) order.push_back(i);
    s.radius = std::max(s.radius, m(c, i));
    for (auto j : members) s.diameter = std::max(s.diameter, m(i, j));
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (m(c, x) != m(c, y)) return m(c, x) > m(c, y);
    return m.ids()[x] < m.ids()[y];
  });
  const auto drop = std::min(static_cast<std::size_t>(std::ceil(trim * static_cast<double>(members.size()) - 1e-9)),
                             members.size() - 1);
  std::vector<std::size_t> kept(order.begin() + static_cast<long>(drop), order.end());
  kept.push_back(c);
  for (auto i : kept) {
    s.radius95 = std::max(s.radius95, m(c, i));
    for (auto j : kept) s.diameter95 = std::max(s.diameter95, m(i, j));
  }
  return s;
}

std::vector<ClusterStats> cluster_stats(const Corpus& corpus, const DistanceMatrix& m, const Clustering& cl,
                                        const AggregationLevel& mode_level, double trim) {
  if (corpus.ids() != m.ids() || cl.ids != m.ids()) {
    throw std::invalid_argument("corpus, matrix and clustering disagree on ids");
  }
  const auto groups = cl.members();
  std::optional<Silhouette> sil;
  if (cl.k >= 2) sil = silhouette(m, cl);
  std::vector<ClusterStats> out;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    ClusterStats s;
    s.label = static_cast<int>(c + 1);
    s.size = groups[c].size();
    s.share = static_cast<double>(s.size) / static_cast<double>(m.size());
    s.silhouette = sil ? sil->cluster[c] : 0.0;
    s.scatter = scatter(groups[c], m, trim);
    s.medoid = m.ids()[medoid(groups[c], m)];
    s.mode = mode(corpus, groups[c], mode_level);
    out.push_back(std::move(s));
  }
  return out;
}

KSuggestion suggest_k(const Dendrogram& d, const DistanceMatrix& m, int lo, int hi) {
  const int n = static_cast<int>(d.leaves());
  if (lo < 2 || hi < lo || hi > n - 1) {
    throw ConfigError("k range must satisfy 2 <= lo <= hi <= " + std::to_string(n - 1));
  }
  std::map<int, double> gap;
  for (const auto& g : inertia_gaps(d)) gap[g.k] = g.gap;
  KSuggestion s;
  for (int k = lo; k <= hi; ++k) {
    s.table.push_back({k, silhouette(m, cut(d, k)).mean, gap[k]});
    s.by_silhouette.push_back(k);
    s.by_gap.push_back(k);
  }
  auto score = [&](int k) -> const KScore& { return s.table[static_cast<std::size_t>(k - lo)]; };
  std::stable_sort(s.by_silhouette.begin(), s.by_silhouette.end(),
                   [&](int x, int y) { return score(x).silhouette > score(y).silhouette; });
  std::stable_sort(s.by_gap.begin(), s.by_gap.end(), [&](int x, int y) { return score(x).gap > score(y).gap; });
  return s;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("label vectors differ in length");
  const double n = static_cast<double>(a.size());
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++ra[a[i]];
    ++rb[b[i]];
  }
  double index = 0, sa = 0, sb = 0;
  for (const auto& [key, c] : joint) index += pairs(c);
  for (const auto& [key, c] : ra) sa += pairs(c);
  for (const auto& [key, c] : rb) sb += pairs(c);
  const double total = pairs(n);
  if (total == 0.0) return 1.0;
  const double expected = sa * sb / total;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

std::string format_sequence(std::span<const ConceptId> activities) {
  std::string out;
  for (auto a : activities) {
    if (!out.empty()) out += ' ';
    out += std::to_string(a);
  }
  return out;
}

void write_dendrogram_csv(std::ostream& out, const Dendrogram& d) {
  out << "step,left,right,height,size\n";
  out.precision(17);
  for (std::size_t i = 0; i < d.merges.size(); ++i) {
    const auto& mg = d.merges[i];
    out << i + 1 << ',' << mg.left << ',' << mg.right << ',' << mg.height << ',' << mg.size << '\n';
  }
}

void write_labels_csv(std::ostream& out, const Clustering& cl) {
  out << "id,cluster\n";
  for (std::size_t i = 0; i < cl.ids.size(); ++i) out << cl.ids[i] << ',' << cl.labels[i] << '\n';
}

void write_stats_csv(std::ostream& out, const std::vector<ClusterStats>& stats) {
  out << "cluster,size,share,silhouette,diameter,diameter95,radius,radius95,medoid,mode,mode_count\n";
  out.precision(9);
  for (const auto& s : stats) {
    out << s.label << ',' << s.size << ',' << s.share << ',' << s.silhouette << ',' << s.scatter.diameter << ','
        << s.scatter.diameter95 << ',' << s.scatter.radius << ',' << s.scatter.radius95 << ',' << s.medoid << ','
        << format_sequence(s.mode.activities) << ',' << s.mode.count << '\n';
  }
}

void write_suggestion_csv(std::ostream& out, const KSuggestion& s) {
  out << "k,silhouette,gap,silhouette_rank,gap_rank\n";
  out.precision(9);
  for (const auto& row : s.table) {
    const auto rank = [&](const std::vector<int>& order) {
      return std::find(order.begin(), order.end(), row.k) - order.begin() + 1;
    };
    out << row.k << ',' << row.silhouette << ',' << row.gap << ',' << rank(s.by_silhouette) << ','
        << rank(s.by_gap) << '\n';
  }
}

Clustering read_labels_csv(std::istream& in, const std::vector<std::string>& ids) {
  std::vector<Diagnostic> diags;
  std::unordered_map<std::string, int> label;
  std::string line;
  int line_no = 0;
  auto strip = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  if (!std::getline(in, line)) throw ValidationError({{Severity::error, 1, "labels file is empty"}});
  ++line_no;
  strip(line);
  if (line != "id,cluster") diags.push_back({Severity::error, 1, "expected header 'id,cluster'"});
  while (std::getline(in, line)) {
    ++line_no;
    strip(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      diags.push_back({Severity::error, line_no, "missing comma"});
      continue;
    }
    const std::string id = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size() || v < 1) {
      diags.push_back({Severity::error, line_no, "invalid cluster label '" + value + "'"});
      continue;
    }
    if (!label.emplace(id, v).second) diags.push_back({Severity::error, line_no, "duplicate id " + id});
  }
  Clustering cl;
  cl.ids = ids;
  for (const auto& id : ids) {
    const auto it = label.find(id);
    if (it == label.end()) {
      diags.push_back({Severity::error, 0, "no cluster label for " + id});
      continue;
    }
    cl.labels.push_back(it->second);
    cl.k = std::max(cl.k, it->second);
  }
  if (label.size() > ids.size()) diags.push_back({Severity::error, 0, "labels name ids absent from the corpus"});
  if (!has_errors(diags)) {
    std::vector<bool> seen(static_cast<std::size_t>(cl.k), false);
    for (int l : cl.labels) seen[static_cast<std::size_t>(l - 1)] = true;
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      diags.push_back({Severity::error, 0, "cluster labels must cover 1..k without gaps"});
    }
  }
  if (has_errors(diags)) throw ValidationError(std::move(diags));
  return cl;
}

}  // namespace semseq
