#include "semseq/metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "semseq/hash.hpp"

namespace semseq {

SimilarityTable::SimilarityTable(std::size_t size, const std::function<double(std::size_t, std::size_t)>& sim)
    : size_(size), values_(size * size, 0.0) {
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = a; b < size; ++b) {
      const double v = sim(a, b);
      if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("similarity values must lie in [0, 1]");
      values_[a * size + b] = v;
      values_[b * size + a] = v;
    }
  }
}

SimilarityTable SimilarityTable::wu_palmer(const KnowledgeGraph& graph) {
  const auto root = graph.index_of(graph.root());
  return SimilarityTable(graph.size(), [&](std::size_t a, std::size_t b) {
    if (a == root || b == root) return a == b ? 1.0 : 0.0;
    return graph.wu_palmer(graph.node(a).id, graph.node(b).id);
  });
}

std::uint64_t SimilarityTable::fingerprint() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(size_));
  for (double v : values_) h.add(v);
  return h.value();
}

double context_kernel(long k, long i, double sigma) {
  const double z = static_cast<double>(i - k) / sigma;
  return std::exp(-0.5 * z * z);
}

double auto_sigma(std::span<const std::size_t> lengths) {
  if (lengths.empty()) throw ConfigError("cannot derive sigma from an empty corpus");
  std::vector<std::size_t> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  const double median = n % 2 ? static_cast<double>(sorted[n / 2])
                              : 0.5 * static_cast<double>(sorted[n / 2 - 1] + sorted[n / 2]);
  return median / 2.0;
}

CedEngine::CedEngine(const SimilarityTable& similarity, double alpha, double sigma)
    : sim_(&similarity), alpha_(alpha), sigma_(sigma) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be a positive finite number");
  kernel_cache_.resize(256);
  for (std::size_t d = 0; d < kernel_cache_.size(); ++d) kernel_cache_[d] = context_kernel(0, static_cast<long>(d), sigma);
}

double CedEngine::kernel(std::size_t offset) const {
  if (offset < kernel_cache_.size()) return kernel_cache_[offset];
  return context_kernel(0, static_cast<long>(offset), sigma_);
}

namespace {

std::size_t distance_between(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

}  // namespace

double CedEngine::edit_cost(const EditOp& e, std::span<const std::size_t> source) const {
  const auto n = source.size();
  const auto& sim = *sim_;
  const bool valid = e.op == EditKind::add ? e.position <= n : (e.position >= 1 && e.position <= n);
  if (!valid) throw std::out_of_range("edit position outside the source sequence");

  const std::size_t k = std::max<std::size_t>(1, e.position);
  const std::size_t x = e.op == EditKind::del ? source[k - 1] : e.symbol;
  double context = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (e.op == EditKind::del && i == k) continue;
    context = std::max(context, sim(x, source[i - 1]) * kernel(distance_between(i, k)));
  }
  const double levenshtein = e.op == EditKind::mod ? 1.0 - sim(source[k - 1], x) : 1.0;
  return alpha_ * levenshtein + (1.0 - alpha_) * (1.0 - context);
}

double CedEngine::one_sided(std::span<const std::size_t> source, std::span<const std::size_t> target) const {
  const auto n = source.size();
  const auto p = target.size();
  const auto& sim = *sim_;
  if (n == 0) return static_cast<double>(p);

  // context[(k-1)*p + (j-1)]: best similarity-weighted proximity of target
  // symbol j to the source around index k.
  std::vector<double> context(n * p, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t j = 1; j <= p; ++j) {
      double best = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        best = std::max(best, sim(target[j - 1], source[i - 1]) * kernel(distance_between(i, k)));
      }
      context[(k - 1) * p + (j - 1)] = best;
    }
  }
  std::vector<double> del(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    double best = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i == k) continue;
      best = std::max(best, sim(source[k - 1], source[i - 1]) * kernel(distance_between(i, k)));
    }
    del[k] = alpha_ + (1.0 - alpha_) * (1.0 - best);
  }
  auto add = [&](std::size_t anchor, std::size_t j) {
    const std::size_t k = std::max<std::size_t>(1, anchor);
    return alpha_ + (1.0 - alpha_) * (1.0 - context[(k - 1) * p + (j - 1)]);
  };
  auto mod = [&](std::size_t i, std::size_t j) {
    return alpha_ * (1.0 - sim(source[i - 1], target[j - 1])) + (1.0 - alpha_) * (1.0 - context[(i - 1) * p + (j - 1)]);
  };

  // Two-row Wagner-Fischer over (source prefix i, target prefix j).
  std::vector<double> prev(p + 1), cur(p + 1);
  prev[0] = 0.0;
  for (std::size_t j = 1; j <= p; ++j) prev[j] = prev[j - 1] + add(0, j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = prev[0] + del[i];
    for (std::size_t j = 1; j <= p; ++j) {
      const double via_del = prev[j] + del[i];
      const double via_add = cur[j - 1] + add(i, j);
      const double via_mod = prev[j - 1] + mod(i, j);
      cur[j] = std::min({via_mod, via_del, via_add});
    }
    std::swap(prev, cur);
  }
  return prev[p];
}

double CedEngine::distance(std::span<const std::size_t> a, std::span<const std::size_t> b) const {
  return std::max(one_sided(a, b), one_sided(b, a));
}

std::vector<std::size_t> encode(const KnowledgeGraph& graph, std::span<const ConceptId> activities) {
  std::vector<std::size_t> out;
  out.reserve(activities.size());
  for (auto a : activities) out.push_back(graph.index_of(a));
  return out;
}

DistanceMatrix::DistanceMatrix(std::vector<std::string> ids)
    : ids_(std::move(ids)), lower_(ids_.size() * (ids_.size() - (ids_.empty() ? 0 : 1)) / 2, 0.0) {}

DistanceMatrix DistanceMatrix::from_full(std::vector<std::string> ids, const std::vector<std::vector<double>>& full) {
  const auto n = ids.size();
  if (full.size() != n) throw std::invalid_argument("distance matrix row count does not match ids");
  DistanceMatrix m(std::move(ids));
  for (std::size_t i = 0; i < n; ++i) {
    if (full[i].size() != n) throw std::invalid_argument("distance matrix is not square");
    if (full[i][i] != 0.0) throw std::invalid_argument("distance matrix diagonal must be zero");
    for (std::size_t j = 0; j < i; ++j) {
      if (full[i][j] != full[j][i]) throw std::invalid_argument("distance matrix is not symmetric");
      m.set(i, j, full[i][j]);
    }
  }
  return m;
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double value) {
  if (i == j) {
    if (value != 0.0) throw std::invalid_argument("distance matrix diagonal must be zero");
    return;
  }
  if (!(value >= 0.0)) throw std::invalid_argument("distances must be non-negative");
  if (i < j) std::swap(i, j);
  lower_[i * (i - 1) / 2 + j] = value;
}

std::uint64_t matrix_fingerprint(const Corpus& corpus, double alpha, double sigma, const SimilarityTable& sim) {
  Fnv1a h;
  h.add(std::string_view("ced/v1"));
  h.add(alpha);
  h.add(sigma);
  h.add(sim.fingerprint());
  h.add(static_cast<std::uint64_t>(corpus.size()));
  for (const auto& s : corpus.sequences()) {
    h.add(std::string_view(s.person_id));
    h.add(static_cast<std::uint64_t>(s.activities.size()));
    for (auto a : s.activities) h.add(static_cast<std::uint64_t>(a));
  }
  return h.value();
}

DistanceMatrix compute_matrix(const std::vector<std::vector<std::size_t>>& encoded, std::vector<std::string> ids,
                              const CedEngine& engine, unsigned workers) {
  DistanceMatrix m(std::move(ids));
  auto& lower = m.lower_triangle();
  const std::size_t n = encoded.size();
  if (n < 2) return m;
  workers = std::max(1u, workers);

  // Rows are dealt round-robin; every slot has exactly one writer.
  auto run = [&](unsigned worker) {
    for (std::size_t i = 1 + worker; i < n; i += workers) {
      const std::size_t base = i * (i - 1) / 2;
      for (std::size_t j = 0; j < i; ++j) lower[base + j] = engine.distance(encoded[i], encoded[j]);
    }
  };
  if (workers == 1) {
    run(0);
    return m;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  for (auto& t : pool) t.join();
  return m;
}

namespace {

constexpr char kCacheMagic[4] = {'C', 'E', 'D', 'M'};
constexpr std::uint32_t kCacheVersion = 1;

static_assert(std::endian::native == std::endian::little, "matrix cache assumes a little-endian host");

}  // namespace

void write_matrix_cache(const std::string& path, const DistanceMatrix& m) {
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write matrix cache '" + path + "'");
    const std::uint64_t n = m.size();
    out.write(kCacheMagic, 4);
    out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof kCacheVersion);
    out.write(reinterpret_cast<const char*>(&m.fingerprint), sizeof m.fingerprint);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    const auto& lower = m.lower_triangle();
    out.write(reinterpret_cast<const char*>(lower.data()), static_cast<std::streamsize>(lower.size() * sizeof(double)));
    if (!out) throw IoError("failed writing matrix cache '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move matrix cache into place: " + ec.message());
}

std::optional<DistanceMatrix> read_matrix_cache(const std::string& path, std::vector<std::string> ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t fingerprint = 0, n = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&fingerprint), sizeof fingerprint);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0) throw IoError("'" + path + "' is not a matrix cache");
  if (version != kCacheVersion || n != ids.size()) {
    DistanceMatrix stale;
    stale.fingerprint = ~fingerprint;  // never matches
    return stale;
  }
  DistanceMatrix m(std::move(ids));
  auto& lower = m.lower_triangle();
  in.read(reinterpret_cast<char*>(lower.data()), static_cast<std::streamsize>(lower.size() * sizeof(double)));
  if (!in) throw IoError("truncated matrix cache '" + path + "'");
  m.fingerprint = fingerprint;
  return m;
}

void write_matrix_csv(std::ostream& out, const DistanceMatrix& m) {
  const auto& ids = m.ids();
  out << "id";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
  out << std::setprecision(9);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i];
    for (std::size_t j = 0; j < ids.size(); ++j) out << ',' << m(i, j);
    out << '\n';
  }
}

MatrixResult distance_matrix(const Corpus& corpus, const CedParams& params, const MatrixOptions& options) {
  MatrixResult result;
  if (corpus.empty()) {
    result.sigma = params.sigma.value_or(0.0);
    return result;
  }
  const auto lengths = corpus.lengths();
  result.sigma = params.sigma ? *params.sigma : auto_sigma(lengths);
  const auto sim = SimilarityTable::wu_palmer(corpus.graph());
  const CedEngine engine(sim, params.alpha, result.sigma);
  const auto fingerprint = matrix_fingerprint(corpus, params.alpha, result.sigma, sim);

  if (options.cache_path) {
    if (auto cached = read_matrix_cache(*options.cache_path, corpus.ids())) {
      if (cached->fingerprint == fingerprint) {
        result.matrix = std::move(*cached);
        result.cache = CacheStatus::hit;
        return result;
      }
      result.cache = CacheStatus::mismatch;
    } else {
      result.cache = CacheStatus::miss;
    }
  }

  std::vector<std::vector<std::size_t>> encoded;
  encoded.reserve(corpus.size());
  for (const auto& s : corpus.sequences()) encoded.push_back(encode(corpus.graph(), s.activities));
  result.matrix = compute_matrix(encoded, corpus.ids(), engine, options.workers);
  result.matrix.fingerprint = fingerprint;
  if (options.cache_path) write_matrix_cache(*options.cache_path, result.matrix);
  return result;
}

}  // namespace semseq
