#pragma once
// Contextual edit distance (CED) between semantic sequences and the
// pairwise distance matrix built from it.
//
// Edit costs blend a Levenshtein term with a context term: an edited symbol
// is cheap when a similar symbol sits close to the edit position in the
// source sequence, with closeness weighted by a Gaussian kernel.
//
// Context is always read from the original source sequence. Insertions are
// anchored to the source index after which the new symbol lands, clamped to
// [1, n]. A deletion is priced against the other source symbols only, so
// removing a locally repeated activity is cheap.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semseq/corpus.hpp"

namespace semseq {

// Dense symmetric similarity table over symbol indices [0, size()).
class SimilarityTable {
 public:
  SimilarityTable() = default;
  SimilarityTable(std::size_t size, const std::function<double(std::size_t, std::size_t)>& sim);

  // Wu-Palmer over every concept of the graph; symbols are graph dense
  // indices. Entries involving the root are 0 except root/root = 1.
  static SimilarityTable wu_palmer(const KnowledgeGraph& graph);

  std::size_t size() const { return size_; }
  double operator()(std::size_t a, std::size_t b) const { return values_[a * size_ + b]; }
  std::uint64_t fingerprint() const;

 private:
  std::size_t size_ = 0;
  std::vector<double> values_;
};

// exp(-0.5 * ((i - k) / sigma)^2)
double context_kernel(long k, long i, double sigma);

struct CedParams {
  double alpha = 0.0;           // weight of the Levenshtein term
  std::optional<double> sigma;  // kernel width; empty = median length / 2
};

// Median of the sequence lengths halved; the median of an even count is the
// mean of the two middle values.
double auto_sigma(std::span<const std::size_t> lengths);

enum class EditKind { add, mod, del };

struct EditOp {
  EditKind op = EditKind::mod;
  // mod/del: 1-based source index. add: source index after which the symbol
  // lands, 0 meaning before the first element.
  std::size_t position = 1;
  std::size_t symbol = 0;  // incoming symbol for add/mod; ignored for del
};

// Evaluates CED over sequences of symbol indices.
class CedEngine {
 public:
  CedEngine(const SimilarityTable& similarity, double alpha, double sigma);

  double alpha() const { return alpha_; }
  double sigma() const { return sigma_; }

  double edit_cost(const EditOp& e, std::span<const std::size_t> source) const;
  double one_sided(std::span<const std::size_t> source, std::span<const std::size_t> target) const;
  double distance(std::span<const std::size_t> a, std::span<const std::size_t> b) const;

 private:
  double kernel(std::size_t offset) const;

  const SimilarityTable* sim_;
  double alpha_;
  double sigma_;
  std::vector<double> kernel_cache_;
};

// Graph-level helpers: sequences of ConceptId, Wu-Palmer similarity.
std::vector<std::size_t> encode(const KnowledgeGraph& graph, std::span<const ConceptId> activities);

class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::vector<std::string> ids);  // all zeros

  // Validates symmetry, zero diagonal and non-negativity.
  static DistanceMatrix from_full(std::vector<std::string> ids, const std::vector<std::vector<double>>& full);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return i > j ? lower_[i * (i - 1) / 2 + j] : lower_[j * (j - 1) / 2 + i];
  }
  void set(std::size_t i, std::size_t j, double value);

  // Row-major strict lower triangle: (1,0), (2,0), (2,1), ...
  const std::vector<double>& lower_triangle() const { return lower_; }
  std::vector<double>& lower_triangle() { return lower_; }

  std::uint64_t fingerprint = 0;

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::vector<std::string> ids_;
  std::vector<double> lower_;
};

// Hash of the resolved parameters, the similarity table and the corpus content.
std::uint64_t matrix_fingerprint(const Corpus& corpus, double alpha, double sigma, const SimilarityTable& sim);

struct MatrixOptions {
  unsigned workers = 1;
  std::optional<std::string> cache_path;
};

enum class CacheStatus { disabled, hit, miss, mismatch };

struct MatrixResult {
  DistanceMatrix matrix;
  double sigma = 0.0;  // resolved kernel width
  CacheStatus cache = CacheStatus::disabled;
};

MatrixResult distance_matrix(const Corpus& corpus, const CedParams& params, const MatrixOptions& options = {});

// Computes every pair of pre-encoded sequences. Output is independent of the
// worker count.
DistanceMatrix compute_matrix(const std::vector<std::vector<std::size_t>>& encoded, std::vector<std::string> ids,
                              const CedEngine& engine, unsigned workers);

// Binary cache: magic "CEDM", u32 version, u64 fingerprint, u64 n, then the
// lower triangle as little-endian doubles. Ids are not stored.
void write_matrix_cache(const std::string& path, const DistanceMatrix& m);
// Returns nothing when the file is absent; throws IoError on a corrupt file.
std::optional<DistanceMatrix> read_matrix_cache(const std::string& path, std::vector<std::string> ids);

// CSV with a header row and column of ids, 9 significant digits.
void write_matrix_csv(std::ostream& out, const DistanceMatrix& m);

}  // namespace semseq
