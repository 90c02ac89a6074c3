#pragma once
// Activity knowledge graph: a rooted DAG of concepts where a parent
// semantically contains its children.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "semseq/diagnostics.hpp"

namespace semseq {

using ConceptId = std::int64_t;

enum class ConceptKind { stop, move, meta, root };

const char* to_string(ConceptKind kind);
std::optional<ConceptKind> parse_kind(const std::string& text);

struct Concept {
  ConceptId id = 0;
  std::string label;
  ConceptKind kind = ConceptKind::stop;
  std::string glyph;  // non-empty marks an aggregated activity category
};

// Thrown by queries that reference a concept not in the graph.
class UnknownConcept : public std::out_of_range {
 public:
  explicit UnknownConcept(ConceptId id);
  ConceptId id() const { return id_; }

 private:
  ConceptId id_;
};

// Aggregation target: keep leaves, cut at a fixed depth, or map every
// concept to the category (glyph-bearing node) that contains it.
struct LeafLevel {};
struct DepthLevel {
  int depth = 0;
};
struct CategoryLevel {};
using AggregationLevel = std::variant<LeafLevel, DepthLevel, CategoryLevel>;

// Parses "leaf", "meta" or "depth:N".
AggregationLevel parse_level(const std::string& text);
std::string to_string(const AggregationLevel& level);

struct AggregateResult {
  ConceptId id = 0;
  bool ambiguous = false;  // several candidates; smallest id was chosen
};

class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  std::size_t size() const { return nodes_.size(); }
  ConceptId root() const { return nodes_[root_index_].id; }

  bool contains(ConceptId id) const { return index_.count(id) != 0; }
  const Concept& concept_at(ConceptId id) const { return nodes_[index_of(id)]; }

  // Dense index in [0, size()); stable for the lifetime of the graph and
  // ordered by ascending ConceptId.
  std::size_t index_of(ConceptId id) const;
  const Concept& node(std::size_t index) const { return nodes_[index]; }
  const std::vector<Concept>& nodes() const { return nodes_; }

  const std::vector<ConceptId>& parents(ConceptId id) const;
  const std::vector<ConceptId>& children(ConceptId id) const;

  int depth(ConceptId id) const;
  int max_depth() const { return max_depth_; }
  ConceptKind kind(ConceptId id) const { return concept_at(id).kind; }
  bool is_ancestor_or_self(ConceptId ancestor, ConceptId id) const;

  // Deepest common ancestor; ties resolved by the smallest id.
  ConceptId lca(ConceptId x, ConceptId y) const;
  double wu_palmer(ConceptId x, ConceptId y) const;

  AggregateResult aggregate(ConceptId id, const AggregationLevel& level) const;

  // Aggregated activity categories, ascending id.
  const std::vector<ConceptId>& categories() const { return categories_; }

  // Builds and validates a graph. Throws ValidationError listing every
  // problem found.
  static KnowledgeGraph build(std::vector<Concept> concepts,
                              const std::vector<std::pair<ConceptId, ConceptId>>& edges);

 private:
  friend KnowledgeGraph load_ontology(std::istream& in);

  void finalize();

  std::vector<Concept> nodes_;
  std::unordered_map<ConceptId, std::size_t> index_;
  std::vector<std::vector<ConceptId>> parents_;
  std::vector<std::vector<ConceptId>> children_;
  std::vector<int> depth_;
  std::vector<std::vector<bool>> ancestors_;  // ancestors_[i][j]: j is ancestor-or-self of i
  std::vector<std::size_t> lca_;              // n*n table of dense indices
  std::vector<ConceptId> categories_;
  std::size_t root_index_ = 0;
  int max_depth_ = 0;
};

// Reads the TAB separated edge list `child parent kind label [glyph]`.
// The root row uses parent `-` and kind `root`; `#` starts a comment line.
KnowledgeGraph load_ontology(std::istream& in);
KnowledgeGraph load_ontology_file(const std::string& path);

void write_ontology(std::ostream& out, const KnowledgeGraph& graph);

}  // namespace semseq
