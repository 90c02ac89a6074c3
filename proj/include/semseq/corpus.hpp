#pragma once
// Semantic sequences: per-person ordered activity lists bound to an ontology.

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "semseq/diagnostics.hpp"
#include "semseq/ontology.hpp"

namespace semseq {

struct SemanticSequence {
  std::string person_id;
  std::vector<ConceptId> activities;  // non-empty, no consecutive repeats

  std::size_t size() const { return activities.size(); }
  bool operator==(const SemanticSequence&) const = default;
};

// Removes consecutive duplicates in place; returns how many were dropped.
std::size_t collapse_repeats(std::vector<ConceptId>& activities);

class Corpus {
 public:
  Corpus() = default;
  Corpus(std::shared_ptr<const KnowledgeGraph> graph, std::vector<SemanticSequence> sequences);

  const KnowledgeGraph& graph() const { return *graph_; }
  std::shared_ptr<const KnowledgeGraph> graph_ptr() const { return graph_; }

  const std::vector<SemanticSequence>& sequences() const { return sequences_; }
  std::size_t size() const { return sequences_.size(); }
  bool empty() const { return sequences_.empty(); }
  const SemanticSequence& operator[](std::size_t i) const { return sequences_[i]; }

  std::vector<std::string> ids() const;
  std::vector<std::size_t> lengths() const;

 private:
  std::shared_ptr<const KnowledgeGraph> graph_;
  std::vector<SemanticSequence> sequences_;
};

struct LoadedCorpus {
  Corpus corpus;
  std::vector<Diagnostic> diagnostics;  // row errors skip the row; warnings keep it
};

// Reads the `id,activities` CSV. Columns after the second are ignored.
LoadedCorpus load_sequences(std::istream& in, std::shared_ptr<const KnowledgeGraph> graph);
LoadedCorpus load_sequences_file(const std::string& path, std::shared_ptr<const KnowledgeGraph> graph);

void write_sequences(std::ostream& out, const Corpus& corpus);

struct FilterResult {
  Corpus corpus;
  std::size_t removed = 0;
};

// Drops sequences without any move activity.
FilterResult filter_immobile(const Corpus& corpus);

struct AggregatedCorpus {
  Corpus corpus;
  std::vector<Diagnostic> warnings;  // ambiguous ancestors
};

std::vector<ConceptId> aggregate_activities(const KnowledgeGraph& graph, std::span<const ConceptId> activities,
                                            const AggregationLevel& level, bool* ambiguous = nullptr);

AggregatedCorpus aggregate_corpus(const Corpus& corpus, const AggregationLevel& level);

// Keeps stop activities only, collapsing repeats. May return a single element
// and returns an empty list when the input has no stop at all.
std::vector<ConceptId> stop_projection(const KnowledgeGraph& graph, std::span<const ConceptId> activities);
SemanticSequence stop_projection(const KnowledgeGraph& graph, const SemanticSequence& sequence);

}  // namespace semseq
