#pragma once
// Synthetic corpora built from behavior templates with ontology-aware noise.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "semseq/corpus.hpp"

namespace semseq {

struct Archetype {
  std::string name;
  std::vector<ConceptId> pattern;
};

// Commuter, foot shopper and schoolchild over the reference ontology.
std::vector<Archetype> default_archetypes();

struct GeneratorConfig {
  std::vector<Archetype> archetypes = default_archetypes();
  std::size_t per_group = 100;
  // Per-position edit probability, split evenly between replacing the
  // activity by an ontology sibling, inserting a sibling after it, and
  // deleting it. Repeats are collapsed afterwards.
  double noise = 0.1;
  std::uint64_t seed = 1;
};

struct GeneratedCorpus {
  Corpus corpus;
  std::vector<int> groups;  // 1-based archetype index per sequence
};

// Throws ConfigError on a rate outside [0, 1], an empty archetype list, or a
// template concept missing from the graph.
GeneratedCorpus generate_corpus(std::shared_ptr<const KnowledgeGraph> graph, const GeneratorConfig& config);

// `id,group` with the archetype name.
void write_group_labels(std::ostream& out, const GeneratedCorpus& g, const GeneratorConfig& config);

}  // namespace semseq
