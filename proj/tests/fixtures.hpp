#pragma once

#include <memory>
#include <sstream>
#include <string>

#include "semseq/corpus.hpp"
#include "semseq/ontology.hpp"

namespace semseq::testing {

inline std::string data_path(const std::string& name) { return std::string(SEMSEQ_DATA_DIR) + "/" + name; }

inline std::shared_ptr<const KnowledgeGraph> reference_graph() {
  static auto graph = std::make_shared<const KnowledgeGraph>(load_ontology_file(data_path("emd_ontology.tsv")));
  return graph;
}

inline KnowledgeGraph graph_from_text(const std::string& text) {
  std::istringstream in(text);
  return load_ontology(in);
}

inline Corpus corpus_from_text(const std::string& csv, std::shared_ptr<const KnowledgeGraph> graph = reference_graph()) {
  std::istringstream in(csv);
  return load_sequences(in, std::move(graph)).corpus;
}

}  // namespace semseq::testing
