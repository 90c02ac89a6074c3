#pragma once
// Stage commands behind the command-line tool. Each returns a process exit
// code and writes its artifacts into the output directory.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>

#include "semseq/explain.hpp"

namespace semseq {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitIo = 2, kExitConfig = 3 };

struct RunConfig {
  std::string ontology;
  std::string sequences;
  std::string out = "out";
  std::optional<std::string> cache;  // default <out>/distmat_cache.bin
  double alpha = 0.0;
  std::optional<double> sigma;
  std::optional<int> k;
  std::pair<int, int> k_range{2, 10};  // clipped to n - 1
  bool squared_ward = true;
  AggregationLevel level = CategoryLevel{};
  bool stops_only = true;
  double residual_threshold = 4.0;
  Weighting weighting = Weighting::occurrence;
  FanoSupport support = FanoSupport::distinct;
  unsigned workers = 1;
  // generate only
  std::uint64_t seed = 1;
  std::size_t per_group = 100;
  double noise = 0.1;
  std::string labels;  // default <out>/generate_labels.csv
};

int cmd_validate(const RunConfig& config, std::ostream& log);
int cmd_stats(const RunConfig& config, std::ostream& log);
int cmd_distmat(const RunConfig& config, std::ostream& log);
int cmd_cluster(const RunConfig& config, std::ostream& log);
int cmd_explain(const RunConfig& config, std::ostream& log);
int cmd_pipeline(const RunConfig& config, std::ostream& log);
// Writes the corpus to config.sequences (default <out>/generate_sequences.csv).
int cmd_generate(const RunConfig& config, std::ostream& log);

}  // namespace semseq
