// semseq: command-line driver for the sequence analysis stages.

#include <CLI11.hpp>
#include <charconv>
#include <iostream>
#include <map>

#include "semseq/pipeline.hpp"

namespace {

using semseq::ConfigError;

std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("--k-range expects lo:hi, got '" + text + "'");
  int lo = 0, hi = 0;
  auto parse = [&](std::string_view s, int& v) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size() && !s.empty();
  };
  const std::string_view all(text);
  if (!parse(all.substr(0, colon), lo) || !parse(all.substr(colon + 1), hi)) {
    throw ConfigError("--k-range expects lo:hi, got '" + text + "'");
  }
  return {lo, hi};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic mobility sequence analysis: indicators, contextual edit distance, Ward clustering and "
               "cluster explanation."};
  app.set_version_flag("--version", std::string(semseq::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  semseq::RunConfig config;
  std::string cache, sigma = "auto", aggregate = "meta", k_range = "2:10", weighting = "occurrence",
              ward = "squared", support = "distinct";
  int k = 0;

  app.add_option("--ontology", config.ontology, "ontology TSV (child, parent, kind, label, glyph)")
      ->envname("SEMSEQ_ONTOLOGY");
  app.add_option("--sequences", config.sequences, "sequence CSV (id, activities)")->envname("SEMSEQ_SEQUENCES");
  app.add_option("--out", config.out, "output directory")->envname("SEMSEQ_OUT")->capture_default_str();
  app.add_option("--cache", cache, "distance matrix cache (default <out>/distmat_cache.bin)")
      ->envname("SEMSEQ_CACHE");
  app.add_option("--alpha", config.alpha, "weight of the Levenshtein term in [0, 1]")
      ->envname("SEMSEQ_ALPHA")
      ->capture_default_str();
  app.add_option("--sigma", sigma, "context kernel width, or auto for median length / 2")
      ->envname("SEMSEQ_SIGMA")
      ->capture_default_str();
  app.add_option("--k", k, "number of clusters (default: best suggested)")->envname("SEMSEQ_K");
  app.add_option("--k-range", k_range, "candidate cluster counts lo:hi")->envname("SEMSEQ_K_RANGE")->capture_default_str();
  app.add_option("--ward", ward, "Lance-Williams update on squared or raw distances")
      ->envname("SEMSEQ_WARD")
      ->check(CLI::IsMember({"squared", "raw"}))
      ->capture_default_str();
  app.add_option("--aggregate", aggregate, "analysis level: leaf, meta or depth:N")
      ->envname("SEMSEQ_AGGREGATE")
      ->capture_default_str();
  app.add_option("--stops-only", config.stops_only, "OD matrices and motifs on stop activities only")
      ->envname("SEMSEQ_STOPS_ONLY")
      ->capture_default_str();
  app.add_option("--residual-threshold", config.residual_threshold, "Pearson residual threshold for summaries")
      ->envname("SEMSEQ_RESIDUAL_THRESHOLD")
      ->capture_default_str();
  app.add_option("--weighting", weighting, "contingency counting: occurrence or presence")
      ->envname("SEMSEQ_WEIGHTING")
      ->check(CLI::IsMember({"occurrence", "presence"}))
      ->capture_default_str();
  app.add_option("--fano-support", support, "predictability support: distinct activities or length - 1")
      ->envname("SEMSEQ_FANO_SUPPORT")
      ->check(CLI::IsMember({"distinct", "length"}))
      ->capture_default_str();
  app.add_option("--workers", config.workers, "threads for the distance matrix")
      ->envname("SEMSEQ_WORKERS")
      ->capture_default_str();
  app.add_option("--seed", config.seed, "generator seed")->envname("SEMSEQ_SEED")->capture_default_str();
  app.add_option("--per-group", config.per_group, "generator sequences per archetype")
      ->envname("SEMSEQ_PER_GROUP")
      ->capture_default_str();
  app.add_option("--noise", config.noise, "generator per-position edit rate")
      ->envname("SEMSEQ_NOISE")
      ->capture_default_str();
  app.add_option("--labels", config.labels, "generator ground-truth labels (default <out>/generate_labels.csv)")
      ->envname("SEMSEQ_LABELS");

  const std::map<std::string, int (*)(const semseq::RunConfig&, std::ostream&)> commands = {
      {"validate", &semseq::cmd_validate}, {"stats", &semseq::cmd_stats},     {"distmat", &semseq::cmd_distmat},
      {"cluster", &semseq::cmd_cluster},   {"explain", &semseq::cmd_explain}, {"pipeline", &semseq::cmd_pipeline},
      {"generate", &semseq::cmd_generate},
  };
  const std::map<std::string, std::string> help = {
      {"validate", "load the ontology and sequences and report diagnostics"},
      {"stats", "global descriptive indicators"},
      {"distmat", "contextual edit distance matrix (cached)"},
      {"cluster", "Ward clustering and cluster count suggestion"},
      {"explain", "per-cluster profiles, residuals, summaries and the JSON report"},
      {"pipeline", "all stages in order"},
      {"generate", "synthetic corpus with ground-truth labels"},
  };
  for (const auto& [name, text] : help) app.add_subcommand(name, text);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return semseq::kExitConfig;
  }

  try {
    if (!cache.empty()) config.cache = cache;
    if (sigma != "auto") {
      std::size_t used = 0;
      try {
        config.sigma = std::stod(sigma, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != sigma.size()) throw ConfigError("--sigma expects a number or auto");
    }
    if (app.get_option("--k")->count() > 0 || std::getenv("SEMSEQ_K")) config.k = k;
    config.k_range = parse_range(k_range);
    config.level = semseq::parse_level(aggregate);
    config.weighting = weighting == "presence" ? semseq::Weighting::presence : semseq::Weighting::occurrence;
    config.squared_ward = ward == "squared";
    config.support = support == "length" ? semseq::FanoSupport::length_minus_one : semseq::FanoSupport::distinct;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return semseq::kExitConfig;
  }

  const auto name = app.get_subcommands().front()->get_name();
  return commands.at(name)(config, std::cerr);
}
