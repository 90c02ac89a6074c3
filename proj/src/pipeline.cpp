#include "semseq/pipeline.hpp"

#include <sys/stat.h>

#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "semseq/generator.hpp"
#include "semseq/hash.hpp"

namespace semseq {

namespace fs = std::filesystem;

namespace {

struct Loaded {
  Corpus corpus;
  std::vector<Diagnostic> diagnostics;
};

Loaded load_inputs(const RunConfig& c) {
  if (c.ontology.empty()) throw ConfigError("--ontology is required");
  if (c.sequences.empty()) throw ConfigError("--sequences is required");
  auto graph = std::make_shared<const KnowledgeGraph>(load_ontology_file(c.ontology));
  auto loaded = load_sequences_file(c.sequences, graph);
  return {std::move(loaded.corpus), std::move(loaded.diagnostics)};
}

Corpus load_clean(const RunConfig& c, std::ostream& log) {
  auto loaded = load_inputs(c);
  for (const auto& d : loaded.diagnostics) {
    if (d.severity == Severity::warning) log << format(d) << '\n';
  }
  if (has_errors(loaded.diagnostics)) throw ValidationError(loaded.diagnostics);
  if (loaded.corpus.empty()) throw ValidationError({{Severity::error, 0, "no sequences"}});
  return std::move(loaded.corpus);
}

void check_config(const RunConfig& c) {
  if (c.out.empty()) throw ConfigError("--out is required");
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw ConfigError("--alpha must lie in [0, 1]");
  if (c.sigma && !(*c.sigma > 0.0)) throw ConfigError("--sigma must be positive");
  if (c.k && *c.k < 2) throw ConfigError("--k must be at least 2: silhouette is undefined for one cluster");
  if (c.k_range.first < 2 || c.k_range.first > c.k_range.second) throw ConfigError("--k-range must be lo:hi with 2 <= lo <= hi");
  if (!(c.residual_threshold > 0.0)) throw ConfigError("--residual-threshold must be positive");
  if (c.workers == 0) throw ConfigError("--workers must be at least 1");
}

AnalysisOptions analysis_options(const RunConfig& c) {
  AnalysisOptions o;
  o.level = c.level;
  o.stops_only = c.stops_only;
  o.residual_threshold = c.residual_threshold;
  o.weighting = c.weighting;
  o.support = c.support;
  return o;
}

std::string cache_path(const RunConfig& c) { return c.cache ? *c.cache : (fs::path(c.out) / "distmat_cache.bin").string(); }

std::string iso_mtime(const std::string& path) {
  struct stat st {};
  if (::stat(path.c_str(), &st) != 0) return "";
  std::tm tm{};
  gmtime_r(&st.st_mtime, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

MatrixResult matrix_stage(const RunConfig& c, const Corpus& corpus, std::ostream& log) {
  fs::create_directories(c.out);
  const auto path = cache_path(c);
  auto r = distance_matrix(corpus, {c.alpha, c.sigma}, {c.workers, path});
  switch (r.cache) {
    case CacheStatus::hit:
      log << "distmat: cache hit at " << path << ", computation skipped\n";
      break;
    case CacheStatus::mismatch:
      log << "warning: distmat cache " << path << " has a different fingerprint; recomputed\n";
      break;
    case CacheStatus::miss:
      log << "distmat: computed " << corpus.size() << " x " << corpus.size() << " (sigma " << r.sigma << ")\n";
      break;
    case CacheStatus::disabled:
      break;
  }
  return r;
}

ClusterSection cluster_stage(const RunConfig& c, const DistanceMatrix& m, std::ostream& log) {
  const int n = static_cast<int>(m.size());
  if (c.k && *c.k > n) throw ConfigError("--k exceeds the number of sequences");
  ClusterSection s;
  s.dendrogram = hac_ward(m, c.squared_ward ? WardMode::squared : WardMode::raw);
  const int hi = std::min(c.k_range.second, n - 1);
  if (c.k_range.first <= hi) {
    s.suggestion = suggest_k(s.dendrogram, m, c.k_range.first, hi);
    s.suggested.push_back(s.suggestion->by_silhouette.front());
    if (s.suggestion->by_gap.front() != s.suggested.front()) s.suggested.push_back(s.suggestion->by_gap.front());
  }
  int k = 0;
  if (c.k) {
    k = *c.k;
  } else if (!s.suggested.empty()) {
    k = s.suggested.front();
  } else {
    throw ConfigError("too few sequences to suggest a cluster count; pass --k");
  }
  s.clustering = cut(s.dendrogram, k);
  log << "cluster: k = " << k;
  if (!s.suggested.empty()) {
    log << " (suggested";
    for (int v : s.suggested) log << ' ' << v;
    log << ')';
  }
  log << '\n';
  return s;
}

ReportData base_report(const RunConfig& c, const Corpus& corpus, std::optional<double> sigma,
                       std::optional<std::uint64_t> matrix_fp) {
  ReportData d;
  d.corpus = &corpus;
  d.options = analysis_options(c);
  d.meta.version = kVersion;
  auto& p = d.meta.params;
  p.emplace_back("aggregate", to_string(c.level));
  p.emplace_back("stops_only", c.stops_only ? "true" : "false");
  p.emplace_back("residual_threshold", number(c.residual_threshold));
  p.emplace_back("weighting", c.weighting == Weighting::occurrence ? "occurrence" : "presence");
  p.emplace_back("binning", "poisson");
  p.emplace_back("fano_support", c.support == FanoSupport::distinct ? "distinct" : "length");
  if (sigma) {
    p.emplace_back("alpha", number(c.alpha));
    p.emplace_back("sigma", number(*sigma));
    p.emplace_back("ward", c.squared_ward ? "squared" : "raw");
    p.emplace_back("k", c.k ? std::to_string(*c.k) : "suggested");
    p.emplace_back("k_range", std::to_string(c.k_range.first) + ":" + std::to_string(c.k_range.second));
  }
  Fnv1a h;
  for (const auto& [key, value] : p) {
    h.add(key);
    h.add(value);
  }
  h.add(std::string(kVersion));
  if (matrix_fp) h.add(*matrix_fp);
  for (const auto& s : corpus.sequences()) {
    h.add(s.person_id);
    for (auto a : s.activities) h.add(static_cast<std::uint64_t>(a));
  }
  d.meta.fingerprint = to_hex(h.value());
  d.meta.inputs = {{c.ontology, iso_mtime(c.ontology)}, {c.sequences, iso_mtime(c.sequences)}};
  d.global = global_indicators(corpus, d.options);
  return d;
}

int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    for (const auto& d : e.diagnostics()) log << format(d) << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace

int cmd_validate(const RunConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    auto loaded = load_inputs(config);
    for (const auto& d : loaded.diagnostics) log << format(d) << '\n';
    log << "validate: " << loaded.corpus.size() << " sequences over " << loaded.corpus.graph().size()
        << " concepts\n";
    return has_errors(loaded.diagnostics) ? kExitValidation : kExitOk;
  });
}

int cmd_stats(const RunConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    check_config(config);
    const auto corpus = load_clean(config, log);
    const auto data = base_report(config, corpus, std::nullopt, std::nullopt);
    write_global_section(config.out, corpus, data.global, data.options);
    write_file(fs::path(config.out) / "stats_report.json", [&](std::ostream& o) { o << report_json(data); });
    log << "stats: poisson lambda " << data.global.lengths.poisson_lambda << ", " << data.global.motifs.motifs.size()
        << " motifs\n";
    return kExitOk;
  });
}

int cmd_distmat(const RunConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    check_config(config);
    const auto corpus = load_clean(config, log);
    const auto r = matrix_stage(config, corpus, log);
    write_file(fs::path(config.out) / "distmat_matrix.csv", [&](std::ostream& o) { write_matrix_csv(o, r.matrix); });
    return kExitOk;
  });
}

int cmd_cluster(const RunConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    check_config(config);
    const auto corpus = load_clean(config, log);
    const auto r = matrix_stage(config, corpus, log);
    const auto s = cluster_stage(config, r.matrix, log);
    const fs::path dir(config.out);
    write_file(dir / "clustering_dendrogram.csv", [&](std::ostream& o) { write_dendrogram_csv(o, s.dendrogram); });
    write_file(dir / "clustering_labels.csv", [&](std::ostream& o) { write_labels_csv(o, s.clustering); });
    if (s.suggestion) {
      write_file(dir / "clustering_suggest.csv", [&](std::ostream& o) { write_suggestion_csv(o, *s.suggestion); });
    }
    const auto stats = cluster_stats(corpus, r.matrix, s.clustering, config.level, AnalysisOptions{}.trim);
    write_file(dir / "clustering_stats.csv", [&](std::ostream& o) { write_stats_csv(o, stats); });
    return kExitOk;
  });
}

int cmd_explain(const RunConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    check_config(config);
    const auto corpus = load_clean(config, log);
    const auto r = matrix_stage(config, corpus, log);
    auto data = base_report(config, corpus, r.sigma, r.matrix.fingerprint);
    data.clusters = cluster_stage(config, r.matrix, log);
    const auto& cl = data.clusters->clustering;
    data.profiles = cluster_profiles(corpus, cl, r.matrix, data.options);
    data.summaries = behavior_summary(corpus, cl, r.matrix, data.options);
    data.activities = associate(activity_table(corpus, cl, data.options.level, data.options.weighting));
    try {
      data.motifs = associate(motif_table(corpus, cl, data.options.stops_only));
    } catch (const std::invalid_argument&) {
      log << "explain: no motifs to associate\n";
    }
    emit_report(data, config.out);
    log << "explain: report written to " << (fs::path(config.out) / "report.json").string() << '\n';
    return kExitOk;
  });
}

int cmd_pipeline(const RunConfig& config, std::ostream& log) {
  for (auto* stage : {&cmd_validate, &cmd_stats, &cmd_distmat, &cmd_cluster, &cmd_explain}) {
    if (int code = stage(config, log); code != kExitOk) return code;
  }
  return kExitOk;
}

int cmd_generate(const RunConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    if (config.ontology.empty()) throw ConfigError("--ontology is required");
    if (config.per_group == 0) throw ConfigError("--per-group must be positive");
    auto graph = std::make_shared<const KnowledgeGraph>(load_ontology_file(config.ontology));
    GeneratorConfig g;
    g.per_group = config.per_group;
    g.noise = config.noise;
    g.seed = config.seed;
    const auto out = generate_corpus(graph, g);
    const fs::path dir(config.out);
    const auto seq_path = config.sequences.empty() ? dir / "generate_sequences.csv" : fs::path(config.sequences);
    const auto label_path = config.labels.empty() ? dir / "generate_labels.csv" : fs::path(config.labels);
    if (seq_path.has_parent_path()) fs::create_directories(seq_path.parent_path());
    if (label_path.has_parent_path()) fs::create_directories(label_path.parent_path());
    write_file(seq_path, [&](std::ostream& o) { write_sequences(o, out.corpus); });
    write_file(label_path, [&](std::ostream& o) { write_group_labels(o, out, g); });
    log << "generate: " << out.corpus.size() << " sequences in " << g.archetypes.size() << " groups\n";
    return kExitOk;
  });
}

}  // namespace semseq
