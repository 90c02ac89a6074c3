#include "semseq/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>

#include "semseq/diagnostics.hpp"

namespace semseq {

std::vector<Archetype> default_archetypes() {
  return {
      {"commuter", {1, 121, 11, 121, 1}},
      {"foot_shopper", {1, 100, 33, 100, 1, 100, 34, 100, 1}},
      {"schoolchild", {1, 131, 22, 100, 51, 100, 1}},
  };
}

namespace {

// Raw engine arithmetic keeps the output identical across standard libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

std::vector<ConceptId> siblings(const KnowledgeGraph& g, ConceptId id) {
  std::set<ConceptId> out;
  for (auto p : g.parents(id)) {
    for (auto c : g.children(p)) {
      if (c != id && g.children(c).empty() && g.kind(c) == g.kind(id)) out.insert(c);
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace

GeneratedCorpus generate_corpus(std::shared_ptr<const KnowledgeGraph> graph, const GeneratorConfig& config) {
  if (!(config.noise >= 0.0 && config.noise <= 1.0)) throw ConfigError("noise rate must lie in [0, 1]");
  if (config.archetypes.empty()) throw ConfigError("at least one archetype is required");
  const auto& g = *graph;
  for (const auto& a : config.archetypes) {
    if (a.pattern.empty()) throw ConfigError("archetype " + a.name + " is empty");
    for (auto c : a.pattern) {
      if (!g.contains(c)) throw ConfigError("archetype " + a.name + " uses unknown concept " + std::to_string(c));
    }
  }

  std::mt19937_64 rng(config.seed);
  const double third = config.noise / 3.0;
  GeneratedCorpus out;
  std::vector<SemanticSequence> seqs;
  for (std::size_t a = 0; a < config.archetypes.size(); ++a) {
    const auto& pattern = config.archetypes[a].pattern;
    for (std::size_t r = 0; r < config.per_group; ++r) {
      std::vector<ConceptId> s;
      for (auto c : pattern) {
        const double u = unit(rng);
        if (u < third) {
          const auto sib = siblings(g, c);
          s.push_back(sib.empty() ? c : sib[pick(rng, sib.size())]);
        } else if (u < 2 * third) {
          s.push_back(c);
          const auto sib = siblings(g, c);
          if (!sib.empty()) s.push_back(sib[pick(rng, sib.size())]);
        } else if (u < 3 * third) {
          continue;
        } else {
          s.push_back(c);
        }
      }
      collapse_repeats(s);
      if (s.empty()) s = pattern;
      char id[32];
      std::snprintf(id, sizeof id, "g%zu_%03zu", a + 1, r + 1);
      seqs.push_back({id, std::move(s)});
      out.groups.push_back(static_cast<int>(a + 1));
    }
  }
  out.corpus = Corpus(std::move(graph), std::move(seqs));
  return out;
}

void write_group_labels(std::ostream& out, const GeneratedCorpus& g, const GeneratorConfig& config) {
  out << "id,group\n";
  for (std::size_t i = 0; i < g.corpus.size(); ++i) {
    out << g.corpus[i].person_id << ',' << config.archetypes[static_cast<std::size_t>(g.groups[i] - 1)].name << '\n';
  }
}

}  // namespace semseq
