#include "semseq/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace semseq {

std::size_t collapse_repeats(std::vector<ConceptId>& activities) {
  const auto before = activities.size();
  activities.erase(std::unique(activities.begin(), activities.end()), activities.end());
  return before - activities.size();
}

Corpus::Corpus(std::shared_ptr<const KnowledgeGraph> graph, std::vector<SemanticSequence> sequences)
    : graph_(std::move(graph)), sequences_(std::move(sequences)) {}

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(sequences_.size());
  for (const auto& s : sequences_) out.push_back(s.person_id);
  return out;
}

std::vector<std::size_t> Corpus::lengths() const {
  std::vector<std::size_t> out;
  out.reserve(sequences_.size());
  for (const auto& s : sequences_) out.push_back(s.size());
  return out;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

LoadedCorpus load_sequences(std::istream& in, std::shared_ptr<const KnowledgeGraph> graph) {
  LoadedCorpus result;
  auto& diags = result.diagnostics;
  std::vector<SemanticSequence> sequences;
  std::set<std::string> seen_ids;

  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("id,activities", 0) != 0) {
        diags.push_back({Severity::error, line_no, "malformed header: expected 'id,activities'"});
        break;
      }
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      diags.push_back({Severity::error, line_no, "malformed row: missing ',' separator"});
      continue;
    }
    auto id = trim(line.substr(0, comma));
    auto rest = line.substr(comma + 1);
    auto activities_field = rest.substr(0, rest.find(','));
    if (id.empty()) {
      diags.push_back({Severity::error, line_no, "malformed row: empty id"});
      continue;
    }

    std::istringstream tokens(activities_field);
    std::vector<ConceptId> activities;
    std::string token;
    bool row_ok = true;
    while (tokens >> token) {
      ConceptId code = -1;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), code);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        diags.push_back({Severity::error, line_no, "malformed row: invalid activity code '" + token + "'"});
        row_ok = false;
        break;
      }
      if (!graph->contains(code)) {
        diags.push_back({Severity::error, line_no, "unknown activity code " + token + " for '" + id + "'"});
        row_ok = false;
        break;
      }
      auto kind = graph->kind(code);
      if (kind == ConceptKind::root || kind == ConceptKind::meta) {
        diags.push_back({Severity::error, line_no,
                         "activity code " + token + " names a " + to_string(kind) + " concept, not an activity"});
        row_ok = false;
        break;
      }
      activities.push_back(code);
    }
    if (!row_ok) continue;
    if (activities.empty()) {
      diags.push_back({Severity::error, line_no, "malformed row: no activities for '" + id + "'"});
      continue;
    }
    if (!seen_ids.insert(id).second) {
      diags.push_back({Severity::error, line_no, "duplicate person id '" + id + "'"});
      continue;
    }
    if (auto dropped = collapse_repeats(activities)) {
      diags.push_back({Severity::warning, line_no,
                       "collapsed " + std::to_string(dropped) + " consecutive repeat(s) for '" + id + "'"});
    }
    if (activities.size() == 1) {
      diags.push_back({Severity::warning, line_no, "sequence '" + id + "' has a single activity"});
    }
    sequences.push_back({id, std::move(activities)});
  }
  if (in.bad()) throw IoError("failed reading sequence stream");
  if (!header_seen) diags.push_back({Severity::error, 0, "empty sequence file (missing header)"});

  result.corpus = Corpus(std::move(graph), std::move(sequences));
  return result;
}

LoadedCorpus load_sequences_file(const std::string& path, std::shared_ptr<const KnowledgeGraph> graph) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sequence file '" + path + "'");
  return load_sequences(in, std::move(graph));
}

void write_sequences(std::ostream& out, const Corpus& corpus) {
  out << "id,activities\n";
  for (const auto& s : corpus.sequences()) {
    out << s.person_id << ',';
    for (std::size_t i = 0; i < s.activities.size(); ++i) {
      if (i) out << ' ';
      out << s.activities[i];
    }
    out << '\n';
  }
}

FilterResult filter_immobile(const Corpus& corpus) {
  FilterResult result;
  std::vector<SemanticSequence> kept;
  for (const auto& s : corpus.sequences()) {
    bool moves = std::any_of(s.activities.begin(), s.activities.end(),
                             [&](ConceptId a) { return corpus.graph().kind(a) == ConceptKind::move; });
    if (moves) {
      kept.push_back(s);
    } else {
      ++result.removed;
    }
  }
  result.corpus = Corpus(corpus.graph_ptr(), std::move(kept));
  return result;
}

std::vector<ConceptId> aggregate_activities(const KnowledgeGraph& graph, std::span<const ConceptId> activities,
                                            const AggregationLevel& level, bool* ambiguous) {
  std::vector<ConceptId> out;
  out.reserve(activities.size());
  for (auto a : activities) {
    auto r = graph.aggregate(a, level);
    if (ambiguous && r.ambiguous) *ambiguous = true;
    out.push_back(r.id);
  }
  collapse_repeats(out);
  return out;
}

AggregatedCorpus aggregate_corpus(const Corpus& corpus, const AggregationLevel& level) {
  AggregatedCorpus result;
  std::vector<SemanticSequence> out;
  std::set<ConceptId> warned;
  for (const auto& s : corpus.sequences()) {
    for (auto a : s.activities) {
      if (warned.count(a)) continue;
      auto r = corpus.graph().aggregate(a, level);
      if (r.ambiguous) {
        warned.insert(a);
        result.warnings.push_back({Severity::warning, 0,
                                   "ambiguous aggregation of " + std::to_string(a) + " at level " + to_string(level) +
                                       "; chose " + std::to_string(r.id)});
      }
    }
    out.push_back({s.person_id, aggregate_activities(corpus.graph(), s.activities, level)});
  }
  result.corpus = Corpus(corpus.graph_ptr(), std::move(out));
  return result;
}

std::vector<ConceptId> stop_projection(const KnowledgeGraph& graph, std::span<const ConceptId> activities) {
  std::vector<ConceptId> out;
  for (auto a : activities) {
    if (graph.kind(a) == ConceptKind::stop) out.push_back(a);
  }
  collapse_repeats(out);
  return out;
}

SemanticSequence stop_projection(const KnowledgeGraph& graph, const SemanticSequence& sequence) {
  return {sequence.person_id, stop_projection(graph, sequence.activities)};
}

}  // namespace semseq
