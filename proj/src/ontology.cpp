#include "semseq/ontology.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>

namespace semseq {

const char* to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::stop: return "stop";
    case ConceptKind::move: return "move";
    case ConceptKind::meta: return "meta";
    case ConceptKind::root: return "root";
  }
  return "?";
}

std::optional<ConceptKind> parse_kind(const std::string& text) {
  if (text == "stop") return ConceptKind::stop;
  if (text == "move") return ConceptKind::move;
  if (text == "meta") return ConceptKind::meta;
  if (text == "root") return ConceptKind::root;
  return std::nullopt;
}

UnknownConcept::UnknownConcept(ConceptId id)
    : std::out_of_range("unknown concept " + std::to_string(id)), id_(id) {}

AggregationLevel parse_level(const std::string& text) {
  if (text == "leaf") return LeafLevel{};
  if (text == "meta") return CategoryLevel{};
  if (text.rfind("depth:", 0) == 0) {
    int depth = -1;
    const char* first = text.data() + 6;
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, depth);
    if (ec == std::errc() && ptr == last && first != last && depth >= 0) return DepthLevel{depth};
  }
  throw ConfigError("invalid aggregation level '" + text + "' (expected leaf, meta or depth:N)");
}

std::string to_string(const AggregationLevel& level) {
  if (std::holds_alternative<LeafLevel>(level)) return "leaf";
  if (std::holds_alternative<CategoryLevel>(level)) return "meta";
  return "depth:" + std::to_string(std::get<DepthLevel>(level).depth);
}

namespace {

struct RawEdge {
  ConceptId child;
  ConceptId parent;
  int line;
};

struct RawNode {
  Concept node;
  int line;
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::optional<ConceptId> parse_id(const std::string& text) {
  ConceptId value = -1;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || value < 0) {
    return std::nullopt;
  }
  return value;
}

// Shared validation for file and programmatic construction. Consumes the
// raw rows and fills the graph's node and edge lists.
void assemble(std::vector<RawNode> raw_nodes, const std::vector<RawEdge>& raw_edges,
              std::vector<Diagnostic>& diags, std::vector<Concept>& nodes,
              std::vector<std::pair<ConceptId, ConceptId>>& edges) {
  std::map<ConceptId, RawNode> declared;
  std::optional<ConceptId> root;
  for (auto& raw : raw_nodes) {
    const auto id = raw.node.id;
    if (raw.node.kind == ConceptKind::root) {
      if (root && *root != id) {
        diags.push_back({Severity::error, raw.line,
                         "multiple roots: " + std::to_string(id) + " and " + std::to_string(*root)});
        continue;
      }
      root = id;
    }
    auto it = declared.find(id);
    if (it == declared.end()) {
      declared.emplace(id, raw);
      continue;
    }
    auto& prev = it->second.node;
    if (prev.kind != raw.node.kind || prev.label != raw.node.label ||
        (!raw.node.glyph.empty() && !prev.glyph.empty() && prev.glyph != raw.node.glyph)) {
      diags.push_back({Severity::error, raw.line,
                       "duplicate id " + std::to_string(id) + " with a conflicting definition (first at line " +
                           std::to_string(it->second.line) + ")"});
    } else if (prev.kind == ConceptKind::root) {
      diags.push_back({Severity::error, raw.line, "duplicate root row for " + std::to_string(id)});
    } else if (prev.glyph.empty()) {
      prev.glyph = raw.node.glyph;
    }
  }
  if (!root) diags.push_back({Severity::error, 0, "no root row (parent '-' and kind 'root')"});

  std::set<std::pair<ConceptId, ConceptId>> seen;
  std::map<ConceptId, std::vector<ConceptId>> children;
  auto reaches = [&](ConceptId from, ConceptId target) {
    std::vector<ConceptId> stack{from};
    std::set<ConceptId> visited;
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      if (cur == target) return true;
      if (!visited.insert(cur).second) continue;
      auto it = children.find(cur);
      if (it == children.end()) continue;
      for (auto c : it->second) stack.push_back(c);
    }
    return false;
  };

  for (const auto& e : raw_edges) {
    if (!seen.insert({e.child, e.parent}).second) {
      diags.push_back({Severity::error, e.line,
                       "duplicate edge " + std::to_string(e.parent) + " -> " + std::to_string(e.child)});
      continue;
    }
    if (root && e.child == *root) {
      diags.push_back({Severity::error, e.line, "edge targets the root " + std::to_string(e.child)});
      continue;
    }
    if (!declared.count(e.parent)) {
      diags.push_back({Severity::error, e.line,
                       "disconnected node " + std::to_string(e.child) + ": parent " + std::to_string(e.parent) +
                           " is not declared"});
      continue;
    }
    if (e.parent == e.child || reaches(e.child, e.parent)) {
      diags.push_back({Severity::error, e.line,
                       "cycle detected: edge " + std::to_string(e.parent) + " -> " + std::to_string(e.child) +
                           " closes a cycle"});
      continue;
    }
    children[e.parent].push_back(e.child);
    edges.emplace_back(e.child, e.parent);
  }

  if (root) {
    std::set<ConceptId> reached{*root};
    std::deque<ConceptId> queue{*root};
    while (!queue.empty()) {
      auto cur = queue.front();
      queue.pop_front();
      auto it = children.find(cur);
      if (it == children.end()) continue;
      for (auto c : it->second) {
        if (reached.insert(c).second) queue.push_back(c);
      }
    }
    for (const auto& [id, raw] : declared) {
      if (!reached.count(id)) {
        diags.push_back({Severity::error, raw.line,
                         "disconnected node " + std::to_string(id) + ": not reachable from the root"});
      }
    }
  }

  for (auto& [id, raw] : declared) nodes.push_back(raw.node);
}

}  // namespace

std::size_t KnowledgeGraph::index_of(ConceptId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownConcept(id);
  return it->second;
}

const std::vector<ConceptId>& KnowledgeGraph::parents(ConceptId id) const { return parents_[index_of(id)]; }

const std::vector<ConceptId>& KnowledgeGraph::children(ConceptId id) const { return children_[index_of(id)]; }

int KnowledgeGraph::depth(ConceptId id) const { return depth_[index_of(id)]; }

bool KnowledgeGraph::is_ancestor_or_self(ConceptId ancestor, ConceptId id) const {
  return ancestors_[index_of(id)][index_of(ancestor)];
}

ConceptId KnowledgeGraph::lca(ConceptId x, ConceptId y) const {
  const auto& ax = ancestors_[index_of(x)];
  const auto& ay = ancestors_[index_of(y)];
  std::size_t best = root_index_;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    // Ascending index order is ascending id order, so strict > keeps the smallest id on ties.
    if (ax[j] && ay[j] && depth_[j] > depth_[best]) best = j;
  }
  return nodes_[best].id;
}

double KnowledgeGraph::wu_palmer(ConceptId x, ConceptId y) const {
  const int dx = depth(x);
  const int dy = depth(y);
  if (dx + dy == 0) throw std::domain_error("Wu-Palmer similarity is undefined for the root");
  return 2.0 * depth(lca(x, y)) / static_cast<double>(dx + dy);
}

AggregateResult KnowledgeGraph::aggregate(ConceptId id, const AggregationLevel& level) const {
  index_of(id);
  if (std::holds_alternative<LeafLevel>(level)) return {id, false};

  if (const auto* d = std::get_if<DepthLevel>(&level)) {
    if (depth(id) <= d->depth) return {id, false};
    std::set<ConceptId> frontier{id};
    int cur = depth(id);
    while (cur > d->depth) {
      std::set<ConceptId> next;
      for (auto c : frontier) {
        for (auto p : parents(c)) {
          if (depth(p) == cur - 1) next.insert(p);
        }
      }
      frontier = std::move(next);
      --cur;
    }
    return {*frontier.begin(), frontier.size() > 1};
  }

  // Category level: nearest category ancestor-or-self by upward distance.
  std::set<ConceptId> frontier{id};
  std::set<ConceptId> visited{id};
  while (!frontier.empty()) {
    std::vector<ConceptId> hits;
    for (auto c : frontier) {
      if (std::binary_search(categories_.begin(), categories_.end(), c)) hits.push_back(c);
    }
    if (!hits.empty()) return {hits.front(), hits.size() > 1};
    std::set<ConceptId> next;
    for (auto c : frontier) {
      for (auto p : parents(c)) {
        if (visited.insert(p).second) next.insert(p);
      }
    }
    frontier = std::move(next);
  }
  return {id, false};
}

void KnowledgeGraph::finalize() {
  std::sort(nodes_.begin(), nodes_.end(), [](const Concept& a, const Concept& b) { return a.id < b.id; });
  const std::size_t n = nodes_.size();
  index_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    index_[nodes_[i].id] = i;
    if (nodes_[i].kind == ConceptKind::root) root_index_ = i;
  }
  for (auto& list : parents_) std::sort(list.begin(), list.end());
  for (auto& list : children_) std::sort(list.begin(), list.end());

  depth_.assign(n, -1);
  depth_[root_index_] = 0;
  std::deque<std::size_t> queue{root_index_};
  std::vector<std::size_t> topo;
  std::vector<int> pending(n, 0);
  for (std::size_t i = 0; i < n; ++i) pending[i] = static_cast<int>(parents_[i].size());
  // BFS gives depths; Kahn's order gives ancestor closure.
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    for (auto c : children_[cur]) {
      auto ci = index_.at(c);
      if (depth_[ci] < 0) {
        depth_[ci] = depth_[cur] + 1;
        queue.push_back(ci);
      }
    }
  }
  std::deque<std::size_t> ready{root_index_};
  while (!ready.empty()) {
    auto cur = ready.front();
    ready.pop_front();
    topo.push_back(cur);
    for (auto c : children_[cur]) {
      auto ci = index_.at(c);
      if (--pending[ci] == 0) ready.push_back(ci);
    }
  }
  ancestors_.assign(n, std::vector<bool>(n, false));
  for (auto i : topo) {
    ancestors_[i][i] = true;
    for (auto p : parents_[i]) {
      const auto& pa = ancestors_[index_.at(p)];
      for (std::size_t j = 0; j < n; ++j) {
        if (pa[j]) ancestors_[i][j] = true;
      }
    }
  }
  max_depth_ = *std::max_element(depth_.begin(), depth_.end());

  categories_.clear();
  for (const auto& c : nodes_) {
    if (!c.glyph.empty()) categories_.push_back(c.id);
  }
  if (categories_.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (nodes_[i].kind != ConceptKind::meta) continue;
      bool has_activity_child = std::any_of(children_[i].begin(), children_[i].end(), [&](ConceptId c) {
        auto k = nodes_[index_.at(c)].kind;
        return k == ConceptKind::stop || k == ConceptKind::move;
      });
      if (has_activity_child) categories_.push_back(nodes_[i].id);
    }
  }
}

KnowledgeGraph KnowledgeGraph::build(std::vector<Concept> concepts,
                                     const std::vector<std::pair<ConceptId, ConceptId>>& edges) {
  std::vector<RawNode> raw_nodes;
  for (auto& c : concepts) raw_nodes.push_back({std::move(c), 0});
  std::vector<RawEdge> raw_edges;
  for (const auto& [child, parent] : edges) raw_edges.push_back({child, parent, 0});
  std::vector<Diagnostic> diags;
  std::vector<Concept> nodes;
  std::vector<std::pair<ConceptId, ConceptId>> kept;
  assemble(std::move(raw_nodes), raw_edges, diags, nodes, kept);
  if (has_errors(diags)) throw ValidationError(std::move(diags));

  KnowledgeGraph g;
  g.nodes_ = std::move(nodes);
  std::sort(g.nodes_.begin(), g.nodes_.end(), [](const Concept& a, const Concept& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < g.nodes_.size(); ++i) g.index_[g.nodes_[i].id] = i;
  g.parents_.assign(g.nodes_.size(), {});
  g.children_.assign(g.nodes_.size(), {});
  for (const auto& [child, parent] : kept) {
    g.parents_[g.index_.at(child)].push_back(parent);
    g.children_[g.index_.at(parent)].push_back(child);
  }
  g.finalize();
  return g;
}

KnowledgeGraph load_ontology(std::istream& in) {
  std::vector<Diagnostic> diags;
  std::vector<RawNode> raw_nodes;
  std::vector<RawEdge> raw_edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() < 4 || fields.size() > 5) {
      diags.push_back({Severity::error, line_no,
                       "malformed row: expected 4 or 5 TAB separated fields, got " + std::to_string(fields.size())});
      continue;
    }
    auto child = parse_id(fields[0]);
    auto kind = parse_kind(fields[2]);
    if (!child) {
      diags.push_back({Severity::error, line_no, "malformed row: invalid concept id '" + fields[0] + "'"});
      continue;
    }
    if (!kind) {
      diags.push_back({Severity::error, line_no, "malformed row: invalid kind '" + fields[2] + "'"});
      continue;
    }
    if (fields[3].empty()) {
      diags.push_back({Severity::error, line_no, "malformed row: empty label"});
      continue;
    }
    const bool is_root_row = fields[1] == "-";
    if (is_root_row != (*kind == ConceptKind::root)) {
      diags.push_back({Severity::error, line_no,
                       "malformed row: the root row needs parent '-' and kind 'root', other rows neither"});
      continue;
    }
    Concept c{*child, fields[3], *kind, fields.size() == 5 ? fields[4] : std::string{}};
    raw_nodes.push_back({c, line_no});
    if (is_root_row) continue;
    auto parent = parse_id(fields[1]);
    if (!parent) {
      diags.push_back({Severity::error, line_no, "malformed row: invalid parent id '" + fields[1] + "'"});
      continue;
    }
    raw_edges.push_back({*child, *parent, line_no});
  }
  if (in.bad()) throw IoError("failed reading ontology stream");

  std::vector<Concept> nodes;
  std::vector<std::pair<ConceptId, ConceptId>> kept;
  assemble(std::move(raw_nodes), raw_edges, diags, nodes, kept);
  if (has_errors(diags)) throw ValidationError(std::move(diags));
  return KnowledgeGraph::build(std::move(nodes), kept);
}

KnowledgeGraph load_ontology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ontology file '" + path + "'");
  return load_ontology(in);
}

void write_ontology(std::ostream& out, const KnowledgeGraph& graph) {
  out << "# child\tparent\tkind\tlabel\tglyph\n";
  auto emit = [&](const Concept& c, const std::string& parent) {
    out << c.id << '\t' << parent << '\t' << to_string(c.kind) << '\t' << c.label;
    if (!c.glyph.empty()) out << '\t' << c.glyph;
    out << '\n';
  };
  for (const auto& c : graph.nodes()) {
    if (c.kind == ConceptKind::root) {
      emit(c, "-");
      continue;
    }
    for (auto p : graph.parents(c.id)) emit(c, std::to_string(p));
  }
}

}  // namespace semseq
