#include "taxoorder/graph.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <queue>

#include "taxoorder/errors.hpp"

namespace taxoorder {

namespace {
const std::map<ConceptId, double> kNoChildren;
const std::set<ConceptId> kNoParents;
}  // namespace

std::string normalize_surface(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char ch : raw) {
    if (std::isspace(ch)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(ch)));
  }
  return out;
}

void DirectedGraph::add_node(const ConceptId& id) { nodes_.insert(id); }

bool DirectedGraph::has_node(const ConceptId& id) const {
  return nodes_.count(id) != 0;
}

void DirectedGraph::add_edge(const ConceptId& parent, const ConceptId& child,
                             double weight) {
  if (parent == child) throw SelfLoop("self-loop on '" + parent + "'");
  if (!has_node(parent))
    throw UnknownConcept("edge references unknown concept '" + parent + "'");
  if (!has_node(child))
    throw UnknownConcept("edge references unknown concept '" + child + "'");
  auto [it, inserted] = out_[parent].emplace(child, weight);
  if (!inserted) return;  // duplicate insert keeps the first weight
  in_[child].insert(parent);
  ++edge_count_;
}

bool DirectedGraph::has_edge(const ConceptId& parent,
                             const ConceptId& child) const {
  auto it = out_.find(parent);
  return it != out_.end() && it->second.count(child) != 0;
}

double DirectedGraph::edge_weight(const ConceptId& parent,
                                  const ConceptId& child) const {
  auto it = out_.find(parent);
  if (it != out_.end()) {
    auto jt = it->second.find(child);
    if (jt != it->second.end()) return jt->second;
  }
  throw UnknownConcept("no edge <" + parent + ", " + child + ">");
}

void DirectedGraph::remove_edge(const ConceptId& parent,
                                const ConceptId& child) {
  auto it = out_.find(parent);
  if (it == out_.end() || it->second.erase(child) == 0)
    throw UnknownConcept("no edge <" + parent + ", " + child + ">");
  in_[child].erase(parent);
  --edge_count_;
}

std::vector<WeightedEdge> DirectedGraph::edges() const {
  std::vector<WeightedEdge> result;
  result.reserve(edge_count_);
  for (const auto& [parent, children] : out_)
    for (const auto& [child, weight] : children)
      result.push_back({parent, child, weight});
  return result;
}

const std::map<ConceptId, double>& DirectedGraph::children_of(
    const ConceptId& id) const {
  auto it = out_.find(id);
  return it == out_.end() ? kNoChildren : it->second;
}

const std::set<ConceptId>& DirectedGraph::parents_of(
    const ConceptId& id) const {
  auto it = in_.find(id);
  return it == in_.end() ? kNoParents : it->second;
}

bool DirectedGraph::operator==(const DirectedGraph& other) const {
  return nodes_ == other.nodes_ && edges() == other.edges();
}

Taxonomy::Taxonomy(DirectedGraph graph) : graph_(std::move(graph)) {
  if (!is_acyclic(graph_))
    throw CyclicGraph("taxonomy contains a directed cycle");
}

DirectedGraph build_graph(
    const std::vector<Concept>& concepts,
    const std::vector<std::pair<ConceptId, ConceptId>>& edges) {
  DirectedGraph g;
  for (const auto& c : concepts) g.add_node(c.id);
  for (const auto& [parent, child] : edges) g.add_edge(parent, child);
  return g;
}

namespace {

// Kahn's algorithm with an ascending-id tie break. Returns nodes in order,
// or fewer than node_count() nodes when a cycle blocks completion.
std::vector<ConceptId> kahn_order(const DirectedGraph& g) {
  std::map<ConceptId, std::size_t> indegree;
  for (const auto& id : g.nodes()) indegree[id] = g.parents_of(id).size();

  std::priority_queue<ConceptId, std::vector<ConceptId>,
                      std::greater<ConceptId>>
      ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push(id);

  std::vector<ConceptId> order;
  order.reserve(g.node_count());
  while (!ready.empty()) {
    ConceptId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& [child, weight] : g.children_of(id))
      if (--indegree[child] == 0) ready.push(child);
  }
  return order;
}

}  // namespace

bool is_acyclic(const DirectedGraph& g) {
  return kahn_order(g).size() == g.node_count();
}

std::vector<ConceptId> topological_sort(const DirectedGraph& g) {
  std::vector<ConceptId> order = kahn_order(g);
  if (order.size() != g.node_count())
    throw CyclicGraph("graph contains a directed cycle");
  return order;
}

namespace {

std::set<ConceptId> reach(const DirectedGraph& g, const ConceptId& n,
                          bool upward) {
  if (!g.has_node(n)) throw UnknownConcept("unknown concept '" + n + "'");
  std::set<ConceptId> seen;
  std::vector<ConceptId> stack{n};
  while (!stack.empty()) {
    ConceptId cur = stack.back();
    stack.pop_back();
    if (upward) {
      for (const auto& p : g.parents_of(cur))
        if (seen.insert(p).second) stack.push_back(p);
    } else {
      for (const auto& [c, w] : g.children_of(cur))
        if (seen.insert(c).second) stack.push_back(c);
    }
  }
  seen.erase(n);
  return seen;
}

}  // namespace

std::set<ConceptId> ancestors(const DirectedGraph& g, const ConceptId& n) {
  return reach(g, n, /*upward=*/true);
}

std::set<ConceptId> descendants(const DirectedGraph& g, const ConceptId& n) {
  return reach(g, n, /*upward=*/false);
}

namespace {

// Iterative Tarjan SCC; avoids deep recursion on chain-shaped graphs.
std::vector<std::set<ConceptId>> strongly_connected_components(
    const DirectedGraph& g) {
  std::map<ConceptId, int> index, lowlink;
  std::map<ConceptId, bool> on_stack;
  std::vector<ConceptId> stack;
  std::vector<std::set<ConceptId>> components;
  int next_index = 0;

  struct Frame {
    ConceptId node;
    std::map<ConceptId, double>::const_iterator it, end;
  };

  for (const auto& root : g.nodes()) {
    if (index.count(root)) continue;
    std::vector<Frame> frames;
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    const auto& root_children = g.children_of(root);
    frames.push_back({root, root_children.begin(), root_children.end()});

    while (!frames.empty()) {
      Frame& top = frames.back();
      if (top.it != top.end) {
        const ConceptId& child = top.it->first;
        ++top.it;
        if (!index.count(child)) {
          index[child] = lowlink[child] = next_index++;
          stack.push_back(child);
          on_stack[child] = true;
          const auto& grand = g.children_of(child);
          frames.push_back({child, grand.begin(), grand.end()});
        } else if (on_stack[child]) {
          lowlink[top.node] = std::min(lowlink[top.node], index[child]);
        }
      } else {
        if (lowlink[top.node] == index[top.node]) {
          std::set<ConceptId> component;
          ConceptId member;
          do {
            member = stack.back();
            stack.pop_back();
            on_stack[member] = false;
            component.insert(member);
          } while (member != top.node);
          components.push_back(std::move(component));
        }
        ConceptId done = top.node;
        frames.pop_back();
        if (!frames.empty())
          lowlink[frames.back().node] =
              std::min(lowlink[frames.back().node], lowlink[done]);
      }
    }
  }
  return components;
}

}  // namespace

std::vector<std::set<ConceptId>> find_cycles(const DirectedGraph& g) {
  std::vector<std::set<ConceptId>> cyclic;
  for (auto& comp : strongly_connected_components(g))
    if (comp.size() >= 2) cyclic.push_back(std::move(comp));
  std::sort(cyclic.begin(), cyclic.end(),
            [](const std::set<ConceptId>& a, const std::set<ConceptId>& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return *a.begin() < *b.begin();
            });
  return cyclic;
}

DirectedGraph cut_cycles(const DirectedGraph& g) {
  DirectedGraph h = g;
  while (true) {
    auto cycles = find_cycles(h);
    if (cycles.empty()) break;
    const std::set<ConceptId>& scc = cycles.front();
    // Lowest-weight edge inside the component, ties by <parent, child>.
    bool found = false;
    ConceptId best_parent, best_child;
    double best_weight = 0.0;
    for (const auto& parent : scc) {
      for (const auto& [child, weight] : h.children_of(parent)) {
        if (!scc.count(child)) continue;
        if (!found || weight < best_weight ||
            (weight == best_weight &&
             std::tie(parent, child) < std::tie(best_parent, best_child))) {
          found = true;
          best_parent = parent;
          best_child = child;
          best_weight = weight;
        }
      }
    }
    h.remove_edge(best_parent, best_child);
  }
  return h;
}

DirectedGraph ancestor_closure(const DirectedGraph& g) {
  std::vector<ConceptId> order = topological_sort(g);  // throws CyclicGraph
  DirectedGraph closed = g;
  std::map<ConceptId, std::set<ConceptId>> anc;
  for (const auto& id : order) {
    std::set<ConceptId>& mine = anc[id];
    for (const auto& p : g.parents_of(id)) {
      mine.insert(p);
      const auto& theirs = anc[p];
      mine.insert(theirs.begin(), theirs.end());
    }
    for (const auto& a : mine)
      if (!closed.has_edge(a, id)) closed.add_edge(a, id);
  }
  return closed;
}

std::set<ConceptId> leaves(const DirectedGraph& g) {
  std::set<ConceptId> result;
  for (const auto& id : g.nodes())
    if (g.children_of(id).empty()) result.insert(id);
  return result;
}

}  // namespace taxoorder
