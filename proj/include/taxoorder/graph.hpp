#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace taxoorder {

using ConceptId = std::string;

// Lowercases ASCII letters, collapses whitespace runs to single spaces and
// trims the ends. Idempotent.
std::string normalize_surface(std::string_view raw);

struct Concept {
  ConceptId id;
  std::string surface_name;
};

struct WeightedEdge {
  ConceptId parent;
  ConceptId child;
  double weight = 1.0;
  bool operator==(const WeightedEdge&) const = default;
};

// Directed graph over concept ids. Node and adjacency containers are
// ordered, so every iteration order (and therefore every downstream
// artifact) is deterministic.
class DirectedGraph {
 public:
  void add_node(const ConceptId& id);
  bool has_node(const ConceptId& id) const;

  // Rejects self-loops and edges whose endpoints are not nodes.
  // Re-adding an existing edge keeps the first weight.
  void add_edge(const ConceptId& parent, const ConceptId& child,
                double weight = 1.0);
  bool has_edge(const ConceptId& parent, const ConceptId& child) const;
  double edge_weight(const ConceptId& parent, const ConceptId& child) const;
  void remove_edge(const ConceptId& parent, const ConceptId& child);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::set<ConceptId>& nodes() const { return nodes_; }
  std::vector<WeightedEdge> edges() const;  // sorted by (parent, child)

  const std::map<ConceptId, double>& children_of(const ConceptId& id) const;
  const std::set<ConceptId>& parents_of(const ConceptId& id) const;

  bool operator==(const DirectedGraph& other) const;

 private:
  std::set<ConceptId> nodes_;
  std::map<ConceptId, std::map<ConceptId, double>> out_;
  std::map<ConceptId, std::set<ConceptId>> in_;
  std::size_t edge_count_ = 0;
};

// A directed graph verified acyclic at construction. Forests and multiple
// roots are allowed; multi-parent nodes are allowed.
class Taxonomy {
 public:
  Taxonomy() = default;
  explicit Taxonomy(DirectedGraph graph);  // throws CyclicGraph
  const DirectedGraph& graph() const { return graph_; }

 private:
  DirectedGraph graph_;
};

// Builds a graph from a concept list and an edge list; edges referencing
// unknown ids raise UnknownConcept, self-loops raise SelfLoop, duplicate
// edges are collapsed.
DirectedGraph build_graph(
    const std::vector<Concept>& concepts,
    const std::vector<std::pair<ConceptId, ConceptId>>& edges);

bool is_acyclic(const DirectedGraph& g);

// Kahn's algorithm; nodes with no ordering constraint are emitted in
// ascending id order. Throws CyclicGraph.
std::vector<ConceptId> topological_sort(const DirectedGraph& g);

// All nodes with a directed path to n / from n; n itself excluded.
std::set<ConceptId> ancestors(const DirectedGraph& g, const ConceptId& n);
std::set<ConceptId> descendants(const DirectedGraph& g, const ConceptId& n);

// Strongly connected components of size >= 2, sorted by descending size,
// ties by smallest member id.
std::vector<std::set<ConceptId>> find_cycles(const DirectedGraph& g);

// Removes edges until acyclic: repeatedly takes the largest SCC (tie:
// smallest member id) and removes its lowest-weight edge (ties by
// lexicographic <parent, child>), then recomputes. Edges lying on no
// cycle are never touched.
DirectedGraph cut_cycles(const DirectedGraph& g);

// Adds an edge from every ancestor to every descendant. Throws CyclicGraph.
DirectedGraph ancestor_closure(const DirectedGraph& g);

// Nodes with out-degree zero.
std::set<ConceptId> leaves(const DirectedGraph& g);

}  // namespace taxoorder
