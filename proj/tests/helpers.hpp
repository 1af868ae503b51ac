#pragma once

// Shared fixtures and brute-force reference implementations for the test
// suite. The oracles here are deliberately naive: they recompute results
// from first principles so library output can be checked against them.

#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxoorder/graph.hpp"
#include "taxoorder/rng.hpp"

namespace testutil {

using taxoorder::Concept;
using taxoorder::ConceptId;
using taxoorder::DirectedGraph;
using taxoorder::Rng;

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "taxoorder_XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr)
      throw std::runtime_error("mkdtemp failed");
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// Fixed-point reachability over the edge list; no recursion, no reliance
// on adjacency accessors.
inline bool oracle_reaches(const DirectedGraph& g, const ConceptId& from,
                           const ConceptId& to) {
  if (from == to) return true;
  const auto es = g.edges();
  std::set<ConceptId> seen{from};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& e : es)
      if (seen.count(e.parent) && !seen.count(e.child)) {
        seen.insert(e.child);
        grew = true;
      }
  }
  return seen.count(to) != 0;
}

inline std::set<ConceptId> oracle_ancestors(const DirectedGraph& g,
                                            const ConceptId& n) {
  std::set<ConceptId> out;
  for (const auto& m : g.nodes())
    if (m != n && oracle_reaches(g, m, n)) out.insert(m);
  return out;
}

inline std::set<ConceptId> oracle_descendants(const DirectedGraph& g,
                                              const ConceptId& n) {
  std::set<ConceptId> out;
  for (const auto& m : g.nodes())
    if (m != n && oracle_reaches(g, n, m)) out.insert(m);
  return out;
}

inline bool oracle_acyclic(const DirectedGraph& g) {
  for (const auto& e : g.edges())
    if (oracle_reaches(g, e.child, e.parent)) return false;
  return true;
}

// True when `edge` lies on some directed cycle.
inline bool oracle_on_cycle(const DirectedGraph& g,
                            const taxoorder::WeightedEdge& edge) {
  return oracle_reaches(g, edge.child, edge.parent);
}

inline DirectedGraph random_digraph(Rng& rng, std::size_t max_nodes,
                                    double edge_prob) {
  DirectedGraph g;
  const std::size_t n = 1 + static_cast<std::size_t>(
                                rng.uniform_int(max_nodes));
  std::vector<ConceptId> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("v" + std::to_string(i));
    g.add_node(ids.back());
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && rng.uniform01() < edge_prob)
        g.add_edge(ids[i], ids[j],
                   1.0 + static_cast<double>(rng.uniform_int(5)));
  return g;
}

inline bool is_topo_order(const DirectedGraph& g,
                          const std::vector<ConceptId>& order) {
  if (order.size() != g.node_count()) return false;
  std::map<ConceptId, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (!pos.emplace(order[i], i).second) return false;
  for (const auto& n : g.nodes())
    if (!pos.count(n)) return false;
  for (const auto& e : g.edges())
    if (pos.at(e.parent) >= pos.at(e.child)) return false;
  return true;
}

// Small diamond: r -> {a, b} -> d, plus a stray leaf under a.
inline DirectedGraph diamond() {
  DirectedGraph g;
  for (const char* n : {"r", "a", "b", "d", "x"}) g.add_node(n);
  g.add_edge("r", "a");
  g.add_edge("r", "b");
  g.add_edge("a", "d");
  g.add_edge("b", "d");
  g.add_edge("a", "x");
  return g;
}

}  // namespace testutil
