#include "taxoorder/pattern.hpp"

namespace taxoorder {

bool surface_match(const std::string& parent_name,
                   const std::string& child_name) {
  std::string p = normalize_surface(parent_name);
  std::string c = normalize_surface(child_name);
  if (c.size() <= p.size()) return false;
  return c.compare(c.size() - p.size(), p.size(), p) == 0;
}

DirectedGraph build_pattern_graph(const std::vector<Concept>& concepts) {
  DirectedGraph g;
  for (const auto& c : concepts) g.add_node(c.id);
  for (const auto& a : concepts)
    for (const auto& c : concepts) {
      if (a.id == c.id) continue;
      if (surface_match(a.surface_name, c.surface_name))
        g.add_edge(a.id, c.id, 1.0);
    }
  return g;
}

DirectedGraph build_pattern_dag(const std::vector<Concept>& concepts) {
  return cut_cycles(build_pattern_graph(concepts));
}

}  // namespace taxoorder
