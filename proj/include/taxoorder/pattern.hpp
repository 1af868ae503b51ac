#pragma once

#include <string>
#include <vector>

#include "taxoorder/graph.hpp"

namespace taxoorder {

// True when `child` ends with `parent` and is strictly longer, e.g.
// "computer science" matches "science". Compares normalized names.
bool surface_match(const std::string& parent_name,
                   const std::string& child_name);

// All-pairs suffix matching over surface names; matching pairs become
// parent -> child edges with weight 1. Every concept id becomes a node, so
// unmatched concepts appear as isolated nodes.
DirectedGraph build_pattern_graph(const std::vector<Concept>& concepts);

// Pattern graph with any cycles cut. Strict-length matching cannot produce
// cycles, so this is normally identical to build_pattern_graph.
DirectedGraph build_pattern_dag(const std::vector<Concept>& concepts);

}  // namespace taxoorder
