#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "taxoorder/graph.hpp"

namespace taxoorder::io {

// Taxonomy edge file: one `parent<TAB>child` per line, `#` comment lines
// ignored. A line with a single field declares an isolated node, which the
// writer emits only when a node has no incident edges (a plain edge list
// cannot represent those).
DirectedGraph load_taxonomy_graph(const std::string& path);
Taxonomy load_taxonomy(const std::string& path);
void save_taxonomy(const DirectedGraph& g, const std::string& path);

// Weighted edge dump: `parent<TAB>child<TAB>weight`.
void save_weighted_edges(const DirectedGraph& g, const std::string& path);

// Concept file: `id<TAB>surface_name`; names are normalized on load.
std::vector<Concept> load_concepts(const std::string& path);
void save_concepts(const std::vector<Concept>& concepts,
                   const std::string& path);

// One id per line (new-concept lists, order files).
std::vector<ConceptId> load_id_list(const std::string& path);
void save_id_list(const std::vector<ConceptId>& ids, const std::string& path);

// Ground-truth file: `query<TAB>parent`, one line per true parent.
std::map<ConceptId, std::set<ConceptId>> load_parent_map(
    const std::string& path);
void save_parent_map(const std::map<ConceptId, std::set<ConceptId>>& pm,
                     const std::string& path);

// printf-style float formatting pinned to the C locale.
std::string format_double(double v, const char* fmt = "%.17g");

// FNV-1a content hash used by run manifests.
std::uint64_t fnv1a64_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace taxoorder::io
