#include "taxoorder/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "taxoorder/errors.hpp"
#include "taxoorder/parallel.hpp"

namespace taxoorder {

namespace {

// (affinity desc, id asc); candidates arrive with distinct ids.
void sort_candidates(std::vector<std::pair<ConceptId, double>>& cs) {
  std::sort(cs.begin(), cs.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
}

std::vector<ConceptId> sorted_nodes(const Taxonomy& t) {
  const auto& ns = t.graph().nodes();
  return {ns.begin(), ns.end()};
}

}  // namespace

RankedParents BuiltinMatcher::rank_parents(const Taxonomy& current,
                                           const ConceptId& query) const {
  if (current.graph().node_count() == 0)
    throw EmptyTaxonomy("no candidate parents to rank");
  if (params_.dim != store_.dim())
    throw ShapeMismatch("scorer trained for dim " +
                        std::to_string(params_.dim) +
                        ", embeddings have dim " +
                        std::to_string(store_.dim()));
  std::vector<ConceptId> nodes = sorted_nodes(current);
  // Validate lookups up front so the parallel section cannot throw.
  const auto& qvec = store_.at(query);
  for (const auto& n : nodes) store_.at(n);
  RankedParents rp;
  rp.query = query;
  rp.candidates.resize(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    rp.candidates[i] = {nodes[i],
                        score_pair(params_, store_.at(nodes[i]), qvec)};
  });
  sort_candidates(rp.candidates);
  return rp;
}

RankedParents GroundTruthOracle::rank_parents(const Taxonomy& current,
                                              const ConceptId& query) const {
  if (current.graph().node_count() == 0)
    throw EmptyTaxonomy("no candidate parents to rank");
  const auto& qvec = store_.at(query);
  const auto pm = parent_map_.find(query);
  RankedParents rp;
  rp.query = query;
  for (const auto& n : current.graph().nodes()) {
    const bool is_true_parent =
        pm != parent_map_.end() && pm->second.count(n) != 0;
    rp.candidates.emplace_back(
        n, is_true_parent ? 1.0 : cosine(store_.at(n), qvec));
  }
  sort_candidates(rp.candidates);
  return rp;
}

RankedParents FileAffinityModel::rank_parents(const Taxonomy& current,
                                              const ConceptId& query) const {
  if (current.graph().node_count() == 0)
    throw EmptyTaxonomy("no candidate parents to rank");
  RankedParents rp;
  rp.query = query;
  for (const auto& n : current.graph().nodes()) {
    auto it = affinities_.find({query, n});
    if (it == affinities_.end())
      throw Error("affinity file has no score for query '" + query +
                  "' against candidate '" + n + "'");
    rp.candidates.emplace_back(n, it->second);
  }
  sort_candidates(rp.candidates);
  return rp;
}

Taxonomy insert(const Taxonomy& current, const ConceptId& parent,
                const ConceptId& query) {
  const DirectedGraph& g = current.graph();
  if (!g.has_node(parent))
    throw UnknownParent("parent '" + parent + "' is not in the taxonomy");
  if (g.has_node(query))
    throw DuplicateConcept("'" + query + "' is already in the taxonomy");
  DirectedGraph next = g;
  next.add_node(query);
  next.add_edge(parent, query);
  return Taxonomy(std::move(next));
}

ExpansionTrace expand_all(const Taxonomy& t0,
                          const std::vector<ConceptId>& order,
                          const ExpansionModel& model) {
  ExpansionTrace trace;
  trace.final_taxonomy = t0;
  std::size_t done = 0;
  try {
    for (const ConceptId& query : order) {
      RankedParents rp = model.rank_parents(trace.final_taxonomy, query);
      if (rp.candidates.empty())
        throw EmptyTaxonomy("no candidate parents for '" + query + "'");
      const ConceptId& parent = rp.candidates.front().first;
      trace.final_taxonomy = insert(trace.final_taxonomy, parent, query);
      trace.predicted_edges.emplace_back(parent, query);
      trace.per_query_ranks.emplace(query, std::move(rp));
      ++done;
    }
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " (expansion stopped after " +
                std::to_string(done) + " of " + std::to_string(order.size()) +
                " insertions)");
  }
  return trace;
}

void write_affinity_requests(const Taxonomy& t0,
                             const std::vector<ConceptId>& order,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  // Cover every candidate a query could meet: all initial nodes plus every
  // other query, whatever the insertion order turns out to be.
  std::set<ConceptId> pool = t0.graph().nodes();
  for (const auto& q : order) pool.insert(q);
  for (const auto& q : order)
    for (const auto& c : pool)
      if (c != q) out << q << '\t' << c << '\n';
}

std::map<std::pair<ConceptId, ConceptId>, double> load_affinity_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::map<std::pair<ConceptId, ConceptId>, double> affinities;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string::npos
                               ? std::string::npos
                               : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw ParseError(path, lineno, "expected `query<TAB>candidate<TAB>affinity`");
    const std::string query = line.substr(0, t1);
    const std::string candidate = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string value = line.substr(t2 + 1);
    const char* begin = value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
      throw ParseError(path, lineno, "bad affinity '" + value + "'");
    affinities[{query, candidate}] = v;
  }
  return affinities;
}

}  // namespace taxoorder
