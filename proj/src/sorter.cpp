#include "taxoorder/sorter.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "taxoorder/errors.hpp"
#include "taxoorder/parallel.hpp"
#include "taxoorder/pattern.hpp"
#include "taxoorder/rng.hpp"

namespace taxoorder {

namespace {

std::vector<ConceptId> sorted_ids(const std::vector<Concept>& concepts) {
  std::vector<ConceptId> ids;
  ids.reserve(concepts.size());
  for (const auto& c : concepts) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void require_vectors(const std::vector<ConceptId>& ids,
                     const EmbeddingStore& by_id) {
  for (const auto& id : ids) by_id.at(id);
}

bool reaches(const DirectedGraph& g, const ConceptId& from,
             const ConceptId& to) {
  if (from == to) return true;
  std::set<ConceptId> seen{from};
  std::deque<ConceptId> queue{from};
  while (!queue.empty()) {
    const ConceptId cur = queue.front();
    queue.pop_front();
    for (const auto& [next, w] : g.children_of(cur)) {
      if (next == to) return true;
      if (seen.insert(next).second) queue.push_back(next);
    }
  }
  return false;
}

void sort_pseudo_edges(std::vector<PseudoEdge>& edges) {
  std::sort(edges.begin(), edges.end(),
            [](const PseudoEdge& x, const PseudoEdge& y) {
              if (x.weight != y.weight) return x.weight > y.weight;
              if (x.parent != y.parent) return x.parent < y.parent;
              return x.child < y.child;
            });
}

struct DisjointSet {
  std::map<ConceptId, ConceptId> parent;

  const ConceptId& find(const ConceptId& x) {
    ConceptId& p = parent.at(x);
    if (p == x) return p;
    p = find(p);
    return p;
  }

  // Returns false when x and y were already joined.
  bool unite(const ConceptId& x, const ConceptId& y) {
    const ConceptId rx = find(x), ry = find(y);
    if (rx == ry) return false;
    parent[rx] = ry;
    return true;
  }
};

}  // namespace

std::vector<CandidatePair> candidate_pairs(
    const std::vector<Concept>& new_concepts, const EmbeddingStore& by_id,
    double alpha) {
  if (alpha < -1.0 || alpha > 1.0)
    throw Error("similarity threshold must lie in [-1, 1]");
  std::vector<ConceptId> ids = sorted_ids(new_concepts);
  require_vectors(ids, by_id);
  std::vector<std::pair<std::size_t, std::size_t>> index_pairs;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j)
      index_pairs.emplace_back(i, j);
  // Zero vectors would make cosine throw inside the parallel loop.
  for (const auto& id : ids) {
    const auto& v = by_id.at(id);
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 == 0.0)
      throw ZeroVector("cannot compare zero vector of '" + id + "'");
  }
  std::vector<double> sims(index_pairs.size());
  parallel_for(index_pairs.size(), [&](std::size_t k) {
    sims[k] =
        cosine(by_id.at(ids[index_pairs[k].first]),
               by_id.at(ids[index_pairs[k].second]));
  });
  std::vector<CandidatePair> pairs;
  for (std::size_t k = 0; k < index_pairs.size(); ++k)
    if (sims[k] >= alpha)
      pairs.push_back(
          {ids[index_pairs[k].first], ids[index_pairs[k].second], sims[k]});
  return pairs;
}

std::vector<PseudoEdge> pseudo_edges(const std::vector<CandidatePair>& pairs,
                                     const ScorerParams& params,
                                     const EmbeddingStore& by_id) {
  if (params.dim != by_id.dim())
    throw ShapeMismatch("scorer trained for dim " +
                        std::to_string(params.dim) + ", embeddings have dim " +
                        std::to_string(by_id.dim()));
  for (const auto& p : pairs) {
    by_id.at(p.a);
    by_id.at(p.c);
  }
  std::vector<PseudoEdge> edges(2 * pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto& va = by_id.at(pairs[k].a);
    const auto& vc = by_id.at(pairs[k].c);
    edges[2 * k] = {pairs[k].a, pairs[k].c, score_pair(params, va, vc)};
    edges[2 * k + 1] = {pairs[k].c, pairs[k].a, score_pair(params, vc, va)};
  });
  sort_pseudo_edges(edges);
  return edges;
}

DirectedGraph merge_into_dag(const DirectedGraph& t_concept,
                             std::vector<PseudoEdge> edges) {
  sort_pseudo_edges(edges);
  DirectedGraph g = t_concept;
  for (const auto& e : edges) {
    g.add_node(e.parent);
    g.add_node(e.child);
    if (g.has_edge(e.parent, e.child)) continue;
    if (reaches(g, e.child, e.parent)) continue;
    g.add_edge(e.parent, e.child, e.weight);
  }
  return g;
}

ConceptOrder sort_concepts(const DirectedGraph& t_order) {
  return {topological_sort(t_order)};
}

ConceptOrder random_order(const std::vector<Concept>& new_concepts,
                          std::uint64_t seed) {
  ConceptOrder order{sorted_ids(new_concepts)};
  Rng rng = Rng::substream(seed, "sort");
  rng.shuffle(order.sequence);
  return order;
}

ConceptOrder affinity_order(const std::vector<Concept>& new_concepts,
                            const Taxonomy& t0, const ExpansionModel& model) {
  std::vector<ConceptId> ids = sorted_ids(new_concepts);
  std::vector<std::pair<double, ConceptId>> keyed;
  keyed.reserve(ids.size());
  for (const auto& id : ids) {
    const RankedParents rp = model.rank_parents(t0, id);
    if (rp.candidates.empty())
      throw EmptyTaxonomy("no candidates to score '" + id + "' against");
    keyed.emplace_back(rp.candidates.front().second, id);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  ConceptOrder order;
  for (auto& [affinity, id] : keyed) order.sequence.push_back(std::move(id));
  return order;
}

ConceptOrder mlp_order(const std::vector<Concept>& new_concepts,
                       const EmbeddingStore& by_id, const ScorerParams& params,
                       double alpha) {
  const std::vector<CandidatePair> pairs =
      candidate_pairs(new_concepts, by_id, alpha);

  struct ScoredPair {
    ConceptId a, c;
    double forward;   // a as parent
    double backward;  // c as parent
  };
  std::vector<ScoredPair> scored(pairs.size());
  if (params.dim != by_id.dim())
    throw ShapeMismatch("scorer trained for dim " +
                        std::to_string(params.dim) + ", embeddings have dim " +
                        std::to_string(by_id.dim()));
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto& va = by_id.at(pairs[k].a);
    const auto& vc = by_id.at(pairs[k].c);
    scored[k] = {pairs[k].a, pairs[k].c, score_pair(params, va, vc),
                 score_pair(params, vc, va)};
  });
  // Kruskal on max directional weight, heaviest first.
  std::sort(scored.begin(), scored.end(),
            [](const ScoredPair& x, const ScoredPair& y) {
              const double wx = std::max(x.forward, x.backward);
              const double wy = std::max(y.forward, y.backward);
              if (wx != wy) return wx > wy;
              if (x.a != y.a) return x.a < y.a;
              return x.c < y.c;
            });
  DirectedGraph forest;
  DisjointSet dsu;
  for (const auto& c : new_concepts) {
    forest.add_node(c.id);
    dsu.parent.emplace(c.id, c.id);
  }
  for (const auto& sp : scored) {
    if (!dsu.unite(sp.a, sp.c)) continue;
    if (sp.forward >= sp.backward)
      forest.add_edge(sp.a, sp.c, sp.forward);
    else
      forest.add_edge(sp.c, sp.a, sp.backward);
  }
  return sort_concepts(forest);
}

ConceptOrder pattern_order(const std::vector<Concept>& new_concepts) {
  return sort_concepts(build_pattern_dag(new_concepts));
}

ConceptOrder taxoorder_order(const std::vector<Concept>& new_concepts,
                             const EmbeddingStore& by_id,
                             const ScorerParams& params, double alpha) {
  return sort_concepts(merge_into_dag(
      build_pattern_dag(new_concepts),
      pseudo_edges(candidate_pairs(new_concepts, by_id, alpha), params,
                   by_id)));
}

}  // namespace taxoorder
