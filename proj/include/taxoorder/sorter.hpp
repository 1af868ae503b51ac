#pragma once

#include <cstdint>
#include <vector>

#include "taxoorder/embedding.hpp"
#include "taxoorder/expansion.hpp"
#include "taxoorder/graph.hpp"
#include "taxoorder/scorer.hpp"

namespace taxoorder {

// Unordered high-similarity pair, stored with a < c by id.
struct CandidatePair {
  ConceptId a;
  ConceptId c;
  double similarity = 0.0;
};

// Directed order constraint between two new concepts; weight is the
// scorer's confidence in (0,1).
struct PseudoEdge {
  ConceptId parent;
  ConceptId child;
  double weight = 0.0;
};

// Insertion order, first element inserted first. Always a permutation of
// the new-concept set it was built from.
struct ConceptOrder {
  std::vector<ConceptId> sequence;
};

// All unordered pairs with cosine >= alpha, listed once each, sorted by
// (a, c). alpha must lie in [-1, 1].
std::vector<CandidatePair> candidate_pairs(
    const std::vector<Concept>& new_concepts, const EmbeddingStore& by_id,
    double alpha);

// Both directions of every pair, weighted by the scorer, sorted by weight
// descending with (parent, child) id tie-break.
std::vector<PseudoEdge> pseudo_edges(const std::vector<CandidatePair>& pairs,
                                     const ScorerParams& params,
                                     const EmbeddingStore& by_id);

// Greedy weighted merge: edges are appended in descending weight order and
// dropped when they duplicate an existing edge or would close a cycle.
// Every edge of t_concept survives.
DirectedGraph merge_into_dag(const DirectedGraph& t_concept,
                             std::vector<PseudoEdge> edges);

ConceptOrder sort_concepts(const DirectedGraph& t_order);

// Baselines.
ConceptOrder random_order(const std::vector<Concept>& new_concepts,
                          std::uint64_t seed);
ConceptOrder affinity_order(const std::vector<Concept>& new_concepts,
                            const Taxonomy& t0, const ExpansionModel& model);
ConceptOrder mlp_order(const std::vector<Concept>& new_concepts,
                       const EmbeddingStore& by_id, const ScorerParams& params,
                       double alpha);
ConceptOrder pattern_order(const std::vector<Concept>& new_concepts);

// The full composition: pattern DAG, pseudo-edges over candidate pairs,
// greedy merge, topological sort.
ConceptOrder taxoorder_order(const std::vector<Concept>& new_concepts,
                             const EmbeddingStore& by_id,
                             const ScorerParams& params, double alpha);

}  // namespace taxoorder
