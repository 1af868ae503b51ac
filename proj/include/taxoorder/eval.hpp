#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "taxoorder/embedding.hpp"
#include "taxoorder/expansion.hpp"
#include "taxoorder/graph.hpp"
#include "taxoorder/sorter.hpp"

namespace taxoorder {

// What a split hid: the untouched full taxonomy, the masked concepts, and
// every masked concept's true parents in the full taxonomy.
struct GroundTruth {
  Taxonomy full_taxonomy;
  std::set<ConceptId> new_concepts;
  std::map<ConceptId, std::set<ConceptId>> parent_map;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::size_t enc = 0;
  std::map<std::size_t, double> hit_at;
  double mrr = 0.0;
  Prf pred;
  Prf edge;
  Prf ancestor;
};

// Number of queries inserted while none of their true parents were present
// (parents accumulate: earlier queries count as present for later ones).
std::size_t enc(const ConceptOrder& order, const Taxonomy& t0,
                const GroundTruth& gt);

// Fraction of queries with any true parent in the top k of the rank list
// recorded at insertion time. Vacuously 1 when there are no queries.
double hit_at_k(const ExpansionTrace& trace, const GroundTruth& gt,
                std::size_t k);

// Mean over queries of mean over true parents of 1/ceil(rank/10); a parent
// absent from the rank list contributes 0. Vacuously 1 with no queries.
double scaled_mrr(const ExpansionTrace& trace, const GroundTruth& gt);

// Predicted edges vs ground-truth edges pointing into the masked set.
Prf pred_f1(const ExpansionTrace& trace, const GroundTruth& gt);
// Full edge sets of the expanded vs ground-truth taxonomy.
Prf edge_f1(const ExpansionTrace& trace, const GroundTruth& gt);
// Edge F1 after closing both taxonomies over ancestor paths.
Prf ancestor_f1(const ExpansionTrace& trace, const GroundTruth& gt);

MetricsReport evaluate(const ConceptOrder& order, const ExpansionTrace& trace,
                       const Taxonomy& t0, const GroundTruth& gt,
                       const std::vector<std::size_t>& hit_ks);

// Aligned comparison table (one row per method) and line-oriented
// `method.metric=value` dump of the same numbers.
std::string metrics_table(
    const std::vector<std::pair<std::string, MetricsReport>>& rows);
std::string metrics_kv(const std::string& method, const MetricsReport& r);

struct SplitResult {
  Taxonomy reduced;
  GroundTruth gt;
};

// Masks ceil(fraction * |leaves|) leaves, sampled uniformly.
SplitResult make_validation_split(const Taxonomy& t, double fraction,
                                  std::uint64_t seed);

// Repeatedly masks a random surviving non-root node together with all of
// its descendants until at least fraction of the nodes are gone.
SplitResult make_test_split(const Taxonomy& t, double fraction,
                            std::uint64_t seed);

// Random tree plus embeddings that drift from parent to child: the root is
// a random unit vector, each child is the unit-normalized parent plus
// gaussian noise scaled by sigma. Surface names give roughly half the
// nodes a suffix-extended version of their parent's name, so the name
// structure mirrors part of the tree. Embeddings are keyed by concept id.
struct SyntheticData {
  Taxonomy taxonomy;
  std::vector<Concept> concepts;
  EmbeddingStore embeddings;
};

SyntheticData gen_synthetic(std::size_t n_nodes, std::size_t branching,
                            double sigma, std::size_t dim, std::uint64_t seed);

}  // namespace taxoorder
