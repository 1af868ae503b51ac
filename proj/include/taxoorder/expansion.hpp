#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "taxoorder/embedding.hpp"
#include "taxoorder/graph.hpp"
#include "taxoorder/scorer.hpp"

namespace taxoorder {

// Candidates for one query, every node of the taxonomy it was ranked
// against, sorted by (affinity desc, id asc).
struct RankedParents {
  ConceptId query;
  std::vector<std::pair<ConceptId, double>> candidates;
};

// A parent-ranking model. rank_parents must cover exactly the current
// taxonomy's nodes with finite scores. Implementations are read-only per
// call and safe to score concurrently.
class ExpansionModel {
 public:
  virtual ~ExpansionModel() = default;
  virtual RankedParents rank_parents(const Taxonomy& current,
                                     const ConceptId& query) const = 0;
};

// Scores candidates with the trained pair scorer: affinity of candidate p
// for query q is the scorer's value on the (p, q) pair feature.
class BuiltinMatcher : public ExpansionModel {
 public:
  BuiltinMatcher(ScorerParams params, const EmbeddingStore& by_id)
      : params_(std::move(params)), store_(by_id) {}
  RankedParents rank_parents(const Taxonomy& current,
                             const ConceptId& query) const override;

 private:
  ScorerParams params_;
  const EmbeddingStore& store_;
};

// Testing model: affinity 1 for a true parent that is present, cosine
// similarity otherwise. Lets order quality be measured independently of
// scorer quality.
class GroundTruthOracle : public ExpansionModel {
 public:
  GroundTruthOracle(std::map<ConceptId, std::set<ConceptId>> parent_map,
                    const EmbeddingStore& by_id)
      : parent_map_(std::move(parent_map)), store_(by_id) {}
  RankedParents rank_parents(const Taxonomy& current,
                             const ConceptId& query) const override;

 private:
  std::map<ConceptId, std::set<ConceptId>> parent_map_;
  const EmbeddingStore& store_;
};

// Replays affinities precomputed by an external model. Every (query,
// candidate) pair that comes up must be present; missing pairs are an error
// rather than a silent default.
class FileAffinityModel : public ExpansionModel {
 public:
  explicit FileAffinityModel(
      std::map<std::pair<ConceptId, ConceptId>, double> affinities)
      : affinities_(std::move(affinities)) {}
  RankedParents rank_parents(const Taxonomy& current,
                             const ConceptId& query) const override;

 private:
  std::map<std::pair<ConceptId, ConceptId>, double> affinities_;
};

// One full ordered-insertion run.
struct ExpansionTrace {
  Taxonomy final_taxonomy;
  std::vector<std::pair<ConceptId, ConceptId>> predicted_edges;
  std::map<ConceptId, RankedParents> per_query_ranks;
};

// Pure single attachment: adds the query node and one parent edge.
Taxonomy insert(const Taxonomy& current, const ConceptId& parent,
                const ConceptId& query);

// Ordered iterative insertion: rank against the evolving taxonomy, attach
// top-1, record the full rank list for each query.
ExpansionTrace expand_all(const Taxonomy& t0,
                          const std::vector<ConceptId>& order,
                          const ExpansionModel& model);

// File exchange with external models: requests are `query<TAB>candidate`
// covering every query against the initial nodes plus all other queries;
// responses are `query<TAB>candidate<TAB>affinity`.
void write_affinity_requests(const Taxonomy& t0,
                             const std::vector<ConceptId>& order,
                             const std::string& path);
std::map<std::pair<ConceptId, ConceptId>, double> load_affinity_file(
    const std::string& path);

}  // namespace taxoorder
