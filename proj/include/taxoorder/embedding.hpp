#pragma once

#include <map>
#include <string>
#include <vector>

#include "taxoorder/graph.hpp"

namespace taxoorder {

// Dense vectors keyed by token. All vectors share one dimension, fixed at
// construction. Lookups return references into the store; insertion may
// invalidate them.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& token) const;

  void insert(const std::string& token, std::vector<double> vec);
  const std::vector<double>& at(const std::string& token) const;
  const std::map<std::string, std::vector<double>>& all() const {
    return vectors_;
  }

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<double>> vectors_;
};

// File layout: first line `count dim`, then one line per token:
// `token v1 v2 ... vdim`. Tokens use underscores where surface names use
// spaces; load/save convert so in-memory keys always use spaces.
EmbeddingStore load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingStore& store, const std::string& path);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// [a ; c ; a - c ; a * c], length 4*dim.
std::vector<double> pair_feature(const std::vector<double>& a,
                                 const std::vector<double>& c);

// Mean cosine over the taxonomy's edges, looking vectors up by node id.
double edge_similarity_threshold(const Taxonomy& taxonomy,
                                 const EmbeddingStore& by_id);

// Joins a surface-name-keyed store against the concept list, producing an
// id-keyed store. Concepts whose names have no vector are appended to
// *missing when given, otherwise raise MissingEmbedding.
EmbeddingStore rekey_by_id(const EmbeddingStore& by_name,
                           const std::vector<Concept>& concepts,
                           std::vector<ConceptId>* missing = nullptr);

}  // namespace taxoorder
