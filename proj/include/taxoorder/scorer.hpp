#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taxoorder/embedding.hpp"
#include "taxoorder/graph.hpp"
#include "taxoorder/rng.hpp"

namespace taxoorder {

// One-hidden-layer scorer over pair features:
//   f(x) = sigmoid(w2 . relu(W1 x + b1) + b2),  x of length 4*dim.
// W1 is row-major, hidden rows by 4*dim columns.
struct ScorerParams {
  std::size_t dim = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;

  std::size_t parameter_count() const {
    return 4 * dim * hidden + hidden + hidden + 1;
  }
};

// Same layout as ScorerParams, flattened order W1, b1, w2, b2.
struct ScorerGradient {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

// One contrastive sample: the feature of the true (parent, child) pair plus
// features of sampled non-ancestor pairs for the same child.
struct TrainingInstance {
  std::vector<double> positive;
  std::vector<std::vector<double>> negatives;
};

struct TrainConfig {
  std::size_t negative_size = 15;
  std::size_t batch_size = 256;
  double learning_rate = 0.01;
  std::size_t max_epochs = 50;
  std::uint64_t seed = 0;
  double convergence_tol = 1e-4;
  // One instance per edge instead of one per node with a sampled parent.
  bool per_edge = false;
};

// Glorot-uniform weights, zero biases. Draw order: all of W1 row-major,
// then w2.
ScorerParams init_params(std::size_t dim, std::size_t hidden, Rng& rng);

double score(const ScorerParams& p, const std::vector<double>& feature);
double score_pair(const ScorerParams& p, const std::vector<double>& parent_vec,
                  const std::vector<double>& child_vec);

// Mean over instances of -log(f_pos / sum_j f_j), computed in log domain.
double infonce_loss(const ScorerParams& p,
                    const std::vector<TrainingInstance>& batch);

// Returns the loss; fills grad with d(loss)/d(params). Accumulation order is
// fixed (instances in order, positive before negatives) so results are
// bit-stable across runs.
double loss_and_gradient(const ScorerParams& p,
                         const std::vector<TrainingInstance>& batch,
                         ScorerGradient& grad);

// Draws one instance for `child`: a uniformly chosen parent as positive and
// `negative_size` distinct non-ancestors (excluding child itself) as
// negatives. Throws NoParent / InsufficientNegatives.
TrainingInstance sample_instance(const Taxonomy& taxonomy,
                                 const EmbeddingStore& by_id,
                                 const ConceptId& child,
                                 std::size_t negative_size, Rng& rng);

// Full training run: init from cfg.seed, shuffled batches, plain SGD, stop
// when the epoch loss improves by less than convergence_tol or max_epochs is
// reached. epoch_losses (if given) receives one mean loss per epoch.
ScorerParams train(const Taxonomy& taxonomy, const EmbeddingStore& by_id,
                   std::size_t hidden, const TrainConfig& cfg,
                   std::vector<double>* epoch_losses = nullptr);

// Max relative error between analytic and central-difference gradients over
// at most max_coords evenly spaced coordinates. Differences below 1e-7 in
// both views count as zero error.
double grad_check(const ScorerParams& p,
                  const std::vector<TrainingInstance>& batch,
                  double epsilon = 1e-6, std::size_t max_coords = 1000);

// Versioned text format, full double precision. load rejects unknown
// versions and shape mismatches.
void save_checkpoint(const ScorerParams& p, std::uint64_t seed,
                     const std::string& path);
ScorerParams load_checkpoint(const std::string& path,
                             std::uint64_t* seed = nullptr);

}  // namespace taxoorder
