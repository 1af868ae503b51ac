#include "taxoorder/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "taxoorder/errors.hpp"
#include "taxoorder/io.hpp"

namespace taxoorder {

namespace {

double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// Fills r with relu(W1 x + b1), returns w2 . r + b2.
double forward(const ScorerParams& p, const std::vector<double>& x,
               std::vector<double>& r) {
  const std::size_t in = 4 * p.dim;
  if (x.size() != in)
    throw ShapeMismatch("feature has " + std::to_string(x.size()) +
                        " values, scorer expects " + std::to_string(in));
  r.assign(p.hidden, 0.0);
  for (std::size_t i = 0; i < p.hidden; ++i) {
    const double* row = p.w1.data() + i * in;
    double z = p.b1[i];
    for (std::size_t k = 0; k < in; ++k) z += row[k] * x[k];
    if (z > 0.0) r[i] = z;
  }
  double u = p.b2;
  for (std::size_t i = 0; i < p.hidden; ++i) u += p.w2[i] * r[i];
  return u;
}

double logsumexp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void check_shapes(const ScorerParams& p) {
  const std::size_t in = 4 * p.dim;
  if (p.dim == 0 || p.hidden == 0 || p.w1.size() != p.hidden * in ||
      p.b1.size() != p.hidden || p.w2.size() != p.hidden)
    throw ShapeMismatch("scorer parameter arrays do not match dim/hidden");
}

TrainingInstance build_instance(const EmbeddingStore& by_id,
                                const ConceptId& child,
                                const ConceptId& positive,
                                const std::set<ConceptId>& eligible_pool,
                                std::size_t negative_size, Rng& rng) {
  if (eligible_pool.size() < negative_size)
    throw InsufficientNegatives("'" + child + "' has only " +
                                std::to_string(eligible_pool.size()) +
                                " eligible negatives, need " +
                                std::to_string(negative_size));
  std::vector<ConceptId> eligible(eligible_pool.begin(), eligible_pool.end());
  TrainingInstance inst;
  const auto& cvec = by_id.at(child);
  inst.positive = pair_feature(by_id.at(positive), cvec);
  inst.negatives.reserve(negative_size);
  for (std::size_t i = 0; i < negative_size; ++i) {
    const std::size_t j = i + rng.uniform_int(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
    inst.negatives.push_back(pair_feature(by_id.at(eligible[i]), cvec));
  }
  return inst;
}

std::set<ConceptId> eligible_negatives(const DirectedGraph& g,
                                       const ConceptId& child) {
  const std::set<ConceptId> anc = ancestors(g, child);
  std::set<ConceptId> pool;
  for (const auto& n : g.nodes())
    if (n != child && !anc.count(n)) pool.insert(n);
  return pool;
}

}  // namespace

ScorerParams init_params(std::size_t dim, std::size_t hidden, Rng& rng) {
  if (dim == 0 || hidden == 0)
    throw DimensionMismatch("scorer needs positive dim and hidden size");
  ScorerParams p;
  p.dim = dim;
  p.hidden = hidden;
  const std::size_t in = 4 * dim;
  const double lim1 = std::sqrt(6.0 / static_cast<double>(in + hidden));
  p.w1.resize(hidden * in);
  for (auto& w : p.w1) w = rng.uniform(-lim1, lim1);
  p.b1.assign(hidden, 0.0);
  const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  p.w2.resize(hidden);
  for (auto& w : p.w2) w = rng.uniform(-lim2, lim2);
  p.b2 = 0.0;
  return p;
}

double score(const ScorerParams& p, const std::vector<double>& feature) {
  check_shapes(p);
  std::vector<double> r;
  return sigmoid(forward(p, feature, r));
}

double score_pair(const ScorerParams& p, const std::vector<double>& parent_vec,
                  const std::vector<double>& child_vec) {
  return score(p, pair_feature(parent_vec, child_vec));
}

double infonce_loss(const ScorerParams& p,
                    const std::vector<TrainingInstance>& batch) {
  check_shapes(p);
  if (batch.empty()) throw EmptyBatch("loss of an empty batch");
  double total = 0.0;
  std::vector<double> r, lf;
  for (const auto& inst : batch) {
    lf.clear();
    lf.push_back(-softplus(-forward(p, inst.positive, r)));
    for (const auto& neg : inst.negatives)
      lf.push_back(-softplus(-forward(p, neg, r)));
    total += logsumexp(lf) - lf[0];
  }
  return total / static_cast<double>(batch.size());
}

double loss_and_gradient(const ScorerParams& p,
                         const std::vector<TrainingInstance>& batch,
                         ScorerGradient& grad) {
  check_shapes(p);
  if (batch.empty()) throw EmptyBatch("gradient of an empty batch");
  const std::size_t in = 4 * p.dim;
  grad.w1.assign(p.w1.size(), 0.0);
  grad.b1.assign(p.hidden, 0.0);
  grad.w2.assign(p.hidden, 0.0);
  grad.b2 = 0.0;

  double total = 0.0;
  std::vector<std::vector<double>> rs;
  std::vector<double> us, lf;
  for (const auto& inst : batch) {
    const std::size_t m = 1 + inst.negatives.size();
    rs.resize(m);
    us.assign(m, 0.0);
    lf.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const auto& x = j == 0 ? inst.positive : inst.negatives[j - 1];
      us[j] = forward(p, x, rs[j]);
      lf[j] = -softplus(-us[j]);
    }
    const double logS = logsumexp(lf);
    total += logS - lf[0];
    for (std::size_t j = 0; j < m; ++j) {
      const auto& x = j == 0 ? inst.positive : inst.negatives[j - 1];
      const double pj = std::exp(lf[j] - logS);
      const double fj = sigmoid(us[j]);
      // d(loss_inst)/d(u_j); softmax weight minus the positive indicator,
      // both through d(log f)/du = 1 - f.
      double g = pj * (1.0 - fj);
      if (j == 0) g -= 1.0 - fj;
      grad.b2 += g;
      const auto& r = rs[j];
      for (std::size_t i = 0; i < p.hidden; ++i) {
        grad.w2[i] += g * r[i];
        if (r[i] > 0.0) {
          const double dz = g * p.w2[i];
          grad.b1[i] += dz;
          double* grow = grad.w1.data() + i * in;
          for (std::size_t k = 0; k < in; ++k) grow[k] += dz * x[k];
        }
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& v : grad.w1) v *= inv;
  for (auto& v : grad.b1) v *= inv;
  for (auto& v : grad.w2) v *= inv;
  grad.b2 *= inv;
  return total * inv;
}

TrainingInstance sample_instance(const Taxonomy& taxonomy,
                                 const EmbeddingStore& by_id,
                                 const ConceptId& child,
                                 std::size_t negative_size, Rng& rng) {
  const auto& g = taxonomy.graph();
  if (!g.has_node(child)) throw UnknownConcept("unknown concept '" + child + "'");
  const auto& parents = g.parents_of(child);
  if (parents.empty())
    throw NoParent("'" + child + "' has no parent to learn from");
  std::vector<ConceptId> plist(parents.begin(), parents.end());
  const ConceptId& pos = plist[rng.uniform_int(plist.size())];
  return build_instance(by_id, child, pos, eligible_negatives(g, child),
                        negative_size, rng);
}

ScorerParams train(const Taxonomy& taxonomy, const EmbeddingStore& by_id,
                   std::size_t hidden, const TrainConfig& cfg,
                   std::vector<double>* epoch_losses) {
  const auto& g = taxonomy.graph();
  if (cfg.batch_size == 0) throw EmptyBatch("batch size must be positive");

  struct Unit {
    ConceptId child;
    ConceptId parent;  // per-edge mode only
    bool fixed_parent;
  };
  std::vector<Unit> units;
  if (cfg.per_edge) {
    for (const auto& e : g.edges()) units.push_back({e.child, e.parent, true});
  } else {
    for (const auto& n : g.nodes())
      if (!g.parents_of(n).empty()) units.push_back({n, {}, false});
  }
  if (units.empty())
    throw EmptyTaxonomy("nothing to train on: taxonomy has no edges");

  // The graph is fixed for the whole run, so negative pools and parent lists
  // are computed once per child.
  std::map<ConceptId, std::set<ConceptId>> pools;
  std::map<ConceptId, std::vector<ConceptId>> parent_lists;
  for (const auto& u : units) {
    if (!pools.count(u.child)) pools[u.child] = eligible_negatives(g, u.child);
    if (!u.fixed_parent && !parent_lists.count(u.child)) {
      const auto& ps = g.parents_of(u.child);
      parent_lists[u.child].assign(ps.begin(), ps.end());
    }
  }

  Rng rng = Rng::substream(cfg.seed, "train");
  ScorerParams params = init_params(by_id.dim(), hidden, rng);

  double prev = std::numeric_limits<double>::infinity();
  ScorerGradient grad;
  std::vector<TrainingInstance> batch;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(units);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < units.size();
         start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, units.size());
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) {
        const Unit& u = units[i];
        const ConceptId& pos =
            u.fixed_parent
                ? u.parent
                : parent_lists[u.child]
                              [rng.uniform_int(parent_lists[u.child].size())];
        batch.push_back(build_instance(by_id, u.child, pos, pools[u.child],
                                       cfg.negative_size, rng));
      }
      const double loss = loss_and_gradient(params, batch, grad);
      if (!std::isfinite(loss))
        throw NonFiniteLoss("loss diverged at epoch " + std::to_string(epoch));
      const double lr = cfg.learning_rate;
      for (std::size_t i = 0; i < params.w1.size(); ++i)
        params.w1[i] -= lr * grad.w1[i];
      for (std::size_t i = 0; i < params.b1.size(); ++i)
        params.b1[i] -= lr * grad.b1[i];
      for (std::size_t i = 0; i < params.w2.size(); ++i)
        params.w2[i] -= lr * grad.w2[i];
      params.b2 -= lr * grad.b2;
      loss_sum += loss * static_cast<double>(batch.size());
      seen += batch.size();
    }
    const double epoch_loss = loss_sum / static_cast<double>(seen);
    if (epoch_losses) epoch_losses->push_back(epoch_loss);
    if (prev - epoch_loss < cfg.convergence_tol) break;
    prev = epoch_loss;
  }
  return params;
}

namespace {

double& param_slot(ScorerParams& p, std::size_t idx) {
  if (idx < p.w1.size()) return p.w1[idx];
  idx -= p.w1.size();
  if (idx < p.b1.size()) return p.b1[idx];
  idx -= p.b1.size();
  if (idx < p.w2.size()) return p.w2[idx];
  return p.b2;
}

double grad_slot(const ScorerGradient& g, std::size_t idx) {
  if (idx < g.w1.size()) return g.w1[idx];
  idx -= g.w1.size();
  if (idx < g.b1.size()) return g.b1[idx];
  idx -= g.b1.size();
  if (idx < g.w2.size()) return g.w2[idx];
  return g.b2;
}

}  // namespace

double grad_check(const ScorerParams& p,
                  const std::vector<TrainingInstance>& batch, double epsilon,
                  std::size_t max_coords) {
  ScorerGradient grad;
  loss_and_gradient(p, batch, grad);
  ScorerParams work = p;
  const std::size_t total = p.parameter_count();
  const std::size_t n =
      max_coords == 0 ? total : std::min(total, max_coords);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = n == total ? i : i * total / n;
    double& slot = param_slot(work, idx);
    const double orig = slot;
    slot = orig + epsilon;
    const double up = infonce_loss(work, batch);
    slot = orig - epsilon;
    const double down = infonce_loss(work, batch);
    slot = orig;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double analytic = grad_slot(grad, idx);
    const double denom = std::max(std::abs(numeric), std::abs(analytic));
    if (denom < 1e-7) continue;
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  return worst;
}

void save_checkpoint(const ScorerParams& p, std::uint64_t seed,
                     const std::string& path) {
  check_shapes(p);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const std::size_t in = 4 * p.dim;
  out << "taxoorder-checkpoint 1\n";
  out << "dim " << p.dim << '\n';
  out << "hidden " << p.hidden << '\n';
  out << "seed " << seed << '\n';
  out << "w1\n";
  for (std::size_t i = 0; i < p.hidden; ++i) {
    for (std::size_t k = 0; k < in; ++k) {
      if (k) out << ' ';
      out << io::format_double(p.w1[i * in + k]);
    }
    out << '\n';
  }
  out << "b1\n";
  for (std::size_t i = 0; i < p.hidden; ++i) {
    if (i) out << ' ';
    out << io::format_double(p.b1[i]);
  }
  out << "\nw2\n";
  for (std::size_t i = 0; i < p.hidden; ++i) {
    if (i) out << ' ';
    out << io::format_double(p.w2[i]);
  }
  out << "\nb2\n" << io::format_double(p.b2) << '\n';
}

namespace {

std::vector<double> parse_row(const std::string& line, const std::string& path,
                              std::size_t lineno) {
  std::vector<double> values;
  std::istringstream ss(line);
  std::string field;
  while (ss >> field) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
      throw ParseError(path, lineno, "bad number '" + field + "'");
    values.push_back(v);
  }
  return values;
}

std::string next_line(std::ifstream& in, const std::string& path,
                      std::size_t& lineno) {
  std::string line;
  if (!std::getline(in, line))
    throw MalformedHeader(path + ": truncated checkpoint");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::size_t header_value(const std::string& line, const std::string& key,
                         const std::string& path) {
  std::istringstream ss(line);
  std::string k, v, extra;
  if (!(ss >> k >> v) || k != key || (ss >> extra))
    throw MalformedHeader(path + ": expected `" + key + " <value>`");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw MalformedHeader(path + ": expected `" + key + " <value>`");
  }
}

}  // namespace

ScorerParams load_checkpoint(const std::string& path, std::uint64_t* seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::size_t lineno = 0;
  if (next_line(in, path, lineno) != "taxoorder-checkpoint 1")
    throw MalformedHeader(path + ": not a version-1 checkpoint");
  ScorerParams p;
  p.dim = header_value(next_line(in, path, lineno), "dim", path);
  p.hidden = header_value(next_line(in, path, lineno), "hidden", path);
  const std::uint64_t file_seed =
      header_value(next_line(in, path, lineno), "seed", path);
  if (seed) *seed = file_seed;
  if (p.dim == 0 || p.hidden == 0)
    throw MalformedHeader(path + ": dim and hidden must be positive");

  const std::size_t in_width = 4 * p.dim;
  if (next_line(in, path, lineno) != "w1")
    throw MalformedHeader(path + ": expected `w1` section");
  p.w1.reserve(p.hidden * in_width);
  for (std::size_t i = 0; i < p.hidden; ++i) {
    auto row = parse_row(next_line(in, path, lineno), path, lineno);
    if (row.size() != in_width)
      throw DimensionMismatch(path + ":" + std::to_string(lineno) +
                              ": w1 row has " + std::to_string(row.size()) +
                              " values, expected " + std::to_string(in_width));
    p.w1.insert(p.w1.end(), row.begin(), row.end());
  }
  if (next_line(in, path, lineno) != "b1")
    throw MalformedHeader(path + ": expected `b1` section");
  p.b1 = parse_row(next_line(in, path, lineno), path, lineno);
  if (p.b1.size() != p.hidden)
    throw DimensionMismatch(path + ": b1 has " + std::to_string(p.b1.size()) +
                            " values, expected " + std::to_string(p.hidden));
  if (next_line(in, path, lineno) != "w2")
    throw MalformedHeader(path + ": expected `w2` section");
  p.w2 = parse_row(next_line(in, path, lineno), path, lineno);
  if (p.w2.size() != p.hidden)
    throw DimensionMismatch(path + ": w2 has " + std::to_string(p.w2.size()) +
                            " values, expected " + std::to_string(p.hidden));
  if (next_line(in, path, lineno) != "b2")
    throw MalformedHeader(path + ": expected `b2` section");
  auto last = parse_row(next_line(in, path, lineno), path, lineno);
  if (last.size() != 1)
    throw DimensionMismatch(path + ": b2 must hold exactly one value");
  p.b2 = last[0];
  std::string tail;
  while (std::getline(in, tail)) {
    if (!tail.empty() && tail.back() == '\r') tail.pop_back();
    if (!tail.empty())
      throw MalformedHeader(path + ": trailing content after b2");
  }
  return p;
}

}  // namespace taxoorder
