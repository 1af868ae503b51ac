#include "taxoorder/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "taxoorder/errors.hpp"
#include "taxoorder/io.hpp"
#include "taxoorder/rng.hpp"

namespace taxoorder {

std::size_t enc(const ConceptOrder& order, const Taxonomy& t0,
                const GroundTruth& gt) {
  std::set<ConceptId> present = t0.graph().nodes();
  std::set<ConceptId> seen;
  std::size_t errors = 0;
  for (const auto& q : order.sequence) {
    if (!gt.new_concepts.count(q))
      throw UnknownQuery("'" + q + "' is not a masked concept");
    if (!seen.insert(q).second)
      throw UnknownQuery("'" + q + "' appears twice in the order");
    bool found = false;
    const auto it = gt.parent_map.find(q);
    if (it != gt.parent_map.end())
      for (const auto& p : it->second)
        if (present.count(p)) {
          found = true;
          break;
        }
    if (!found) ++errors;
    present.insert(q);
  }
  if (seen.size() != gt.new_concepts.size())
    throw UnknownQuery("order does not cover every masked concept");
  return errors;
}

double hit_at_k(const ExpansionTrace& trace, const GroundTruth& gt,
                std::size_t k) {
  if (k == 0) throw Error("hit@k needs k of at least 1");
  if (gt.new_concepts.empty()) return 1.0;
  std::size_t hits = 0;
  for (const auto& q : gt.new_concepts) {
    const auto tr = trace.per_query_ranks.find(q);
    const auto pm = gt.parent_map.find(q);
    if (tr == trace.per_query_ranks.end() || pm == gt.parent_map.end())
      continue;
    const auto& cs = tr->second.candidates;
    const std::size_t top = std::min(k, cs.size());
    for (std::size_t i = 0; i < top; ++i)
      if (pm->second.count(cs[i].first)) {
        ++hits;
        break;
      }
  }
  return static_cast<double>(hits) /
         static_cast<double>(gt.new_concepts.size());
}

double scaled_mrr(const ExpansionTrace& trace, const GroundTruth& gt) {
  if (gt.new_concepts.empty()) return 1.0;
  double total = 0.0;
  for (const auto& q : gt.new_concepts) {
    const auto pm = gt.parent_map.find(q);
    if (pm == gt.parent_map.end() || pm->second.empty()) continue;
    const auto tr = trace.per_query_ranks.find(q);
    double qsum = 0.0;
    if (tr != trace.per_query_ranks.end()) {
      const auto& cs = tr->second.candidates;
      for (const auto& p : pm->second)
        for (std::size_t i = 0; i < cs.size(); ++i)
          if (cs[i].first == p) {
            // rank buckets of ten: ranks 1-10 count in full, 11-20 half, ...
            const std::size_t bucket = (i + 1 + 9) / 10;
            qsum += 1.0 / static_cast<double>(bucket);
            break;
          }
    }
    total += qsum / static_cast<double>(pm->second.size());
  }
  return total / static_cast<double>(gt.new_concepts.size());
}

namespace {

using EdgeSet = std::set<std::pair<ConceptId, ConceptId>>;

EdgeSet edge_set(const DirectedGraph& g) {
  EdgeSet s;
  for (const auto& e : g.edges()) s.emplace(e.parent, e.child);
  return s;
}

Prf prf_from_sets(const EdgeSet& pred, const EdgeSet& gt) {
  std::size_t overlap = 0;
  for (const auto& e : pred) overlap += gt.count(e);
  Prf r;
  r.precision = pred.empty()
                    ? 1.0
                    : static_cast<double>(overlap) /
                          static_cast<double>(pred.size());
  r.recall = gt.empty() ? 1.0
                        : static_cast<double>(overlap) /
                              static_cast<double>(gt.size());
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

}  // namespace

Prf pred_f1(const ExpansionTrace& trace, const GroundTruth& gt) {
  EdgeSet pred(trace.predicted_edges.begin(), trace.predicted_edges.end());
  EdgeSet truth;
  for (const auto& e : gt.full_taxonomy.graph().edges())
    if (gt.new_concepts.count(e.child)) truth.emplace(e.parent, e.child);
  return prf_from_sets(pred, truth);
}

Prf edge_f1(const ExpansionTrace& trace, const GroundTruth& gt) {
  return prf_from_sets(edge_set(trace.final_taxonomy.graph()),
                       edge_set(gt.full_taxonomy.graph()));
}

Prf ancestor_f1(const ExpansionTrace& trace, const GroundTruth& gt) {
  return prf_from_sets(
      edge_set(ancestor_closure(trace.final_taxonomy.graph())),
      edge_set(ancestor_closure(gt.full_taxonomy.graph())));
}

MetricsReport evaluate(const ConceptOrder& order, const ExpansionTrace& trace,
                       const Taxonomy& t0, const GroundTruth& gt,
                       const std::vector<std::size_t>& hit_ks) {
  MetricsReport r;
  r.enc = enc(order, t0, gt);
  for (std::size_t k : hit_ks) r.hit_at[k] = hit_at_k(trace, gt, k);
  r.mrr = scaled_mrr(trace, gt);
  r.pred = pred_f1(trace, gt);
  r.edge = edge_f1(trace, gt);
  r.ancestor = ancestor_f1(trace, gt);
  return r;
}

namespace {

std::string fmt(double v) { return io::format_double(v, "%.4f"); }

}  // namespace

std::string metrics_table(
    const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::vector<std::size_t> ks;
  if (!rows.empty())
    for (const auto& [k, v] : rows.front().second.hit_at) ks.push_back(k);

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"Method", "ENC", "MRR"};
  for (std::size_t k : ks) head.push_back("Hit@" + std::to_string(k));
  head.insert(head.end(), {"Pred-F1", "Edge-F1", "Anc-F1"});
  cells.push_back(head);
  for (const auto& [name, r] : rows) {
    std::vector<std::string> row{name, std::to_string(r.enc), fmt(r.mrr)};
    for (std::size_t k : ks) {
      const auto it = r.hit_at.find(k);
      row.push_back(it == r.hit_at.end() ? "-" : fmt(it->second));
    }
    row.push_back(fmt(r.pred.f1));
    row.push_back(fmt(r.edge.f1));
    row.push_back(fmt(r.ancestor.f1));
    cells.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(cells.front().size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i)
      widths[i] = std::max(widths[i], row[i].size());
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << "  ";
      out << row[i];
      if (i + 1 < row.size())
        out << std::string(widths[i] - row[i].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

std::string metrics_kv(const std::string& method, const MetricsReport& r) {
  std::ostringstream out;
  out << method << ".enc=" << r.enc << '\n';
  out << method << ".mrr=" << fmt(r.mrr) << '\n';
  for (const auto& [k, v] : r.hit_at)
    out << method << ".hit@" << k << '=' << fmt(v) << '\n';
  const auto prf = [&](const char* name, const Prf& p) {
    out << method << '.' << name << "_precision=" << fmt(p.precision) << '\n';
    out << method << '.' << name << "_recall=" << fmt(p.recall) << '\n';
    out << method << '.' << name << "_f1=" << fmt(p.f1) << '\n';
  };
  prf("pred", r.pred);
  prf("edge", r.edge);
  prf("ancestor", r.ancestor);
  return out.str();
}

namespace {

SplitResult build_split(const Taxonomy& t, const std::set<ConceptId>& masked) {
  const DirectedGraph& g = t.graph();
  DirectedGraph reduced;
  for (const auto& n : g.nodes())
    if (!masked.count(n)) reduced.add_node(n);
  for (const auto& e : g.edges())
    if (!masked.count(e.parent) && !masked.count(e.child))
      reduced.add_edge(e.parent, e.child, e.weight);
  GroundTruth gt;
  gt.full_taxonomy = t;
  gt.new_concepts = masked;
  for (const auto& q : masked) gt.parent_map[q] = g.parents_of(q);
  return {Taxonomy(std::move(reduced)), std::move(gt)};
}

}  // namespace

SplitResult make_validation_split(const Taxonomy& t, double fraction,
                                  std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error("fraction must lie strictly between 0 and 1");
  const std::set<ConceptId> leaf_set = leaves(t.graph());
  std::vector<ConceptId> pool(leaf_set.begin(), leaf_set.end());
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(pool.size())));
  Rng rng = Rng::substream(seed, "split");
  std::set<ConceptId> masked;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_int(pool.size() - i);
    std::swap(pool[i], pool[j]);
    masked.insert(pool[i]);
  }
  return build_split(t, masked);
}

SplitResult make_test_split(const Taxonomy& t, double fraction,
                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error("fraction must lie strictly between 0 and 1");
  const DirectedGraph& g = t.graph();
  const double target = fraction * static_cast<double>(g.node_count());
  Rng rng = Rng::substream(seed, "split");
  std::set<ConceptId> masked;
  while (static_cast<double>(masked.size()) < target) {
    std::vector<ConceptId> candidates;
    for (const auto& n : g.nodes())
      if (!masked.count(n) && !g.parents_of(n).empty())
        candidates.push_back(n);
    if (candidates.empty())
      throw FractionUnreachable(
          "cannot mask " + io::format_double(fraction, "%g") +
          " of the taxonomy: only roots are left");
    const ConceptId c = candidates[rng.uniform_int(candidates.size())];
    masked.insert(c);
    for (const auto& d : descendants(g, c)) masked.insert(d);
  }
  return build_split(t, masked);
}

SyntheticData gen_synthetic(std::size_t n_nodes, std::size_t branching,
                            double sigma, std::size_t dim,
                            std::uint64_t seed) {
  if (n_nodes < 2) throw Error("synthetic taxonomy needs at least 2 nodes");
  if (branching < 1) throw Error("branching must be at least 1");
  if (!(sigma > 0.0)) throw Error("noise scale must be positive");
  if (dim < 2) throw Error("embedding dimension must be at least 2");

  Rng rng = Rng::substream(seed, "gen");

  std::size_t id_width = 1;
  for (std::size_t v = n_nodes - 1; v >= 10; v /= 10) ++id_width;
  const auto make_id = [&](std::size_t i) {
    std::string digits = std::to_string(i);
    return "n" + std::string(id_width - digits.size(), '0') + digits;
  };
  // Fixed-width base-26 tokens: equal length means no token is a suffix of
  // another, so name structure is exactly the inherited chains.
  std::size_t token_width = 1;
  for (std::size_t v = n_nodes - 1; v >= 26; v /= 26) ++token_width;
  token_width = std::max<std::size_t>(token_width, 3);
  const auto make_token = [&](std::size_t i) {
    std::string s(token_width, 'a');
    for (std::size_t pos = token_width; pos-- > 0 && i > 0; i /= 26)
      s[pos] = static_cast<char>('a' + i % 26);
    return s;
  };
  const auto unit_gaussian = [&]() {
    std::vector<double> v(dim);
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (auto& x : v) {
        x = rng.gaussian();
        norm2 += x * x;
      }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
    return v;
  };

  DirectedGraph g;
  for (std::size_t i = 0; i < n_nodes; ++i) g.add_node(make_id(i));

  std::vector<std::string> names(n_nodes);
  names[0] = make_token(0);
  std::vector<std::vector<double>> vecs(n_nodes);
  vecs[0] = unit_gaussian();

  struct Open {
    std::size_t node;
    std::size_t children;
  };
  std::vector<Open> open{{0, 0}};
  for (std::size_t i = 1; i < n_nodes; ++i) {
    const std::size_t slot = rng.uniform_int(open.size());
    const std::size_t parent = open[slot].node;
    if (++open[slot].children == branching) {
      open[slot] = open.back();
      open.pop_back();
    }
    open.push_back({i, 0});

    g.add_edge(make_id(parent), make_id(i));
    names[i] = rng.uniform01() < 0.5 ? make_token(i) + " " + names[parent]
                                     : make_token(i);
    std::vector<double> v = vecs[parent];
    double norm2 = 0.0;
    for (auto& x : v) {
      x += sigma * rng.gaussian();
      norm2 += x * x;
    }
    if (norm2 == 0.0) {
      v = unit_gaussian();
    } else {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& x : v) x *= inv;
    }
    vecs[i] = std::move(v);
  }

  std::vector<Concept> concepts;
  concepts.reserve(n_nodes);
  EmbeddingStore store(dim);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    concepts.push_back({make_id(i), names[i]});
    store.insert(make_id(i), vecs[i]);
  }
  return {Taxonomy(std::move(g)), std::move(concepts), std::move(store)};
}

}  // namespace taxoorder
