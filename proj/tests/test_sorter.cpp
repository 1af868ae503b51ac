#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "taxoorder/embedding.hpp"
#include "taxoorder/errors.hpp"
#include "taxoorder/pattern.hpp"
#include "taxoorder/sorter.hpp"

using namespace taxoorder;
using namespace testutil;

namespace {

std::vector<Concept> plain_concepts(std::size_t n) {
  std::vector<Concept> cs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string suffix = std::to_string(i);
    cs.push_back({"q" + suffix, "name " + suffix});
  }
  return cs;
}

EmbeddingStore gaussian_store(const std::vector<Concept>& cs, std::size_t dim,
                              Rng& rng) {
  EmbeddingStore s(dim);
  for (const auto& c : cs) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.gaussian();
    s.insert(c.id, std::move(v));
  }
  return s;
}

// Brute-force reference for candidate_pairs.
std::vector<CandidatePair> oracle_pairs(const std::vector<Concept>& cs,
                                        const EmbeddingStore& s,
                                        double alpha) {
  std::vector<ConceptId> ids;
  for (const auto& c : cs) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());
  std::vector<CandidatePair> out;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double sim = cosine(s.at(ids[i]), s.at(ids[j]));
      if (sim >= alpha) out.push_back({ids[i], ids[j], sim});
    }
  return out;
}

// Greedy replay of the documented merge contract.
DirectedGraph oracle_merge(DirectedGraph g, std::vector<PseudoEdge> es) {
  std::sort(es.begin(), es.end(), [](const PseudoEdge& x, const PseudoEdge& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    if (x.parent != y.parent) return x.parent < y.parent;
    return x.child < y.child;
  });
  for (const auto& e : es) {
    g.add_node(e.parent);
    g.add_node(e.child);
    if (e.parent == e.child) continue;
    if (g.has_edge(e.parent, e.child)) continue;
    if (oracle_reaches(g, e.child, e.parent)) continue;
    g.add_edge(e.parent, e.child, e.weight);
  }
  return g;
}

// Independent replay of the spanning-forest ordering.
ConceptOrder oracle_mlp_order(const std::vector<Concept>& cs,
                              const EmbeddingStore& s,
                              const ScorerParams& params, double alpha) {
  struct Scored {
    ConceptId a, c;
    double fwd, bwd;
  };
  std::vector<Scored> scored;
  for (const auto& p : oracle_pairs(cs, s, alpha))
    scored.push_back({p.a, p.c, score_pair(params, s.at(p.a), s.at(p.c)),
                      score_pair(params, s.at(p.c), s.at(p.a))});
  std::sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
    const double mx = std::max(x.fwd, x.bwd), my = std::max(y.fwd, y.bwd);
    if (mx != my) return mx > my;
    if (x.a != y.a) return x.a < y.a;
    return x.c < y.c;
  });

  std::map<ConceptId, ConceptId> up;
  auto find = [&](ConceptId x) {
    while (up.count(x) && up[x] != x) x = up[x];
    return x;
  };

  DirectedGraph g;
  for (const auto& c : cs) g.add_node(c.id);
  for (const auto& e : scored) {
    const ConceptId ra = find(e.a), rc = find(e.c);
    if (ra == rc) continue;
    up[ra] = rc;
    if (!up.count(e.a)) up[e.a] = ra;
    if (!up.count(e.c)) up[e.c] = rc;
    if (e.fwd >= e.bwd)
      g.add_edge(e.a, e.c, e.fwd);
    else
      g.add_edge(e.c, e.a, e.bwd);
  }
  return ConceptOrder{topological_sort(g)};
}

bool respects(const std::vector<ConceptId>& order, const ConceptId& before,
              const ConceptId& after) {
  std::size_t pb = order.size(), pa = order.size();
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == before) pb = i;
    if (order[i] == after) pa = i;
  }
  return pb < pa;
}

}  // namespace

TEST_CASE("candidate_pairs keeps unordered pairs with cosine above alpha") {
  std::vector<Concept> cs = {{"q1", "one"}, {"q2", "two"}, {"q3", "three"}};
  EmbeddingStore s(2);
  s.insert("q1", {1.0, 0.0});
  s.insert("q2", {0.6, 0.8});
  s.insert("q3", {0.0, 1.0});

  const auto pairs = candidate_pairs(cs, s, 0.5);
  REQUIRE_EQ(pairs.size(), 2);
  CHECK_EQ(pairs[0].a, "q1");
  CHECK_EQ(pairs[0].c, "q2");
  CHECK_EQ(pairs[0].similarity, doctest::Approx(0.6));
  CHECK_EQ(pairs[1].a, "q2");
  CHECK_EQ(pairs[1].c, "q3");
  CHECK_EQ(pairs[1].similarity, doctest::Approx(0.8));

  CHECK_EQ(candidate_pairs(cs, s, -1.0).size(), 3);
  CHECK_EQ(candidate_pairs(cs, s, 0.95).size(), 0);
  CHECK_THROWS_AS(candidate_pairs(cs, s, 1.5), Error);
  CHECK_THROWS_AS(candidate_pairs(cs, s, -1.5), Error);

  EmbeddingStore z(2);
  z.insert("q1", {0.0, 0.0});
  z.insert("q2", {1.0, 0.0});
  z.insert("q3", {0.0, 1.0});
  CHECK_THROWS_AS(candidate_pairs(cs, z, 0.0), ZeroVector);
}

TEST_CASE("candidate_pairs agrees with the brute-force scan") {
  Rng rng(51);
  for (int iter = 0; iter < 50; ++iter) {
    const auto cs = plain_concepts(2 + rng.uniform_int(8));
    const EmbeddingStore s = gaussian_store(cs, 4, rng);
    const double alpha = rng.uniform(-1.0, 1.0);
    const auto got = candidate_pairs(cs, s, alpha);
    const auto want = oracle_pairs(cs, s, alpha);
    REQUIRE_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK_EQ(got[i].a, want[i].a);
      CHECK_EQ(got[i].c, want[i].c);
      CHECK_EQ(got[i].similarity, doctest::Approx(want[i].similarity));
    }
  }
}

TEST_CASE("pseudo_edges emits both directions sorted by confidence") {
  Rng rng(52);
  const auto cs = plain_concepts(5);
  const EmbeddingStore s = gaussian_store(cs, 3, rng);
  const ScorerParams params = init_params(3, 4, rng);
  const auto pairs = candidate_pairs(cs, s, -1.0);
  REQUIRE_EQ(pairs.size(), 10);

  const auto edges = pseudo_edges(pairs, params, s);
  REQUIRE_EQ(edges.size(), 20);
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const auto& p = edges[i - 1];
    const auto& c = edges[i];
    const bool ordered =
        p.weight > c.weight ||
        (p.weight == c.weight &&
         std::make_pair(p.parent, p.child) < std::make_pair(c.parent, c.child));
    CHECK(ordered);
  }
  // weights come from the scorer on the directed pair
  std::map<std::pair<ConceptId, ConceptId>, double> index;
  for (const auto& e : edges) index[{e.parent, e.child}] = e.weight;
  for (const auto& p : pairs) {
    CHECK_EQ(index.at({p.a, p.c}),
             score_pair(params, s.at(p.a), s.at(p.c)));
    CHECK_EQ(index.at({p.c, p.a}),
             score_pair(params, s.at(p.c), s.at(p.a)));
  }

  CHECK(pseudo_edges({}, params, s).empty());

  const ScorerParams wrong = [] {
    Rng r(1);
    return init_params(2, 4, r);
  }();
  CHECK_THROWS_AS(pseudo_edges(pairs, wrong, s), ShapeMismatch);
}

TEST_CASE("merge_into_dag keeps base edges and drops cycle closers") {
  DirectedGraph base;
  base.add_node("q1");
  base.add_node("q2");
  base.add_edge("q1", "q2", 1.0);

  // strongest pseudo edge would close a cycle and must be dropped
  std::vector<PseudoEdge> es = {{"q2", "q1", 0.99},
                                {"q2", "q3", 0.5},
                                {"q3", "q1", 0.4},  // closes q1->q2->q3->q1
                                {"q1", "q2", 0.3}};  // duplicate of base edge
  const DirectedGraph merged = merge_into_dag(base, es);
  CHECK(merged.has_edge("q1", "q2"));
  CHECK_EQ(merged.edge_weight("q1", "q2"), 1.0);  // base weight kept
  CHECK(merged.has_edge("q2", "q3"));
  CHECK(!merged.has_edge("q2", "q1"));
  CHECK(!merged.has_edge("q3", "q1"));
  CHECK(oracle_acyclic(merged));
}

TEST_CASE("merge_into_dag matches the greedy replay on random inputs") {
  Rng rng(53);
  for (int iter = 0; iter < 300; ++iter) {
    const DirectedGraph base = cut_cycles(random_digraph(rng, 6, 0.2));
    std::vector<PseudoEdge> es;
    const std::size_t extra = rng.uniform_int(4);
    std::vector<ConceptId> pool(base.nodes().begin(), base.nodes().end());
    for (std::size_t i = 0; i < extra; ++i)
      pool.push_back("n" + std::to_string(i));
    const std::size_t n_edges = rng.uniform_int(12);
    for (std::size_t i = 0; i < n_edges; ++i) {
      const ConceptId p = pool[rng.uniform_int(pool.size())];
      const ConceptId c = pool[rng.uniform_int(pool.size())];
      if (p == c) continue;
      es.push_back({p, c, rng.uniform01()});
    }
    const DirectedGraph got = merge_into_dag(base, es);
    const DirectedGraph want = oracle_merge(base, es);
    CHECK(got == want);
    CHECK(oracle_acyclic(got));
    for (const auto& e : base.edges()) CHECK(got.has_edge(e.parent, e.child));
  }
}

TEST_CASE("sort_concepts is the topological order of the constraint graph") {
  const DirectedGraph g = diamond();
  CHECK_EQ(sort_concepts(g).sequence, topological_sort(g));
}

TEST_CASE("random_order is a seeded permutation") {
  const auto cs = plain_concepts(8);
  const ConceptOrder a = random_order(cs, 11);
  const ConceptOrder b = random_order(cs, 11);
  CHECK_EQ(a.sequence, b.sequence);

  std::set<ConceptId> seen(a.sequence.begin(), a.sequence.end());
  CHECK_EQ(seen.size(), 8);
  for (const auto& c : cs) CHECK(seen.count(c.id));

  // different seeds shuffle differently at least sometimes
  bool differs = false;
  for (std::uint64_t s = 0; s < 8 && !differs; ++s)
    differs = random_order(cs, s).sequence != a.sequence;
  CHECK(differs);
}

TEST_CASE("random_order spreads the first element uniformly across seeds") {
  const auto cs = plain_concepts(3);
  std::map<ConceptId, int> first;
  const int draws = 6000;
  for (int s = 0; s < draws; ++s)
    first[random_order(cs, static_cast<std::uint64_t>(s)).sequence[0]]++;
  REQUIRE_EQ(first.size(), 3);
  for (const auto& [id, count] : first)
    CHECK(std::abs(count - draws / 3) < 190);  // ~5 sigma
}

namespace {

// Affinity model with fixed per-query peaks; also asserts it is always
// called against the initial taxonomy.
class PeakModel : public ExpansionModel {
 public:
  PeakModel(std::map<ConceptId, double> peaks, std::size_t t0_nodes)
      : peaks_(std::move(peaks)), t0_nodes_(t0_nodes) {}

  RankedParents rank_parents(const Taxonomy& current,
                             const ConceptId& query) const override {
    REQUIRE_EQ(current.graph().node_count(), t0_nodes_);
    RankedParents out;
    out.query = query;
    double a = peaks_.at(query);
    for (const auto& n : current.graph().nodes()) {
      out.candidates.emplace_back(n, a);
      a *= 0.5;  // strictly decreasing, peak first
    }
    return out;
  }

 private:
  std::map<ConceptId, double> peaks_;
  std::size_t t0_nodes_;
};

}  // namespace

TEST_CASE("affinity_order sorts by best initial-taxonomy affinity") {
  DirectedGraph g;
  g.add_node("r");
  g.add_node("s");
  g.add_edge("r", "s");
  const Taxonomy t0{g};

  const std::vector<Concept> cs = {{"qa", "a"}, {"qb", "b"}, {"qc", "c"},
                                   {"qd", "d"}};
  const PeakModel model(
      {{"qa", 0.4}, {"qb", 0.9}, {"qc", 0.4}, {"qd", 0.1}}, 2);
  const ConceptOrder order = affinity_order(cs, t0, model);
  // qb first; qa and qc tie on affinity and fall back to id order
  CHECK_EQ(order.sequence,
           std::vector<ConceptId>({"qb", "qa", "qc", "qd"}));
}

TEST_CASE("mlp_order matches an independent spanning-forest replay") {
  Rng rng(54);
  for (int iter = 0; iter < 100; ++iter) {
    const auto cs = plain_concepts(2 + rng.uniform_int(7));
    const EmbeddingStore s = gaussian_store(cs, 3, rng);
    Rng prng(1000 + iter);
    const ScorerParams params = init_params(3, 4, prng);
    const double alpha = rng.uniform(-1.0, 0.9);
    const ConceptOrder got = mlp_order(cs, s, params, alpha);
    const ConceptOrder want = oracle_mlp_order(cs, s, params, alpha);
    CHECK_EQ(got.sequence, want.sequence);
  }
}

TEST_CASE("pattern_order walks general names before their specializations") {
  const std::vector<Concept> cs = {
      {"c1", "science"},
      {"c2", "computer science"},
      {"c3", "theoretical computer science"},
      {"c4", "banana"},
  };
  CHECK_EQ(pattern_order(cs).sequence,
           std::vector<ConceptId>({"c1", "c2", "c3", "c4"}));
}

TEST_CASE("taxoorder_order equals its staged composition") {
  Rng rng(55);
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<Concept> cs;
    const std::size_t n = 3 + rng.uniform_int(6);
    for (std::size_t i = 0; i < n; ++i) {
      std::string name = "w" + std::to_string(rng.uniform_int(4));
      if (rng.uniform01() < 0.5 && !cs.empty())
        name += " " + cs[rng.uniform_int(cs.size())].surface_name;
      cs.push_back({"q" + std::to_string(i), name});
    }
    const EmbeddingStore s = gaussian_store(cs, 3, rng);
    Rng prng(2000 + iter);
    const ScorerParams params = init_params(3, 4, prng);
    const double alpha = rng.uniform(-0.5, 0.5);

    const ConceptOrder direct = taxoorder_order(cs, s, params, alpha);
    const DirectedGraph staged = merge_into_dag(
        build_pattern_dag(cs),
        pseudo_edges(candidate_pairs(cs, s, alpha), params, s));
    CHECK_EQ(direct.sequence, sort_concepts(staged).sequence);

    // the order is a permutation that respects every constraint edge
    std::set<ConceptId> seen(direct.sequence.begin(), direct.sequence.end());
    CHECK_EQ(seen.size(), cs.size());
    for (const auto& e : staged.edges())
      CHECK(respects(direct.sequence, e.parent, e.child));
  }
}
