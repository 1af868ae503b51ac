#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "taxoorder/embedding.hpp"
#include "taxoorder/errors.hpp"
#include "taxoorder/expansion.hpp"
#include "taxoorder/io.hpp"
#include "taxoorder/scorer.hpp"

using namespace taxoorder;
using namespace testutil;

namespace {

// Deterministic stub: affinity is candidate-id length plus a fixed bonus
// for chosen pairs; lets tests steer every attachment.
class StubModel : public ExpansionModel {
 public:
  explicit StubModel(std::map<std::pair<ConceptId, ConceptId>, double> boosts)
      : boosts_(std::move(boosts)) {}

  RankedParents rank_parents(const Taxonomy& current,
                             const ConceptId& query) const override {
    RankedParents out;
    out.query = query;
    for (const auto& n : current.graph().nodes()) {
      double a = 0.001 * static_cast<double>(n.size());
      const auto it = boosts_.find({query, n});
      if (it != boosts_.end()) a = it->second;
      out.candidates.emplace_back(n, a);
    }
    std::sort(out.candidates.begin(), out.candidates.end(),
              [](const auto& x, const auto& y) {
                if (x.second != y.second) return x.second > y.second;
                return x.first < y.first;
              });
    return out;
  }

 private:
  std::map<std::pair<ConceptId, ConceptId>, double> boosts_;
};

Taxonomy base_taxonomy() {
  DirectedGraph g;
  for (const char* n : {"r", "a", "b"}) g.add_node(n);
  g.add_edge("r", "a");
  g.add_edge("r", "b");
  return Taxonomy{g};
}

EmbeddingStore base_store() {
  EmbeddingStore s(2);
  s.insert("r", {1.0, 0.0});
  s.insert("a", {0.8, 0.6});
  s.insert("b", {0.0, 1.0});
  s.insert("q1", {0.6, 0.8});
  s.insert("q2", {1.0, 0.1});
  return s;
}

}  // namespace

TEST_CASE("insert attaches one node under one parent") {
  const Taxonomy t = base_taxonomy();
  const Taxonomy t2 = insert(t, "a", "q1");
  CHECK(t2.graph().has_node("q1"));
  CHECK(t2.graph().has_edge("a", "q1"));
  CHECK_EQ(t2.graph().node_count(), 4);
  // the original is untouched
  CHECK(!t.graph().has_node("q1"));

  CHECK_THROWS_AS(insert(t, "missing", "q1"), UnknownParent);
  CHECK_THROWS_AS(insert(t, "a", "b"), DuplicateConcept);
}

TEST_CASE("expand_all attaches top-1 against the evolving taxonomy") {
  const Taxonomy t0 = base_taxonomy();
  // q1 goes under a; q2 prefers q1, which only exists after q1's insertion
  const StubModel model({{{"q1", "a"}, 1.0}, {{"q2", "q1"}, 1.0}});

  const ExpansionTrace trace = expand_all(t0, {"q1", "q2"}, model);
  CHECK(trace.final_taxonomy.graph().has_edge("a", "q1"));
  CHECK(trace.final_taxonomy.graph().has_edge("q1", "q2"));
  REQUIRE_EQ(trace.predicted_edges.size(), 2);
  CHECK_EQ(trace.predicted_edges[0],
           std::make_pair(ConceptId("a"), ConceptId("q1")));
  CHECK_EQ(trace.predicted_edges[1],
           std::make_pair(ConceptId("q1"), ConceptId("q2")));

  // with the reversed order q2 cannot see q1 yet
  const ExpansionTrace rev = expand_all(t0, {"q2", "q1"}, model);
  CHECK(!rev.final_taxonomy.graph().has_edge("q1", "q2"));

  // rank lists cover the taxonomy as seen at insertion time
  REQUIRE(trace.per_query_ranks.count("q2"));
  const auto& ranked = trace.per_query_ranks.at("q2");
  CHECK_EQ(ranked.candidates.size(), 4);  // r, a, b, q1
  CHECK_EQ(ranked.candidates.front().first, "q1");
  // sorted by affinity descending
  for (std::size_t i = 1; i < ranked.candidates.size(); ++i)
    CHECK(ranked.candidates[i - 1].second >= ranked.candidates[i].second);
}

TEST_CASE("expand_all wraps failures with progress information") {
  const Taxonomy t0 = base_taxonomy();
  const StubModel model({{{"q1", "a"}, 1.0}});
  try {
    // q1 inserts fine, then "a" collides with an existing node
    expand_all(t0, {"q1", "a"}, model);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("after 1 of 2") != std::string::npos);
  }
}

TEST_CASE("BuiltinMatcher ranks every current node by scorer affinity") {
  const Taxonomy t0 = base_taxonomy();
  const EmbeddingStore store = base_store();
  Rng rng(41);
  const ScorerParams params = init_params(2, 4, rng);
  const BuiltinMatcher model(params, store);

  const RankedParents r = model.rank_parents(t0, "q1");
  CHECK_EQ(r.query, "q1");
  REQUIRE_EQ(r.candidates.size(), 3);
  std::set<ConceptId> seen;
  for (const auto& [id, affinity] : r.candidates) {
    seen.insert(id);
    CHECK_EQ(affinity, score_pair(params, store.at(id), store.at("q1")));
  }
  CHECK_EQ(seen, t0.graph().nodes());
  for (std::size_t i = 1; i < r.candidates.size(); ++i)
    CHECK(r.candidates[i - 1].second >= r.candidates[i].second);

  CHECK_THROWS_AS(model.rank_parents(t0, "unembedded"), MissingEmbedding);
  CHECK_THROWS_AS(model.rank_parents(Taxonomy{}, "q1"), EmptyTaxonomy);
}

TEST_CASE("GroundTruthOracle pins true parents to affinity one") {
  const Taxonomy t0 = base_taxonomy();
  const EmbeddingStore store = base_store();
  const GroundTruthOracle model({{"q1", {"a"}}}, store);

  const RankedParents r = model.rank_parents(t0, "q1");
  CHECK_EQ(r.candidates.front().first, "a");
  CHECK_EQ(r.candidates.front().second, 1.0);
  for (const auto& [id, affinity] : r.candidates)
    if (id != "a") {
      CHECK_EQ(affinity,
               doctest::Approx(cosine(store.at(id), store.at("q1"))));
      CHECK(affinity < 1.0);
    }

  // unknown queries fall back to cosine for every candidate
  const RankedParents r2 = model.rank_parents(t0, "q2");
  for (const auto& [id, affinity] : r2.candidates)
    CHECK_EQ(affinity, doctest::Approx(cosine(store.at(id), store.at("q2"))));
}

TEST_CASE("FileAffinityModel replays stored affinities and rejects gaps") {
  const Taxonomy t0 = base_taxonomy();
  std::map<std::pair<ConceptId, ConceptId>, double> aff;
  for (const char* n : {"r", "a", "b"}) aff[{"q1", n}] = 0.5;
  aff[{"q1", "a"}] = 0.9;
  const FileAffinityModel model(aff);

  const RankedParents r = model.rank_parents(t0, "q1");
  CHECK_EQ(r.candidates.front().first, "a");
  CHECK_EQ(r.candidates.front().second, 0.9);

  const FileAffinityModel sparse(
      std::map<std::pair<ConceptId, ConceptId>, double>{{{"q1", "a"}, 0.9}});
  CHECK_THROWS_AS(sparse.rank_parents(t0, "q1"), Error);
}

TEST_CASE("affinity requests cover initial nodes and later queries") {
  TempDir dir;
  const Taxonomy t0 = base_taxonomy();
  const std::string path = dir.file("req.tsv");
  write_affinity_requests(t0, {"q1", "q2"}, path);

  std::set<std::string> lines;
  {
    std::istringstream in(io::read_file(path));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) lines.insert(line);
  }
  // each query pairs with r, a, b and the other query
  CHECK_EQ(lines.size(), 8);
  CHECK(lines.count("q1\ta"));
  CHECK(lines.count("q1\tq2"));
  CHECK(lines.count("q2\tq1"));
  CHECK(!lines.count("q1\tq1"));
}

TEST_CASE("affinity files round-trip through load_affinity_file") {
  TempDir dir;
  const std::string path = dir.file("aff.tsv");
  io::write_file(path, "# model v7\nq1\ta\t0.75\nq1\tb\t-0.25\n");
  const auto aff = load_affinity_file(path);
  CHECK_EQ(aff.size(), 2);
  CHECK_EQ(aff.at({"q1", "a"}), 0.75);
  CHECK_EQ(aff.at({"q1", "b"}), -0.25);

  io::write_file(path, "q1\ta\n");
  CHECK_THROWS_AS(load_affinity_file(path), ParseError);
  io::write_file(path, "q1\ta\tnotanumber\n");
  CHECK_THROWS_AS(load_affinity_file(path), ParseError);
  io::write_file(path, "q1\ta\tinf\n");
  CHECK_THROWS_AS(load_affinity_file(path), ParseError);
}

TEST_CASE("expansion matches a hand-run of the oracle on the diamond") {
  // ground truth: q1 under a, q2 under q1; oracle affinities make the
  // survivor-by-survivor walk fully predictable
  DirectedGraph g = diamond();
  const Taxonomy t0{g};
  EmbeddingStore store(2);
  std::size_t i = 0;
  for (const auto& n : t0.graph().nodes())
    store.insert(n, {1.0, 0.1 * static_cast<double>(i++)});
  store.insert("q1", {0.3, 0.9});
  store.insert("q2", {0.2, 0.8});
  const GroundTruthOracle model({{"q1", {"a"}}, {"q2", {"q1"}}}, store);

  const ExpansionTrace trace = expand_all(t0, {"q1", "q2"}, model);
  CHECK(trace.final_taxonomy.graph().has_edge("a", "q1"));
  CHECK(trace.final_taxonomy.graph().has_edge("q1", "q2"));
  CHECK_EQ(trace.final_taxonomy.graph().node_count(), 7);
  CHECK_EQ(trace.final_taxonomy.graph().edge_count(), 7);
}
