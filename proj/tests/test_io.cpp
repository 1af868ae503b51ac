#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "taxoorder/errors.hpp"
#include "taxoorder/graph.hpp"
#include "taxoorder/io.hpp"

using namespace taxoorder;
using namespace testutil;

TEST_CASE("taxonomy files parse edges, bare nodes, comments and CRLF") {
  TempDir dir;
  const std::string path = dir.file("t.tsv");
  io::write_file(path,
                 "# comment\n"
                 "\n"
                 "a\tb\r\n"
                 "b\tc\n"
                 "iso\n"
                 "a\tc\n");
  const DirectedGraph g = io::load_taxonomy_graph(path);
  CHECK_EQ(g.node_count(), 4);
  CHECK_EQ(g.edge_count(), 3);
  CHECK(g.has_edge("a", "b"));
  CHECK(g.has_edge("b", "c"));
  CHECK(g.has_node("iso"));
}

TEST_CASE("taxonomy files may list a child edge before the parent appears") {
  TempDir dir;
  const std::string path = dir.file("t.tsv");
  io::write_file(path, "b\tc\na\tb\n");
  CHECK_NOTHROW(io::load_taxonomy(path));
}

TEST_CASE("malformed taxonomy lines raise ParseError with the line number") {
  TempDir dir;
  const std::string path = dir.file("t.tsv");

  io::write_file(path, "a\tb\na\tb\tc\n");
  CHECK_THROWS_AS(io::load_taxonomy_graph(path), ParseError);
  try {
    io::load_taxonomy_graph(path);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  io::write_file(path, "a\t\n");
  CHECK_THROWS_AS(io::load_taxonomy_graph(path), ParseError);

  io::write_file(path, "a\ta\n");
  CHECK_THROWS_AS(io::load_taxonomy_graph(path), ParseError);

  CHECK_THROWS_AS(io::load_taxonomy_graph(dir.file("missing.tsv")), IoError);
}

TEST_CASE("duplicate edge lines collapse to one edge") {
  TempDir dir;
  const std::string path = dir.file("t.tsv");
  io::write_file(path, "a\tb\na\tb\n");
  CHECK_EQ(io::load_taxonomy_graph(path).edge_count(), 1);
}

TEST_CASE("load_taxonomy rejects cyclic files, load_taxonomy_graph does not") {
  TempDir dir;
  const std::string path = dir.file("t.tsv");
  io::write_file(path, "a\tb\nb\ta\n");
  CHECK_NOTHROW(io::load_taxonomy_graph(path));
  CHECK_THROWS_AS(io::load_taxonomy(path), CyclicGraph);
}

TEST_CASE("save_taxonomy round-trips graphs including isolated nodes") {
  TempDir dir;
  DirectedGraph g = diamond();
  g.add_node("iso");
  const std::string path = dir.file("t.tsv");
  io::save_taxonomy(g, path);
  CHECK(io::load_taxonomy_graph(path) == g);
}

TEST_CASE("save_weighted_edges writes parent, child, weight") {
  TempDir dir;
  DirectedGraph g;
  g.add_node("a");
  g.add_node("b");
  g.add_edge("a", "b", 0.25);
  const std::string path = dir.file("w.tsv");
  io::save_weighted_edges(g, path);
  CHECK_EQ(io::read_file(path), "a\tb\t0.25\n");
}

TEST_CASE("concepts load with normalized names and strict validation") {
  TempDir dir;
  const std::string path = dir.file("c.tsv");
  io::write_file(path, "c1\t Deep   LEARNING \nc2\tphysics\n");
  const auto cs = io::load_concepts(path);
  REQUIRE_EQ(cs.size(), 2);
  CHECK_EQ(cs[0].id, "c1");
  CHECK_EQ(cs[0].surface_name, "deep learning");

  io::write_file(path, "c1\ta\nc1\tb\n");
  CHECK_THROWS_AS(io::load_concepts(path), ParseError);
  io::write_file(path, "c1\n");
  CHECK_THROWS_AS(io::load_concepts(path), ParseError);
  io::write_file(path, "c1\t   \n");
  CHECK_THROWS_AS(io::load_concepts(path), ParseError);
}

TEST_CASE("concept lists round-trip") {
  TempDir dir;
  const std::vector<Concept> cs = {{"a", "alpha decay"}, {"b", "beta"}};
  const std::string path = dir.file("c.tsv");
  io::save_concepts(cs, path);
  const auto back = io::load_concepts(path);
  REQUIRE_EQ(back.size(), 2);
  CHECK_EQ(back[0].id, cs[0].id);
  CHECK_EQ(back[0].surface_name, cs[0].surface_name);
}

TEST_CASE("id lists round-trip and reject tab characters") {
  TempDir dir;
  const std::string path = dir.file("ids.txt");
  io::save_id_list({"q3", "q1", "q2"}, path);
  CHECK_EQ(io::load_id_list(path), std::vector<ConceptId>({"q3", "q1", "q2"}));

  io::write_file(path, "a\tb\n");
  CHECK_THROWS_AS(io::load_id_list(path), ParseError);
}

TEST_CASE("parent maps round-trip") {
  TempDir dir;
  const std::map<ConceptId, std::set<ConceptId>> pm = {
      {"q1", {"p1", "p2"}}, {"q2", {"p1"}}};
  const std::string path = dir.file("pm.tsv");
  io::save_parent_map(pm, path);
  CHECK_EQ(io::load_parent_map(path), pm);

  io::write_file(path, "q1\n");
  CHECK_THROWS_AS(io::load_parent_map(path), ParseError);
}

TEST_CASE("format_double %.17g survives a text round-trip exactly") {
  for (const double v : {0.1, 1.0 / 3.0, 2.718281828459045, 1e-300, 1e300,
                         123456789.123456789, -0.4999999999999999}) {
    const std::string s = io::format_double(v);
    CHECK_EQ(std::strtod(s.c_str(), nullptr), v);
  }
  CHECK_EQ(io::format_double(0.125, "%.6g"), "0.125");
  CHECK_EQ(io::format_double(1.0 / 3.0, "%.6g"), "0.333333");
}

TEST_CASE("file hashing matches published FNV-1a vectors") {
  TempDir dir;
  const std::string path = dir.file("h.bin");

  io::write_file(path, "");
  CHECK_EQ(io::fnv1a64_file(path), 0xcbf29ce484222325ULL);
  io::write_file(path, "a");
  CHECK_EQ(io::fnv1a64_file(path), 0xaf63dc4c8601ec8cULL);
  io::write_file(path, "foobar");
  CHECK_EQ(io::fnv1a64_file(path), 0x85944171f73967e8ULL);

  CHECK_THROWS_AS(io::fnv1a64_file(dir.file("missing")), IoError);
}

TEST_CASE("read_file and write_file preserve binary content") {
  TempDir dir;
  const std::string path = dir.file("b.bin");
  std::string payload = "head";
  payload.push_back('\0');
  payload += "tail\nmore";
  io::write_file(path, payload);
  CHECK_EQ(io::read_file(path), payload);
  CHECK_THROWS_AS(io::read_file(dir.file("missing")), IoError);
}
