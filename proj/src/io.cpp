#include "taxoorder/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "taxoorder/errors.hpp"

namespace taxoorder::io {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

DirectedGraph load_taxonomy_graph(const std::string& path) {
  std::ifstream in = open_in(path);
  // Two passes over the parsed lines: nodes first, then edges, so edge
  // order in the file does not matter.
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() > 2)
      throw ParseError(path, lineno, "expected `parent<TAB>child`");
    for (const auto& f : fields)
      if (f.empty()) throw ParseError(path, lineno, "empty concept id");
    rows.emplace_back(lineno, std::move(fields));
  }
  DirectedGraph g;
  for (const auto& [ln, fields] : rows)
    for (const auto& f : fields) g.add_node(f);
  for (const auto& [ln, fields] : rows) {
    if (fields.size() != 2) continue;
    if (fields[0] == fields[1])
      throw ParseError(path, ln, "self-loop on '" + fields[0] + "'");
    g.add_edge(fields[0], fields[1]);
  }
  return g;
}

Taxonomy load_taxonomy(const std::string& path) {
  DirectedGraph g = load_taxonomy_graph(path);
  if (!is_acyclic(g))
    throw CyclicGraph("taxonomy file '" + path + "' contains a cycle");
  return Taxonomy(std::move(g));
}

void save_taxonomy(const DirectedGraph& g, const std::string& path) {
  std::ofstream out = open_out(path);
  std::set<ConceptId> isolated = g.nodes();
  for (const auto& e : g.edges()) {
    isolated.erase(e.parent);
    isolated.erase(e.child);
    out << e.parent << '\t' << e.child << '\n';
  }
  for (const auto& id : isolated) out << id << '\n';
}

void save_weighted_edges(const DirectedGraph& g, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const auto& e : g.edges())
    out << e.parent << '\t' << e.child << '\t'
        << format_double(e.weight, "%.6g") << '\n';
}

std::vector<Concept> load_concepts(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<Concept> concepts;
  std::set<ConceptId> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2)
      throw ParseError(path, lineno, "expected `id<TAB>surface_name`");
    if (fields[0].empty()) throw ParseError(path, lineno, "empty concept id");
    std::string name = normalize_surface(fields[1]);
    if (name.empty())
      throw ParseError(path, lineno, "empty surface name for '" + fields[0] + "'");
    if (!seen.insert(fields[0]).second)
      throw ParseError(path, lineno, "duplicate concept id '" + fields[0] + "'");
    concepts.push_back({fields[0], std::move(name)});
  }
  return concepts;
}

void save_concepts(const std::vector<Concept>& concepts,
                   const std::string& path) {
  std::ofstream out = open_out(path);
  for (const auto& c : concepts) out << c.id << '\t' << c.surface_name << '\n';
}

std::vector<ConceptId> load_id_list(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<ConceptId> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.find('\t') != std::string::npos)
      throw ParseError(path, lineno, "expected one id per line");
    ids.push_back(line);
  }
  return ids;
}

void save_id_list(const std::vector<ConceptId>& ids, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const auto& id : ids) out << id << '\n';
}

std::map<ConceptId, std::set<ConceptId>> load_parent_map(
    const std::string& path) {
  std::ifstream in = open_in(path);
  std::map<ConceptId, std::set<ConceptId>> pm;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
      throw ParseError(path, lineno, "expected `query<TAB>parent`");
    pm[fields[0]].insert(fields[1]);
  }
  return pm;
}

void save_parent_map(const std::map<ConceptId, std::set<ConceptId>>& pm,
                     const std::string& path) {
  std::ofstream out = open_out(path);
  for (const auto& [query, parents] : pm)
    for (const auto& p : parents) out << query << '\t' << p << '\n';
}

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for hashing");
  std::uint64_t h = 14695981039346656037ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
}

}  // namespace taxoorder::io
