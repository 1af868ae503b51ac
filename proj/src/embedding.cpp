#include "taxoorder/embedding.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "taxoorder/errors.hpp"
#include "taxoorder/io.hpp"

namespace taxoorder {

namespace {

std::string underscores_to_spaces(std::string s) {
  for (char& c : s)
    if (c == '_') c = ' ';
  return s;
}

std::string spaces_to_underscores(std::string s) {
  for (char& c : s)
    if (c == ' ') c = '_';
  return s;
}

double parse_value(const std::string& field, const std::string& path,
                   std::size_t lineno) {
  const char* begin = field.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ParseError(path, lineno, "bad number '" + field + "'");
  if (!std::isfinite(v))
    throw ParseError(path, lineno, "non-finite value '" + field + "'");
  return v;
}

std::vector<std::string> split_spaces(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) fields.push_back(std::move(f));
  return fields;
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw DimensionMismatch("embedding dimension must be positive");
}

bool EmbeddingStore::contains(const std::string& token) const {
  return vectors_.count(token) != 0;
}

void EmbeddingStore::insert(const std::string& token,
                            std::vector<double> vec) {
  if (vec.size() != dim_)
    throw DimensionMismatch("vector for '" + token + "' has " +
                            std::to_string(vec.size()) + " values, expected " +
                            std::to_string(dim_));
  if (!vectors_.emplace(token, std::move(vec)).second)
    throw DuplicateToken("duplicate token '" + token + "'");
}

const std::vector<double>& EmbeddingStore::at(const std::string& token) const {
  auto it = vectors_.find(token);
  if (it == vectors_.end())
    throw MissingEmbedding("no embedding for '" + token + "'");
  return it->second;
}

EmbeddingStore load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line))
    throw MalformedHeader(path + ": empty embedding file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_spaces(line);
  if (header.size() != 2)
    throw MalformedHeader(path + ": header must be `count dim`");
  long count = 0, dim = 0;
  try {
    count = std::stol(header[0]);
    dim = std::stol(header[1]);
  } catch (const std::exception&) {
    throw MalformedHeader(path + ": header must be `count dim`");
  }
  if (count < 0 || dim <= 0)
    throw MalformedHeader(path + ": header must be `count dim`");

  EmbeddingStore store(static_cast<std::size_t>(dim));
  std::size_t lineno = 1;
  long rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (fields.size() != static_cast<std::size_t>(dim) + 1)
      throw DimensionMismatch(path + ":" + std::to_string(lineno) + ": row has " +
                              std::to_string(fields.size() - 1) +
                              " values, expected " + std::to_string(dim));
    std::vector<double> vec(static_cast<std::size_t>(dim));
    for (long i = 0; i < dim; ++i)
      vec[static_cast<std::size_t>(i)] =
          parse_value(fields[static_cast<std::size_t>(i) + 1], path, lineno);
    std::string token = underscores_to_spaces(fields[0]);
    if (store.contains(token))
      throw DuplicateToken(path + ":" + std::to_string(lineno) +
                           ": duplicate token '" + token + "'");
    store.insert(token, std::move(vec));
    ++rows;
  }
  if (rows != count)
    throw MalformedHeader(path + ": header declares " + std::to_string(count) +
                          " rows, file has " + std::to_string(rows));
  return store;
}

void save_embeddings(const EmbeddingStore& store, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << store.size() << ' ' << store.dim() << '\n';
  for (const auto& [token, vec] : store.all()) {
    out << spaces_to_underscores(token);
    for (double v : vec) out << ' ' << io::format_double(v, "%.6g");
    out << '\n';
  }
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("cosine of vectors with sizes " +
                            std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw ZeroVector("cosine undefined for zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> pair_feature(const std::vector<double>& a,
                                 const std::vector<double>& c) {
  if (a.size() != c.size())
    throw DimensionMismatch("pair feature of vectors with sizes " +
                            std::to_string(a.size()) + " and " +
                            std::to_string(c.size()));
  std::vector<double> f;
  f.reserve(4 * a.size());
  f.insert(f.end(), a.begin(), a.end());
  f.insert(f.end(), c.begin(), c.end());
  for (std::size_t i = 0; i < a.size(); ++i) f.push_back(a[i] - c[i]);
  for (std::size_t i = 0; i < a.size(); ++i) f.push_back(a[i] * c[i]);
  return f;
}

double edge_similarity_threshold(const Taxonomy& taxonomy,
                                 const EmbeddingStore& by_id) {
  const auto edges = taxonomy.graph().edges();
  if (edges.empty())
    throw EmptyTaxonomy("similarity threshold needs at least one edge");
  double sum = 0.0;
  for (const auto& e : edges) sum += cosine(by_id.at(e.parent), by_id.at(e.child));
  return sum / static_cast<double>(edges.size());
}

EmbeddingStore rekey_by_id(const EmbeddingStore& by_name,
                           const std::vector<Concept>& concepts,
                           std::vector<ConceptId>* missing) {
  EmbeddingStore by_id(by_name.dim());
  for (const auto& c : concepts) {
    if (!by_name.contains(c.surface_name)) {
      if (missing) {
        missing->push_back(c.id);
        continue;
      }
      throw MissingEmbedding("no embedding for '" + c.surface_name + "' (" +
                             c.id + ")");
    }
    by_id.insert(c.id, by_name.at(c.surface_name));
  }
  return by_id;
}

}  // namespace taxoorder
