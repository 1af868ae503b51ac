// Command-line driver: gen / split / train / sort / expand-eval / pipeline.
// All randomness flows from --seed through named substreams, so stages can
// be re-run independently and still reproduce the pipeline bit for bit.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "taxoorder/embedding.hpp"
#include "taxoorder/errors.hpp"
#include "taxoorder/eval.hpp"
#include "taxoorder/expansion.hpp"
#include "taxoorder/graph.hpp"
#include "taxoorder/io.hpp"
#include "taxoorder/pattern.hpp"
#include "taxoorder/scorer.hpp"
#include "taxoorder/sorter.hpp"

namespace fs = std::filesystem;
using namespace taxoorder;

namespace {

// Thrown after the diagnostic is already on stderr.
struct CommandExit {
  int code;
};

int run(const std::function<int()>& body) {
  try {
    return body();
  } catch (const CommandExit& e) {
    return e.code;
  } catch (const NonFiniteLoss& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const FractionUnreachable& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const MalformedHeader& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

const std::set<std::string> kMethods = {"random",  "affinity",  "mlp",
                                        "pattern", "taxoorder", "groundtruth"};

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> parts;
  std::stringstream ss(csv);
  std::string part;
  while (std::getline(ss, part, ','))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

std::vector<std::string> parse_methods(const std::string& csv) {
  std::vector<std::string> methods = split_csv(csv);
  if (methods.empty()) throw Error("--methods must name at least one method");
  for (const auto& m : methods)
    if (!kMethods.count(m)) throw Error("unknown method '" + m + "'");
  return methods;
}

std::vector<std::size_t> parse_hit_ks(const std::string& csv) {
  std::vector<std::size_t> ks;
  for (const auto& part : split_csv(csv)) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(part.c_str(), &end, 10);
    if (end == part.c_str() || *end != '\0' || v == 0)
      throw Error("bad --hit-k entry '" + part + "'");
    ks.push_back(v);
  }
  if (ks.empty()) throw Error("--hit-k must list at least one k");
  return ks;
}

double resolve_alpha(const std::string& flag, const Taxonomy& t0,
                     const EmbeddingStore& by_id) {
  if (flag == "auto") {
    const double a = edge_similarity_threshold(t0, by_id);
    std::fprintf(stderr, "alpha = %s (auto)\n",
                 io::format_double(a, "%.6g").c_str());
    return a;
  }
  char* end = nullptr;
  const double a = std::strtod(flag.c_str(), &end);
  if (end == flag.c_str() || *end != '\0' || !(a >= -1.0 && a <= 1.0))
    throw Error("--alpha must be 'auto' or a number in [-1, 1]");
  std::fprintf(stderr, "alpha = %s\n", io::format_double(a, "%.6g").c_str());
  return a;
}

ScorerParams need_checkpoint(const std::string& path) {
  if (path.empty() || !fs::exists(path)) {
    std::fprintf(stderr,
                 "error: checkpoint '%s' not found but the selected method "
                 "needs one\n",
                 path.c_str());
    throw CommandExit{5};
  }
  return load_checkpoint(path);
}

// Concepts from the new-concepts list that have embeddings; the rest are
// dropped with a warning so every stage works on the same query set.
std::vector<Concept> gather_queries(const std::vector<ConceptId>& ids,
                                    const std::vector<Concept>& concepts,
                                    const EmbeddingStore& by_id) {
  std::map<ConceptId, const Concept*> index;
  for (const auto& c : concepts) index[c.id] = &c;
  std::vector<Concept> out;
  std::size_t dropped = 0;
  std::set<ConceptId> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second)
      throw Error("duplicate new concept '" + id + "'");
    const auto it = index.find(id);
    if (it == index.end())
      throw Error("new concept '" + id + "' is not in the concepts file");
    if (!by_id.contains(id)) {
      ++dropped;
      continue;
    }
    out.push_back(*it->second);
  }
  if (dropped)
    std::fprintf(stderr,
                 "warning: skipped %zu new concepts without embeddings\n",
                 dropped);
  return out;
}

// Rebuilds the ground-truth taxonomy as reduced + queries + true-parent
// edges. Parents outside that pool (e.g. concepts dropped for missing
// embeddings) are excluded from the evaluation universe.
GroundTruth restrict_ground_truth(
    const Taxonomy& t0, const std::vector<Concept>& queries,
    const std::map<ConceptId, std::set<ConceptId>>& pm_all) {
  GroundTruth gt;
  std::set<ConceptId> pool = t0.graph().nodes();
  for (const auto& q : queries) {
    gt.new_concepts.insert(q.id);
    pool.insert(q.id);
  }
  DirectedGraph full = t0.graph();
  for (const auto& q : queries) full.add_node(q.id);
  std::size_t dropped = 0;
  for (const auto& q : queries) {
    const auto it = pm_all.find(q.id);
    if (it == pm_all.end())
      throw Error("no ground-truth parents recorded for '" + q.id + "'");
    std::set<ConceptId> kept;
    for (const auto& p : it->second) {
      if (pool.count(p)) {
        kept.insert(p);
        full.add_edge(p, q.id);
      } else {
        ++dropped;
      }
    }
    gt.parent_map[q.id] = std::move(kept);
  }
  if (dropped)
    std::fprintf(stderr,
                 "warning: dropped %zu ground-truth parents outside the "
                 "evaluation pool\n",
                 dropped);
  gt.full_taxonomy = Taxonomy(std::move(full));
  return gt;
}

ConceptOrder compute_order(
    const std::string& method, const std::vector<Concept>& queries,
    const Taxonomy& t0, const EmbeddingStore& by_id,
    const ScorerParams* params, double alpha, std::uint64_t seed,
    const std::map<ConceptId, std::set<ConceptId>>* gt_pm,
    const ExpansionModel* model, DirectedGraph* torder_dump) {
  if (method == "random") return random_order(queries, seed);
  if (method == "pattern") return pattern_order(queries);
  if (method == "groundtruth") {
    if (!gt_pm) throw Error("the groundtruth method needs --ground-truth");
    DirectedGraph g;
    for (const auto& q : queries) g.add_node(q.id);
    for (const auto& q : queries) {
      const auto it = gt_pm->find(q.id);
      if (it == gt_pm->end()) continue;
      for (const auto& p : it->second)
        if (p != q.id && g.has_node(p)) g.add_edge(p, q.id);
    }
    return sort_concepts(g);
  }
  if (method == "affinity") {
    if (!model) throw Error("the affinity method needs a ranking model");
    return affinity_order(queries, t0, *model);
  }
  if (!params) throw Error("the " + method + " method needs a checkpoint");
  if (method == "mlp") return mlp_order(queries, by_id, *params, alpha);
  if (method == "taxoorder") {
    if (torder_dump) {
      DirectedGraph torder = merge_into_dag(
          build_pattern_dag(queries),
          pseudo_edges(candidate_pairs(queries, by_id, alpha), *params,
                       by_id));
      ConceptOrder order = sort_concepts(torder);
      *torder_dump = std::move(torder);
      return order;
    }
    return taxoorder_order(queries, by_id, *params, alpha);
  }
  throw Error("unknown method '" + method + "'");
}

void write_loss_log(const std::vector<double>& losses,
                    const std::string& path) {
  std::ostringstream out;
  for (std::size_t i = 0; i < losses.size(); ++i)
    out << i << '\t' << io::format_double(losses[i]) << '\n';
  io::write_file(path, out.str());
}

void write_predicted_edges(const ExpansionTrace& trace,
                           const std::string& path) {
  std::ostringstream out;
  for (const auto& [p, c] : trace.predicted_edges)
    out << p << '\t' << c << '\n';
  io::write_file(path, out.str());
}

void write_manifest(const fs::path& dir, std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  std::ostringstream out;
  for (const auto& name : names) {
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(
                      io::fnv1a64_file((dir / name).string())));
    out << hex << "  " << name << '\n';
  }
  io::write_file((dir / "manifest.txt").string(), out.str());
}

// ---------------------------------------------------------------- commands

struct GenOpts {
  std::string out;
  std::size_t nodes = 200;
  std::size_t branching = 3;
  double sigma = 0.3;
  std::size_t dim = 32;
  std::uint64_t seed = 0;
};

int cmd_gen(const GenOpts& o) {
  SyntheticData data =
      gen_synthetic(o.nodes, o.branching, o.sigma, o.dim, o.seed);
  fs::create_directories(o.out);
  const fs::path out(o.out);
  io::save_taxonomy(data.taxonomy.graph(), (out / "taxonomy.tsv").string());
  io::save_concepts(data.concepts, (out / "concepts.tsv").string());
  EmbeddingStore by_name(data.embeddings.dim());
  for (const auto& c : data.concepts)
    by_name.insert(c.surface_name, data.embeddings.at(c.id));
  save_embeddings(by_name, (out / "embeddings.txt").string());
  std::fprintf(stderr, "generated %zu concepts, %zu edges, dim %zu\n",
               data.taxonomy.graph().node_count(),
               data.taxonomy.graph().edge_count(), data.embeddings.dim());
  return 0;
}

struct SplitOpts {
  std::string taxonomy;
  std::string out;
  std::string mode = "test";
  double fraction = 0.2;
  std::uint64_t seed = 0;
};

int cmd_split(const SplitOpts& o) {
  if (!(o.fraction > 0.0 && o.fraction < 1.0)) {
    std::fprintf(stderr,
                 "error: --fraction must lie strictly between 0 and 1\n");
    return 2;
  }
  const Taxonomy t = io::load_taxonomy(o.taxonomy);
  const SplitResult r = o.mode == "val"
                            ? make_validation_split(t, o.fraction, o.seed)
                            : make_test_split(t, o.fraction, o.seed);
  fs::create_directories(o.out);
  const fs::path out(o.out);
  io::save_taxonomy(r.reduced.graph(),
                    (out / "reduced_taxonomy.tsv").string());
  io::save_id_list({r.gt.new_concepts.begin(), r.gt.new_concepts.end()},
                   (out / "new_concepts.txt").string());
  io::save_parent_map(r.gt.parent_map, (out / "ground_truth.tsv").string());
  std::fprintf(stderr, "split: masked %zu of %zu concepts\n",
               r.gt.new_concepts.size(), t.graph().node_count());
  return 0;
}

struct TrainOpts {
  std::string taxonomy;
  std::string concepts;
  std::string embeddings;
  std::string checkpoint;
  std::size_t hidden = 512;
  TrainConfig cfg;
};

int cmd_train(const TrainOpts& o) {
  const Taxonomy t = io::load_taxonomy(o.taxonomy);
  const auto concepts = io::load_concepts(o.concepts);
  std::vector<ConceptId> missing;
  const EmbeddingStore by_id =
      rekey_by_id(load_embeddings(o.embeddings), concepts, &missing);
  for (const auto& n : t.graph().nodes())
    if (!by_id.contains(n))
      throw MissingEmbedding("taxonomy node '" + n + "' has no embedding");
  std::vector<double> losses;
  const ScorerParams params = train(t, by_id, o.hidden, o.cfg, &losses);
  save_checkpoint(params, o.cfg.seed, o.checkpoint);
  write_loss_log(losses, o.checkpoint + ".loss");
  std::fprintf(stderr, "train: %zu epochs, final loss %s, %zu parameters\n",
               losses.size(),
               losses.empty()
                   ? "n/a"
                   : io::format_double(losses.back(), "%.6g").c_str(),
               params.parameter_count());
  return 0;
}

struct SortOpts {
  std::string taxonomy;
  std::string concepts;
  std::string embeddings;
  std::string new_concepts;
  std::string checkpoint;
  std::string ground_truth;
  std::string affinity_file;
  std::string out;
  std::string dump;
  std::string method = "taxoorder";
  std::string alpha = "auto";
  std::uint64_t seed = 0;
};

int cmd_sort(const SortOpts& o) {
  const Taxonomy t0 = io::load_taxonomy(o.taxonomy);
  const auto concepts = io::load_concepts(o.concepts);
  const auto new_ids = io::load_id_list(o.new_concepts);
  std::vector<ConceptId> missing;
  const EmbeddingStore by_id =
      rekey_by_id(load_embeddings(o.embeddings), concepts, &missing);
  const std::vector<Concept> queries =
      gather_queries(new_ids, concepts, by_id);

  const bool learned =
      o.method == "mlp" || o.method == "taxoorder" ||
      (o.method == "affinity" && o.affinity_file.empty());
  ScorerParams params;
  if (learned) params = need_checkpoint(o.checkpoint);

  std::unique_ptr<ExpansionModel> model;
  if (o.method == "affinity") {
    if (!o.affinity_file.empty())
      model = std::make_unique<FileAffinityModel>(
          load_affinity_file(o.affinity_file));
    else
      model = std::make_unique<BuiltinMatcher>(params, by_id);
  }

  std::map<ConceptId, std::set<ConceptId>> gt_pm;
  if (o.method == "groundtruth") {
    if (o.ground_truth.empty())
      throw Error("the groundtruth method needs --ground-truth");
    gt_pm = io::load_parent_map(o.ground_truth);
  }

  double alpha = 0.0;
  if (o.method == "mlp" || o.method == "taxoorder")
    alpha = resolve_alpha(o.alpha, t0, by_id);

  DirectedGraph dump;
  const bool want_dump = !o.dump.empty() && o.method == "taxoorder";
  if (!o.dump.empty() && o.method != "taxoorder")
    std::fprintf(stderr,
                 "warning: --dump-order-graph only applies to the taxoorder "
                 "method; ignored\n");
  const ConceptOrder order = compute_order(
      o.method, queries, t0, by_id, learned ? &params : nullptr, alpha,
      o.seed, o.method == "groundtruth" ? &gt_pm : nullptr, model.get(),
      want_dump ? &dump : nullptr);
  io::save_id_list(order.sequence, o.out);
  if (want_dump) io::save_weighted_edges(dump, o.dump);
  std::fprintf(stderr, "sort[%s]: ordered %zu concepts\n", o.method.c_str(),
               order.sequence.size());
  return 0;
}

struct EvalOpts {
  std::string taxonomy;
  std::string concepts;
  std::string embeddings;
  std::string new_concepts;
  std::string ground_truth;
  std::string order_file;
  std::string methods;
  std::string checkpoint;
  std::string affinity_file;
  std::string emit_requests;
  std::string out;
  std::string expansion = "builtin";
  std::string alpha = "auto";
  std::string hit_k = "1,3";
  std::uint64_t seed = 0;
};

int cmd_expand_eval(const EvalOpts& o) {
  const std::vector<std::size_t> ks = parse_hit_ks(o.hit_k);
  const Taxonomy t0 = io::load_taxonomy(o.taxonomy);
  const auto concepts = io::load_concepts(o.concepts);
  const auto new_ids = io::load_id_list(o.new_concepts);
  std::vector<ConceptId> missing;
  const EmbeddingStore by_id =
      rekey_by_id(load_embeddings(o.embeddings), concepts, &missing);
  const std::vector<Concept> queries =
      gather_queries(new_ids, concepts, by_id);

  if (!o.emit_requests.empty()) {
    std::vector<ConceptId> qids;
    for (const auto& q : queries) qids.push_back(q.id);
    write_affinity_requests(t0, qids, o.emit_requests);
    std::fprintf(stderr, "wrote affinity requests for %zu queries\n",
                 qids.size());
    return 0;
  }

  if (o.ground_truth.empty())
    throw Error("expand-eval needs --ground-truth");
  const GroundTruth gt = restrict_ground_truth(
      t0, queries, io::load_parent_map(o.ground_truth));

  ScorerParams params;
  bool have_params = false;
  std::unique_ptr<ExpansionModel> model;
  if (o.expansion == "builtin") {
    params = need_checkpoint(o.checkpoint);
    have_params = true;
    model = std::make_unique<BuiltinMatcher>(params, by_id);
  } else if (o.expansion == "oracle") {
    model = std::make_unique<GroundTruthOracle>(gt.parent_map, by_id);
  } else {
    if (o.affinity_file.empty())
      throw Error("--expansion external-file needs --affinity-file");
    model = std::make_unique<FileAffinityModel>(
        load_affinity_file(o.affinity_file));
  }

  std::vector<std::pair<std::string, ConceptOrder>> orders;
  if (!o.order_file.empty()) {
    const auto ids = io::load_id_list(o.order_file);
    std::set<ConceptId> got(ids.begin(), ids.end());
    if (got.size() != ids.size() || got != gt.new_concepts) {
      std::fprintf(stderr,
                   "error: order file does not match the new-concepts list "
                   "(%zu order entries vs %zu queries)\n",
                   ids.size(), gt.new_concepts.size());
      return 6;
    }
    orders.emplace_back("file", ConceptOrder{ids});
  } else {
    const std::vector<std::string> methods =
        parse_methods(o.methods.empty() ? "groundtruth,random,affinity,mlp,"
                                          "pattern,taxoorder"
                                        : o.methods);
    bool need_alpha = false;
    bool need_params = false;
    for (const auto& m : methods) {
      need_alpha = need_alpha || m == "mlp" || m == "taxoorder";
      need_params = need_params || m == "mlp" || m == "taxoorder";
    }
    if (need_params && !have_params) {
      params = need_checkpoint(o.checkpoint);
      have_params = true;
    }
    const double alpha =
        need_alpha ? resolve_alpha(o.alpha, t0, by_id) : 0.0;
    for (const auto& m : methods)
      orders.emplace_back(
          m, compute_order(m, queries, t0, by_id,
                           have_params ? &params : nullptr, alpha, o.seed,
                           &gt.parent_map, model.get(), nullptr));
  }

  fs::create_directories(o.out);
  const fs::path out(o.out);
  std::vector<std::pair<std::string, MetricsReport>> rows;
  std::string kv;
  for (const auto& [label, order] : orders) {
    const ExpansionTrace trace = expand_all(t0, order.sequence, *model);
    const MetricsReport rep = evaluate(order, trace, t0, gt, ks);
    write_predicted_edges(
        trace, (out / ("predicted_edges_" + label + ".tsv")).string());
    kv += metrics_kv(label, rep);
    rows.emplace_back(label, rep);
    std::fprintf(stderr, "eval[%s]: enc=%zu\n", label.c_str(), rep.enc);
  }
  const std::string table = metrics_table(rows);
  std::fputs(table.c_str(), stdout);
  io::write_file((out / "metrics.txt").string(), table);
  io::write_file((out / "metrics.kv").string(), kv);
  return 0;
}

struct PipelineOpts {
  std::string taxonomy;
  std::string concepts;
  std::string embeddings;
  std::string out;
  std::string mode = "test";
  std::string methods = "groundtruth,random,affinity,mlp,pattern,taxoorder";
  std::string expansion = "builtin";
  std::string affinity_file;
  std::string alpha = "auto";
  std::string hit_k = "1,3";
  double fraction = 0.2;
  std::size_t hidden = 512;
  std::uint64_t seed = 0;
  TrainConfig cfg;
};

int cmd_pipeline(const PipelineOpts& o) {
  if (!(o.fraction > 0.0 && o.fraction < 1.0)) {
    std::fprintf(stderr,
                 "error: --fraction must lie strictly between 0 and 1\n");
    return 2;
  }
  const std::vector<std::size_t> ks = parse_hit_ks(o.hit_k);
  const std::vector<std::string> methods = parse_methods(o.methods);
  fs::create_directories(o.out);
  const fs::path out(o.out);
  std::vector<std::string> artifacts;

  const Taxonomy full = io::load_taxonomy(o.taxonomy);
  const auto concepts = io::load_concepts(o.concepts);
  std::vector<ConceptId> missing;
  const EmbeddingStore by_id =
      rekey_by_id(load_embeddings(o.embeddings), concepts, &missing);

  const SplitResult split =
      o.mode == "val" ? make_validation_split(full, o.fraction, o.seed)
                      : make_test_split(full, o.fraction, o.seed);
  io::save_taxonomy(split.reduced.graph(),
                    (out / "reduced_taxonomy.tsv").string());
  io::save_id_list({split.gt.new_concepts.begin(),
                    split.gt.new_concepts.end()},
                   (out / "new_concepts.txt").string());
  io::save_parent_map(split.gt.parent_map,
                      (out / "ground_truth.tsv").string());
  artifacts.insert(artifacts.end(), {"reduced_taxonomy.tsv",
                                     "new_concepts.txt", "ground_truth.tsv"});
  std::fprintf(stderr, "split: masked %zu of %zu concepts\n",
               split.gt.new_concepts.size(), full.graph().node_count());

  const std::vector<ConceptId> new_ids(split.gt.new_concepts.begin(),
                                       split.gt.new_concepts.end());
  const std::vector<Concept> queries =
      gather_queries(new_ids, concepts, by_id);
  const GroundTruth gt =
      restrict_ground_truth(split.reduced, queries, split.gt.parent_map);

  for (const auto& n : split.reduced.graph().nodes())
    if (!by_id.contains(n))
      throw MissingEmbedding("taxonomy node '" + n + "' has no embedding");
  TrainConfig cfg = o.cfg;
  cfg.seed = o.seed;
  std::vector<double> losses;
  const ScorerParams trained = train(split.reduced, by_id, o.hidden, cfg,
                                     &losses);
  save_checkpoint(trained, cfg.seed, (out / "checkpoint.txt").string());
  write_loss_log(losses, (out / "checkpoint.txt.loss").string());
  artifacts.insert(artifacts.end(), {"checkpoint.txt", "checkpoint.txt.loss"});
  std::fprintf(stderr, "train: %zu epochs, final loss %s\n", losses.size(),
               losses.empty()
                   ? "n/a"
                   : io::format_double(losses.back(), "%.6g").c_str());
  // Reload so staged runs that read the file back produce identical bytes.
  const ScorerParams params =
      load_checkpoint((out / "checkpoint.txt").string());

  std::unique_ptr<ExpansionModel> model;
  if (o.expansion == "builtin") {
    model = std::make_unique<BuiltinMatcher>(params, by_id);
  } else if (o.expansion == "oracle") {
    model = std::make_unique<GroundTruthOracle>(gt.parent_map, by_id);
  } else {
    if (o.affinity_file.empty())
      throw Error("--expansion external-file needs --affinity-file");
    model = std::make_unique<FileAffinityModel>(
        load_affinity_file(o.affinity_file));
  }

  bool need_alpha = false;
  for (const auto& m : methods)
    need_alpha = need_alpha || m == "mlp" || m == "taxoorder";
  const double alpha =
      need_alpha ? resolve_alpha(o.alpha, split.reduced, by_id) : 0.0;

  std::vector<std::pair<std::string, MetricsReport>> rows;
  std::string kv;
  for (const auto& m : methods) {
    const ConceptOrder order =
        compute_order(m, queries, split.reduced, by_id, &params, alpha,
                      o.seed, &gt.parent_map, model.get(), nullptr);
    io::save_id_list(order.sequence, (out / ("order_" + m + ".txt")).string());
    artifacts.push_back("order_" + m + ".txt");
    const ExpansionTrace trace =
        expand_all(split.reduced, order.sequence, *model);
    const MetricsReport rep = evaluate(order, trace, split.reduced, gt, ks);
    write_predicted_edges(
        trace, (out / ("predicted_edges_" + m + ".tsv")).string());
    artifacts.push_back("predicted_edges_" + m + ".tsv");
    kv += metrics_kv(m, rep);
    rows.emplace_back(m, rep);
    std::fprintf(stderr, "eval[%s]: enc=%zu\n", m.c_str(), rep.enc);
  }
  const std::string table = metrics_table(rows);
  std::fputs(table.c_str(), stdout);
  io::write_file((out / "metrics.txt").string(), table);
  io::write_file((out / "metrics.kv").string(), kv);
  artifacts.insert(artifacts.end(), {"metrics.txt", "metrics.kv"});

  write_manifest(out, artifacts);
  std::fprintf(stderr, "pipeline: %zu artifacts in %s\n", artifacts.size(),
               o.out.c_str());
  return 0;
}

void add_train_config_flags(CLI::App* cmd, TrainConfig& cfg,
                            std::size_t& hidden) {
  cmd->add_option("--neg-size", cfg.negative_size,
                  "Negatives per training instance")
      ->capture_default_str();
  cmd->add_option("--batch-size", cfg.batch_size, "SGD batch size")
      ->capture_default_str();
  cmd->add_option("--lr", cfg.learning_rate, "Learning rate")
      ->capture_default_str();
  cmd->add_option("--epochs", cfg.max_epochs, "Maximum training epochs")
      ->capture_default_str();
  cmd->add_option("--tol", cfg.convergence_tol,
                  "Stop when the epoch loss improves by less than this")
      ->capture_default_str();
  cmd->add_flag("--per-edge", cfg.per_edge,
                "Train one instance per edge instead of one per node");
  cmd->add_option("--hidden", hidden, "Hidden layer width")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept-ordering toolkit for taxonomy expansion"};
  app.require_subcommand(1);

  GenOpts gen;
  CLI::App* cgen = app.add_subcommand(
      "gen", "Generate a synthetic taxonomy with embeddings");
  cgen->add_option("--out", gen.out, "Output directory")->required();
  cgen->add_option("--nodes", gen.nodes, "Number of concepts")
      ->capture_default_str();
  cgen->add_option("--branching", gen.branching, "Maximum children per node")
      ->capture_default_str();
  cgen->add_option("--sigma", gen.sigma, "Embedding noise scale")
      ->capture_default_str();
  cgen->add_option("--dim", gen.dim, "Embedding dimension")
      ->capture_default_str();
  cgen->add_option("--seed", gen.seed, "Random seed")->capture_default_str();

  SplitOpts spl;
  CLI::App* csplit = app.add_subcommand(
      "split", "Mask part of a taxonomy into a benchmark split");
  csplit->add_option("--taxonomy", spl.taxonomy, "Full taxonomy TSV")
      ->required();
  csplit->add_option("--mode", spl.mode, "val (mask leaves) or test (mask subtrees)")
      ->check(CLI::IsMember({"val", "test"}))
      ->capture_default_str();
  csplit->add_option("--fraction", spl.fraction, "Fraction to mask")
      ->capture_default_str();
  csplit->add_option("--seed", spl.seed, "Random seed")->capture_default_str();
  csplit->add_option("--out", spl.out, "Output directory")->required();

  TrainOpts tr;
  CLI::App* ctrain =
      app.add_subcommand("train", "Train the pair scorer on a taxonomy");
  ctrain->add_option("--taxonomy", tr.taxonomy, "Training taxonomy TSV")
      ->required();
  ctrain->add_option("--concepts", tr.concepts, "Concepts TSV")->required();
  ctrain->add_option("--embeddings", tr.embeddings, "Embeddings file")
      ->required();
  ctrain->add_option("--checkpoint", tr.checkpoint, "Checkpoint output path")
      ->required();
  ctrain->add_option("--seed", tr.cfg.seed, "Random seed")
      ->capture_default_str();
  add_train_config_flags(ctrain, tr.cfg, tr.hidden);

  SortOpts so;
  CLI::App* csort =
      app.add_subcommand("sort", "Compute an insertion order for new concepts");
  csort->add_option("--taxonomy", so.taxonomy, "Reduced taxonomy TSV")
      ->required();
  csort->add_option("--concepts", so.concepts, "Concepts TSV")->required();
  csort->add_option("--embeddings", so.embeddings, "Embeddings file")
      ->required();
  csort->add_option("--new-concepts", so.new_concepts, "New-concept id list")
      ->required();
  csort->add_option("--checkpoint", so.checkpoint, "Trained checkpoint");
  csort->add_option("--ground-truth", so.ground_truth,
                    "True-parent TSV (groundtruth method)");
  csort->add_option("--affinity-file", so.affinity_file,
                    "Precomputed affinity TSV (affinity method)");
  csort->add_option("--method", so.method, "Ordering method")
      ->check(CLI::IsMember(kMethods))
      ->capture_default_str();
  csort->add_option("--alpha", so.alpha, "Similarity threshold or 'auto'")
      ->capture_default_str();
  csort->add_option("--seed", so.seed, "Random seed")->capture_default_str();
  csort->add_option("--out", so.out, "Order output file")->required();
  csort->add_option("--dump-order-graph", so.dump,
                    "Write the merged order graph as weighted TSV");

  EvalOpts ev;
  CLI::App* ceval = app.add_subcommand(
      "expand-eval", "Run ordered insertion and score it against ground truth");
  ceval->add_option("--taxonomy", ev.taxonomy, "Reduced taxonomy TSV")
      ->required();
  ceval->add_option("--concepts", ev.concepts, "Concepts TSV")->required();
  ceval->add_option("--embeddings", ev.embeddings, "Embeddings file")
      ->required();
  ceval->add_option("--new-concepts", ev.new_concepts, "New-concept id list")
      ->required();
  ceval->add_option("--ground-truth", ev.ground_truth, "True-parent TSV");
  ceval->add_option("--order", ev.order_file, "Precomputed order file");
  ceval->add_option("--methods", ev.methods,
                    "Comma list of methods (ignored with --order)");
  ceval->add_option("--checkpoint", ev.checkpoint, "Trained checkpoint");
  ceval->add_option("--expansion", ev.expansion,
                    "Parent-ranking model: builtin, oracle, external-file")
      ->check(CLI::IsMember({"builtin", "oracle", "external-file"}))
      ->capture_default_str();
  ceval->add_option("--affinity-file", ev.affinity_file,
                    "Affinity TSV for --expansion external-file");
  ceval->add_option("--emit-requests", ev.emit_requests,
                    "Write the affinity request TSV and exit");
  ceval->add_option("--alpha", ev.alpha, "Similarity threshold or 'auto'")
      ->capture_default_str();
  ceval->add_option("--hit-k", ev.hit_k, "Comma list of hit@k cutoffs")
      ->capture_default_str();
  ceval->add_option("--seed", ev.seed, "Random seed")->capture_default_str();
  ceval->add_option("--out", ev.out, "Output directory")->required();

  PipelineOpts pl;
  CLI::App* cpipe = app.add_subcommand(
      "pipeline", "split + train + sort + expand-eval with one manifest");
  cpipe->add_option("--taxonomy", pl.taxonomy, "Full taxonomy TSV")
      ->required();
  cpipe->add_option("--concepts", pl.concepts, "Concepts TSV")->required();
  cpipe->add_option("--embeddings", pl.embeddings, "Embeddings file")
      ->required();
  cpipe->add_option("--mode", pl.mode, "Split mode: val or test")
      ->check(CLI::IsMember({"val", "test"}))
      ->capture_default_str();
  cpipe->add_option("--fraction", pl.fraction, "Fraction to mask")
      ->capture_default_str();
  cpipe->add_option("--methods", pl.methods, "Comma list of methods")
      ->capture_default_str();
  cpipe->add_option("--expansion", pl.expansion,
                    "Parent-ranking model: builtin, oracle, external-file")
      ->check(CLI::IsMember({"builtin", "oracle", "external-file"}))
      ->capture_default_str();
  cpipe->add_option("--affinity-file", pl.affinity_file,
                    "Affinity TSV for --expansion external-file");
  cpipe->add_option("--alpha", pl.alpha, "Similarity threshold or 'auto'")
      ->capture_default_str();
  cpipe->add_option("--hit-k", pl.hit_k, "Comma list of hit@k cutoffs")
      ->capture_default_str();
  cpipe->add_option("--seed", pl.seed, "Random seed")->capture_default_str();
  add_train_config_flags(cpipe, pl.cfg, pl.hidden);
  cpipe->add_option("--out", pl.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (cgen->parsed()) return run([&] { return cmd_gen(gen); });
  if (csplit->parsed()) return run([&] { return cmd_split(spl); });
  if (ctrain->parsed()) return run([&] { return cmd_train(tr); });
  if (csort->parsed()) return run([&] { return cmd_sort(so); });
  if (ceval->parsed()) return run([&] { return cmd_expand_eval(ev); });
  if (cpipe->parsed()) return run([&] { return cmd_pipeline(pl); });
  return 1;
}
