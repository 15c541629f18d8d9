// Command-line front end: extract | embed | tendency | cluster-eval | graph |
// run | export-plots. `run` drives the full pipeline from a config file with
// every key overridable by a flag of the same dotted name.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "embspace/cluster.hpp"
#include "embspace/corpus.hpp"
#include "embspace/embed.hpp"
#include "embspace/errors.hpp"
#include "embspace/graph.hpp"
#include "embspace/pipeline.hpp"
#include "embspace/tendency.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw embspace::IoError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw embspace::IoError("cannot write " + path);
  return out;
}

embspace::embed::WordVectorTable load_vectors(const std::string& path,
                                              const std::string& oov) {
  auto in = open_input(path);
  std::vector<std::string> warnings;
  auto table = embspace::embed::load_word_vectors(in, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  table.oov_policy = oov == "zero" ? embspace::embed::OovPolicy::zero
                                   : embspace::embed::OovPolicy::skip;
  return table;
}

std::unordered_map<std::string, std::string> label_map_from(
    const std::string& path) {
  auto in = open_input(path);
  const auto parsed = embspace::corpus::parse_token_records(in);
  std::unordered_map<std::string, std::string> map;
  for (const auto& r : parsed.records) map.emplace(r.id, r.relation);
  return map;
}

int cmd_extract(const std::string& corpus_path, const std::string& tags_text,
                const std::string& out_path, bool strict) {
  auto in = open_input(corpus_path);
  const auto parsed = embspace::corpus::parse_corpus(in, strict);
  for (const auto& issue : parsed.issues) {
    std::cerr << "line " << issue.line << " skipped: " << issue.message
              << "\n";
  }
  std::vector<embspace::corpus::ExtractionTag> tags;
  if (tags_text == "all") {
    tags = embspace::corpus::ExtractionTag::all();
  } else {
    std::istringstream stream(tags_text);
    std::string item;
    while (std::getline(stream, item, ',')) {
      if (!item.empty()) {
        tags.push_back(embspace::corpus::ExtractionTag::parse(item));
      }
    }
  }
  if (tags.empty()) throw embspace::ParameterError("no extraction tags given");

  std::vector<embspace::corpus::SubSentence> subs;
  subs.reserve(parsed.sentences.size() * tags.size());
  for (const auto& tag : tags) {
    for (const auto& s : parsed.sentences) {
      subs.push_back(embspace::corpus::extract(s, tag));
    }
  }
  if (out_path == "-") {
    embspace::corpus::write_sub_sentences(subs, std::cout);
  } else {
    auto out = open_output(out_path);
    embspace::corpus::write_sub_sentences(subs, out);
  }
  std::cerr << subs.size() << " sub-sentences from " << parsed.sentences.size()
            << " sentences\n";
  return 0;
}

int cmd_embed(const std::string& input_path, const std::string& vectors_path,
              const std::string& method, std::size_t k,
              const embspace::embed::GemParams& gem, const std::string& oov,
              const std::string& out_path, int threads) {
  auto in = open_input(input_path);
  const auto parsed = embspace::corpus::parse_token_records(in);
  if (parsed.records.empty()) {
    throw embspace::EmptyInputError("no records in " + input_path);
  }
  const auto table = load_vectors(vectors_path, oov);

  embspace::embed::EmbeddingSet set;
  const std::size_t n = parsed.records.size();
  if (method == "gem") {
    std::vector<std::vector<std::string>> tokens(n);
    std::vector<std::string> ids(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      tokens[i] = parsed.records[i].tokens;
      ids[i] = parsed.records[i].id;
      labels[i] = parsed.records[i].relation;
    }
    set = embspace::embed::embed_gem(tokens, table, gem, std::move(ids),
                                     std::move(labels), threads);
  } else if (method == "mean" || method == "dct") {
    const std::size_t d =
        method == "dct" ? k * table.dimension() : table.dimension();
    set.vectors = embspace::linalg::Matrix(n, d);
    set.ids.resize(n);
    set.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& rec = parsed.records[i];
      const auto v = method == "dct"
                         ? embspace::embed::embed_dct(rec.tokens, table, k)
                         : embspace::embed::embed_mean(rec.tokens, table);
      std::copy(v.begin(), v.end(), set.vectors.row(i).begin());
      set.ids[i] = rec.id;
      set.labels[i] = rec.relation;
    }
    set.provenance = method;
  } else {
    throw embspace::ParameterError("embed method must be mean, dct or gem");
  }

  auto out = open_output(out_path, true);
  embspace::embed::save_embedding_set(set, out);
  std::cerr << "wrote " << set.size() << " x " << set.dimension()
            << " embeddings to " << out_path << "\n";
  return 0;
}

int cmd_tendency(const std::string& emb_path,
                 const embspace::tendency::SpatHistConfig& config,
                 int threads) {
  auto in = open_input(emb_path, true);
  const auto set = embspace::embed::load_embedding_set(in);
  const auto result = embspace::tendency::spatial_histogram(set, config, threads);
  ordered_json j;
  j["mean_kl"] = result.mean_kl;
  j["std_kl"] = result.std_kl;
  j["t"] = result.t;
  j["b"] = result.b;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_cluster_eval(const std::string& emb_path, const std::string& labels_path,
                     std::size_t k, std::uint64_t seed, std::size_t max_iter,
                     double tol, int threads) {
  auto in = open_input(emb_path, true);
  auto set = embspace::embed::load_embedding_set(in);
  embspace::embed::join_labels(set, label_map_from(labels_path));
  const auto assignment =
      embspace::cluster::kmeans(set, k, seed, max_iter, tol, threads);
  const auto table = embspace::cluster::contingency(assignment, set.labels);
  const auto metrics = embspace::cluster::evaluate(table);
  ordered_json j;
  j["k"] = assignment.k;
  j["seed"] = seed;
  j["iterations"] = assignment.iterations;
  j["inertia"] = assignment.inertia;
  j["purity"] = metrics.purity;
  j["f_measure"] = metrics.f_measure;
  j["rand_index"] = metrics.rand_index;
  j["homogeneity"] = metrics.homogeneity;
  j["mutual_information"] = metrics.mutual_information;
  j["completeness"] = metrics.completeness;
  j["v_measure"] = metrics.v_measure;
  j["fowlkes_mallows"] = metrics.fowlkes_mallows;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_graph(const std::string& emb_path, const std::string& labels_path,
              const std::string& threshold_text, std::uint64_t pair_cap,
              const std::string& scope, double fraction, std::size_t hubs,
              std::size_t neighbors_per_hub, std::uint64_t seed,
              const std::string& out_dir, int threads) {
  auto in = open_input(emb_path, true);
  auto set = embspace::embed::load_embedding_set(in);
  if (!labels_path.empty()) {
    embspace::embed::join_labels(set, label_map_from(labels_path));
  }

  embspace::graph::ThresholdEstimate threshold;
  if (threshold_text == "auto") {
    threshold = embspace::graph::same_label_mean_distance(
        set, pair_cap, seed,
        scope == "per-relation"
            ? embspace::graph::ThresholdScope::per_relation_mean
            : embspace::graph::ThresholdScope::all_relations,
        threads);
  } else {
    threshold.value = std::stod(threshold_text);
    threshold.pairs_used = 0;
  }

  const auto g = embspace::graph::build_sesg(set, threshold.value, threads);
  embspace::graph::AnalyzeOptions options;
  options.sample_fraction = fraction;
  options.seed = seed;
  options.n_hubs = hubs;
  options.neighbors_per_hub = neighbors_per_hub;
  options.threads = threads;
  const auto report = embspace::graph::analyze(g, set.labels, options);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    auto edges = open_output((fs::path(out_dir) / "edges.tsv").string());
    embspace::graph::write_edge_list(g, edges);
    auto vertices = open_output((fs::path(out_dir) / "vertices.tsv").string());
    embspace::graph::write_vertex_table(g, set.labels, vertices);
    if (report.vertex_count > 0) {
      auto hubs_out = open_output((fs::path(out_dir) / "hubs.jsonl").string());
      embspace::graph::write_node_link(report.hub, g, set.labels, hubs_out);
    }
  }

  ordered_json j;
  j["threshold"] = threshold.value;
  j["threshold_exact"] = threshold.exact;
  j["vertex_count"] = report.vertex_count;
  j["edge_count"] = report.edge_count;
  j["density"] = report.density;
  j["max_degree"] = report.degrees.max_degree;
  j["count_at_max_degree"] = report.degrees.count_at_max;
  j["components"] = report.component_sizes.size();
  if (!report.component_sizes.empty()) {
    j["largest_component_size"] = report.component_sizes.front().second;
  }
  if (!report.top_components.empty()) {
    j["largest_component_density"] = report.top_components.front().density;
    j["largest_component_labels"] = report.top_components.front().labels;
  }
  ordered_json dists = ordered_json::array();
  for (const auto& [d, c] : report.sampled_distances.counts) {
    dists.push_back(ordered_json::array({d, c}));
  }
  j["sampled_distances"] = std::move(dists);
  j["hub_neighborhood_density"] = report.hub.density;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embspace: clustering and network analysis of sentence and "
               "sub-sentence embedding spaces"};
  app.set_version_flag("--version", embspace::pipeline::kToolkitVersion);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (0 = hardware); never changes results");

  // extract
  auto* extract = app.add_subcommand("extract", "extract sub-sentences");
  std::string corpus_path, tags = "span", out_path = "-";
  bool strict = false;
  extract->add_option("--corpus", corpus_path, "corpus jsonl")->required();
  extract->add_option("--tags", tags, "comma list of tags, or `all`");
  extract->add_option("--out", out_path, "output path (- for stdout)");
  extract->add_flag("--strict", strict, "abort on the first malformed line");

  // embed
  auto* embed = app.add_subcommand("embed", "embed token records");
  std::string embed_input, embed_vectors, embed_method = "mean",
              embed_oov = "skip", embed_out;
  std::size_t dct_k = 2;
  embspace::embed::GemParams gem;
  embed->add_option("--input", embed_input, "corpus or sub-sentence jsonl")
      ->required();
  embed->add_option("--word-vectors", embed_vectors, "GloVe-style text file")
      ->required();
  embed->add_option("--method", embed_method, "mean | dct | gem");
  embed->add_option("--k", dct_k, "DCT coefficients kept");
  embed->add_option("--oov", embed_oov, "skip | zero");
  embed->add_option("--gem-window", gem.window_size, "GEM context window");
  embed->add_option("--gem-components", gem.corpus_components,
                    "GEM corpus components removed");
  embed->add_option("--gem-power", gem.power, "GEM singular value exponent");
  embed->add_option("--out", embed_out, "output embedding set")->required();

  // tendency
  auto* tendency_cmd = app.add_subcommand("tendency", "spatial histogram");
  std::string tendency_emb;
  embspace::tendency::SpatHistConfig spat;
  tendency_cmd->add_option("--embeddings", tendency_emb, "embedding set file")
      ->required();
  tendency_cmd->add_option("--bins", spat.bins_per_dim, "bins per dimension");
  tendency_cmd->add_option("--samples", spat.samples, "uniform samples t");
  tendency_cmd->add_option("--seed", spat.seed, "sample seed");
  tendency_cmd->add_option("--reduce-to", spat.reduce_to, "PCA target dims");

  // cluster-eval
  auto* cluster_cmd =
      app.add_subcommand("cluster-eval", "k-means + the eight metrics");
  std::string cluster_emb, cluster_labels;
  std::size_t cluster_k = 24, cluster_max_iter = 300;
  std::uint64_t cluster_seed = 42;
  double cluster_tol = 1e-4;
  cluster_cmd->add_option("--embeddings", cluster_emb, "embedding set file")
      ->required();
  cluster_cmd
      ->add_option("--labels-from", cluster_labels,
                   "corpus/sub-sentence jsonl for the id -> label join")
      ->required();
  cluster_cmd->add_option("--k", cluster_k, "cluster count");
  cluster_cmd->add_option("--seed", cluster_seed, "k-means++ seed");
  cluster_cmd->add_option("--max-iter", cluster_max_iter, "Lloyd iterations");
  cluster_cmd->add_option("--tol", cluster_tol, "centroid shift tolerance");

  // graph
  auto* graph_cmd = app.add_subcommand("graph", "similarity graph analyses");
  std::string graph_emb, graph_labels, graph_threshold = "auto",
              graph_scope = "all", graph_out;
  std::uint64_t graph_pair_cap = 100'000'000, graph_seed = 42;
  double graph_fraction = 0.001;
  std::size_t graph_hubs = 2, graph_neighbors = 20;
  graph_cmd->add_option("--embeddings", graph_emb, "embedding set file")
      ->required();
  graph_cmd->add_option("--labels-from", graph_labels,
                        "corpus/sub-sentence jsonl for labels");
  graph_cmd->add_option("--threshold", graph_threshold,
                        "`auto` (same-label mean) or a number");
  graph_cmd->add_option("--pair-cap", graph_pair_cap,
                        "exact pairs before sampling kicks in");
  graph_cmd->add_option("--scope", graph_scope, "all | per-relation");
  graph_cmd->add_option("--fraction", graph_fraction, "BFS source fraction");
  graph_cmd->add_option("--hubs", graph_hubs, "hub count");
  graph_cmd->add_option("--neighbors-per-hub", graph_neighbors,
                        "sampled neighbors per hub");
  graph_cmd->add_option("--seed", graph_seed, "sampling seed");
  graph_cmd->add_option("--out-dir", graph_out,
                        "directory for edge/vertex/hub exports");

  // run
  auto* run_cmd = app.add_subcommand("run", "full pipeline from a config");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "config file");
  std::unordered_map<std::string, std::string> overrides;
  for (const auto& key : embspace::pipeline::RunConfig::known_keys()) {
    run_cmd->add_option_function<std::string>(
        "--" + key,
        [&overrides, key](const std::string& value) { overrides[key] = value; },
        "override config key " + key);
  }

  // export-plots
  auto* export_cmd =
      app.add_subcommand("export-plots", "plot tables from report.jsonl");
  std::string report_path, export_dir;
  export_cmd->add_option("--report", report_path, "report.jsonl path")
      ->required();
  export_cmd->add_option("--out-dir", export_dir, "output directory")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) return cmd_extract(corpus_path, tags, out_path, strict);
    if (*embed) {
      return cmd_embed(embed_input, embed_vectors, embed_method, dct_k, gem,
                       embed_oov, embed_out, threads);
    }
    if (*tendency_cmd) return cmd_tendency(tendency_emb, spat, threads);
    if (*cluster_cmd) {
      return cmd_cluster_eval(cluster_emb, cluster_labels, cluster_k,
                              cluster_seed, cluster_max_iter, cluster_tol,
                              threads);
    }
    if (*graph_cmd) {
      return cmd_graph(graph_emb, graph_labels, graph_threshold,
                       graph_pair_cap, graph_scope, graph_fraction, graph_hubs,
                       graph_neighbors, graph_seed, graph_out, threads);
    }
    if (*run_cmd) {
      embspace::pipeline::RunConfig config;
      if (!config_path.empty()) {
        auto in = open_input(config_path);
        config = embspace::pipeline::load_config(in);
      }
      for (const auto& key : embspace::pipeline::RunConfig::known_keys()) {
        const auto it = overrides.find(key);
        if (it != overrides.end()) config.apply(key, it->second);
      }
      if (threads > 0) config.threads = threads;
      const auto report = embspace::pipeline::run_pipeline(config);
      embspace::pipeline::write_report(report, config.out_dir);
      embspace::pipeline::emit_plot_data(report, config.out_dir);
      for (const auto& section : report.sections) {
        for (const auto& err : section["errors"]) {
          std::cerr << section["extraction"].get<std::string>() << ": "
                    << err.get<std::string>() << "\n";
        }
      }
      return report.any_error() ? 1 : 0;
    }
    if (*export_cmd) {
      const auto report = embspace::pipeline::load_report(report_path);
      embspace::pipeline::emit_plot_data(report, export_dir);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
