#include "embspace/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "embspace/errors.hpp"
#include "embspace/parallel.hpp"

namespace embspace::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  throw ParameterError("config key " + key + " expects a boolean, got `" +
                       value + "`");
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config key " + key + " expects an integer, got `" +
                         value + "`");
  }
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config key " + key + " expects a number, got `" +
                         value + "`");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream stream(value);
  while (std::getline(stream, item, ',')) {
    // trim surrounding spaces
    const auto lo = item.find_first_not_of(" \t");
    const auto hi = item.find_last_not_of(" \t");
    if (lo == std::string::npos) continue;
    out.push_back(item.substr(lo, hi - lo + 1));
  }
  return out;
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "corpus.path") corpus_path = value;
  else if (key == "corpus.strict") strict_parse = parse_bool(value, key);
  else if (key == "extract.tags") extractions = split_list(value);
  else if (key == "embed.method") embedder = value;
  else if (key == "embed.word_vectors") word_vectors_path = value;
  else if (key == "embed.embedding_set") embedding_set_path = value;
  else if (key == "embed.oov") oov = value;
  else if (key == "embed.dct_k") dct_k = parse_u64(value, key);
  else if (key == "embed.gem.window_size") gem.window_size = parse_u64(value, key);
  else if (key == "embed.gem.corpus_components") gem.corpus_components = parse_u64(value, key);
  else if (key == "embed.gem.power") gem.power = parse_double(value, key);
  else if (key == "cluster.k") kmeans_k = parse_u64(value, key);
  else if (key == "cluster.seed") kmeans_seed = parse_u64(value, key);
  else if (key == "cluster.max_iter") kmeans_max_iter = parse_u64(value, key);
  else if (key == "cluster.tol") kmeans_tol = parse_double(value, key);
  else if (key == "tendency.bins") tendency.bins_per_dim = parse_u64(value, key);
  else if (key == "tendency.samples") tendency.samples = parse_u64(value, key);
  else if (key == "tendency.seed") tendency.seed = parse_u64(value, key);
  else if (key == "tendency.reduce_to") tendency.reduce_to = parse_u64(value, key);
  else if (key == "graph.enabled") graph.enabled = parse_bool(value, key);
  else if (key == "graph.threshold_mode") graph.threshold_mode = value;
  else if (key == "graph.threshold") graph.threshold = parse_double(value, key);
  else if (key == "graph.scope") graph.scope = value;
  else if (key == "graph.pair_cap") graph.pair_cap = parse_u64(value, key);
  else if (key == "graph.sample_fraction") graph.sample_fraction = parse_double(value, key);
  else if (key == "graph.hubs") graph.hubs = parse_u64(value, key);
  else if (key == "graph.neighbors_per_hub") graph.neighbors_per_hub = parse_u64(value, key);
  else if (key == "graph.seed") graph.seed = parse_u64(value, key);
  else if (key == "graph.export_edges") graph.export_edges = parse_bool(value, key);
  else if (key == "output.dir") out_dir = value;
  else if (key == "run.threads") threads = static_cast<int>(parse_u64(value, key));
  else if (key == "run.split") split = value;
  else {
    throw ParameterError("unknown config key: " + key);
  }
}

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "corpus.path", "corpus.strict", "extract.tags", "embed.method",
      "embed.word_vectors", "embed.embedding_set", "embed.oov", "embed.dct_k",
      "embed.gem.window_size", "embed.gem.corpus_components", "embed.gem.power",
      "cluster.k", "cluster.seed", "cluster.max_iter", "cluster.tol",
      "tendency.bins", "tendency.samples", "tendency.seed",
      "tendency.reduce_to", "graph.enabled", "graph.threshold_mode",
      "graph.threshold", "graph.scope", "graph.pair_cap",
      "graph.sample_fraction", "graph.hubs", "graph.neighbors_per_hub",
      "graph.seed", "graph.export_edges", "output.dir", "run.threads",
      "run.split"};
  return keys;
}

void RunConfig::validate() const {
  if (corpus_path.empty()) {
    throw ParameterError("corpus.path is required");
  }
  const bool precomputed = embedder == "precomputed";
  if (embedder != "mean" && embedder != "dct" && embedder != "gem" &&
      !precomputed) {
    throw ParameterError("embed.method must be mean, dct, gem or precomputed");
  }
  if (precomputed) {
    if (embedding_set_path.empty() || !word_vectors_path.empty()) {
      throw ParameterError(
          "precomputed embeddings need embed.embedding_set and no "
          "embed.word_vectors");
    }
    if (extractions.size() != 1) {
      throw ParameterError(
          "a precomputed embedding set covers exactly one extraction tag");
    }
  } else {
    if (word_vectors_path.empty() || !embedding_set_path.empty()) {
      throw ParameterError(
          "embedder `" + embedder +
          "` needs embed.word_vectors and no embed.embedding_set");
    }
  }
  if (oov != "skip" && oov != "zero") {
    throw ParameterError("embed.oov must be skip or zero");
  }
  if (extractions.empty()) {
    throw ParameterError("extract.tags must name at least one tag");
  }
  for (const auto& tag : extractions) {
    corpus::ExtractionTag::parse(tag);  // throws on a bad tag
  }
  if (kmeans_k < 1) throw ParameterError("cluster.k must be >= 1");
  if (graph.threshold_mode != "same-label-mean" &&
      graph.threshold_mode != "fixed") {
    throw ParameterError("graph.threshold_mode must be same-label-mean or fixed");
  }
  if (graph.scope != "all" && graph.scope != "per-relation") {
    throw ParameterError("graph.scope must be all or per-relation");
  }
  if (out_dir.empty()) throw ParameterError("output.dir is required");
}

nlohmann::ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["corpus.path"] = corpus_path;
  j["corpus.strict"] = strict_parse;
  j["extract.tags"] = extractions;
  j["embed.method"] = embedder;
  j["embed.word_vectors"] = word_vectors_path;
  j["embed.embedding_set"] = embedding_set_path;
  j["embed.oov"] = oov;
  j["embed.dct_k"] = dct_k;
  j["embed.gem.window_size"] = gem.window_size;
  j["embed.gem.corpus_components"] = gem.corpus_components;
  j["embed.gem.power"] = gem.power;
  j["cluster.k"] = kmeans_k;
  j["cluster.seed"] = kmeans_seed;
  j["cluster.max_iter"] = kmeans_max_iter;
  j["cluster.tol"] = kmeans_tol;
  j["tendency.bins"] = tendency.bins_per_dim;
  j["tendency.samples"] = tendency.samples;
  j["tendency.seed"] = tendency.seed;
  j["tendency.reduce_to"] = tendency.reduce_to;
  j["graph.enabled"] = graph.enabled;
  j["graph.threshold_mode"] = graph.threshold_mode;
  j["graph.threshold"] = graph.threshold;
  j["graph.scope"] = graph.scope;
  j["graph.pair_cap"] = graph.pair_cap;
  j["graph.sample_fraction"] = graph.sample_fraction;
  j["graph.hubs"] = graph.hubs;
  j["graph.neighbors_per_hub"] = graph.neighbors_per_hub;
  j["graph.seed"] = graph.seed;
  j["graph.export_edges"] = graph.export_edges;
  j["output.dir"] = out_dir;
  j["run.threads"] = threads;
  j["run.split"] = split;
  return j;
}

RunConfig load_config(std::istream& in) {
  RunConfig config;
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto lo = line.find_first_not_of(" \t");
    if (lo == std::string::npos) continue;
    const auto hi = line.find_last_not_of(" \t\r");
    std::string text = line.substr(lo, hi - lo + 1);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3) {
        throw FormatError("config line " + std::to_string(line_no) +
                          ": malformed section header");
      }
      section = text.substr(1, text.size() - 2);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) {
      throw FormatError("config line " + std::to_string(line_no) +
                        ": empty key");
    }
    config.apply(section.empty() ? key : section + "." + key, value);
  }
  return config;
}

bool AnalysisReport::any_error() const {
  return std::any_of(sections.begin(), sections.end(), [](const auto& s) {
    return s.contains("errors") && !s["errors"].empty();
  });
}

namespace {

ordered_json metrics_json(const cluster::EvaluationReport& m) {
  ordered_json j;
  j["purity"] = m.purity;
  j["f_measure"] = m.f_measure;
  j["rand_index"] = m.rand_index;
  j["homogeneity"] = m.homogeneity;
  j["mutual_information"] = m.mutual_information;
  j["completeness"] = m.completeness;
  j["v_measure"] = m.v_measure;
  j["fowlkes_mallows"] = m.fowlkes_mallows;
  j["variants"] = ordered_json{{"f_measure", "pairwise_f1"},
                               {"rand_index", "unadjusted"},
                               {"mutual_information", "raw_nats"}};
  return j;
}

ordered_json tendency_json(const tendency::SpatHistResult& r) {
  ordered_json j;
  j["mean_kl"] = r.mean_kl;
  j["std_kl"] = r.std_kl;
  j["t"] = r.t;
  j["b"] = r.b;
  return j;
}

ordered_json graph_json(const graph::GraphReport& r,
                        const graph::ThresholdEstimate& threshold) {
  ordered_json j;
  j["threshold"] = threshold.value;
  j["threshold_exact"] = threshold.exact;
  j["threshold_pairs"] = threshold.pairs_used;
  j["vertex_count"] = r.vertex_count;
  j["edge_count"] = r.edge_count;
  j["density"] = r.density;
  ordered_json degrees = ordered_json::array();
  for (const auto& [deg, count] : r.degrees.counts) {
    degrees.push_back(ordered_json::array({deg, count}));
  }
  j["degree_histogram"] = std::move(degrees);
  j["max_degree"] = r.degrees.max_degree;
  j["count_at_max_degree"] = r.degrees.count_at_max;
  ordered_json sizes = ordered_json::array();
  for (const auto& [id, size] : r.component_sizes) {
    sizes.push_back(ordered_json::array({id, size}));
  }
  j["component_sizes"] = std::move(sizes);
  ordered_json comps = ordered_json::array();
  for (const auto& c : r.top_components) {
    ordered_json cj;
    cj["id"] = c.id;
    cj["size"] = c.size;
    cj["density"] = c.density;
    cj["labels"] = c.labels;
    comps.push_back(std::move(cj));
  }
  j["top_components"] = std::move(comps);
  ordered_json dists = ordered_json::array();
  for (const auto& [dist, count] : r.sampled_distances.counts) {
    dists.push_back(ordered_json::array({dist, count}));
  }
  j["sampled_distances"] = std::move(dists);
  j["sampled_sources"] = r.sampled_distances.sources;
  j["unreachable_pairs"] = r.sampled_distances.unreachable;
  j["hub_neighborhood_density"] = r.hub.density;
  return j;
}

ordered_json hub_nodes_json(const graph::HubNeighborhood& hood,
                            const graph::SimilarityGraph& g,
                            std::span<const std::string> labels_by_row) {
  ordered_json nodes = ordered_json::array();
  for (std::uint32_t v : hood.vertices) {
    ordered_json node;
    node["id"] = v;
    const std::uint32_t row = g.vertex_rows[v];
    node["label"] = row < labels_by_row.size() ? labels_by_row[row] : "";
    node["degree"] = g.degree(v);
    node["hub"] = std::binary_search(hood.hubs.begin(), hood.hubs.end(), v);
    nodes.push_back(std::move(node));
  }
  ordered_json links = ordered_json::array();
  for (const auto& [u, v] : hood.edges) {
    links.push_back(ordered_json{{"source", u}, {"target", v}});
  }
  return ordered_json{{"nodes", std::move(nodes)}, {"links", std::move(links)}};
}

struct PreparedInputs {
  std::vector<corpus::TokenizedSentence> sentences;
  embed::WordVectorTable table;
  embed::EmbeddingSet precomputed;
  std::unordered_map<std::string, std::string> id_to_label;
};

embed::EmbeddingSet embed_sub_sentences(
    const std::vector<corpus::SubSentence>& subs, const RunConfig& config,
    const embed::WordVectorTable& table, const std::string& tag) {
  const std::size_t n = subs.size();
  std::vector<std::string> ids(n);
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = subs[i].source_id + "|" + subs[i].method;
    labels[i] = subs[i].relation;
  }

  if (config.embedder == "gem") {
    std::vector<std::vector<std::string>> token_lists(n);
    for (std::size_t i = 0; i < n; ++i) token_lists[i] = subs[i].tokens;
    embed::EmbeddingSet set =
        embed::embed_gem(token_lists, table, config.gem, std::move(ids),
                         std::move(labels), config.threads);
    set.provenance += "+" + tag;
    return set;
  }

  embed::EmbeddingSet set;
  const std::size_t d =
      config.embedder == "dct" ? config.dct_k * table.dimension()
                               : table.dimension();
  set.vectors = linalg::Matrix(n, d);
  parallel_for(n, config.threads, [&](std::size_t i) {
    std::vector<double> v;
    try {
      v = config.embedder == "dct"
              ? embed::embed_dct(subs[i].tokens, table, config.dct_k)
              : embed::embed_mean(subs[i].tokens, table);
    } catch (const EmptyEmbeddingError&) {
      throw EmptyEmbeddingError("sentence " + ids[i] +
                                " has no resolvable token");
    }
    std::copy(v.begin(), v.end(), set.vectors.row(i).begin());
  });
  set.ids = std::move(ids);
  set.labels = std::move(labels);
  set.provenance = config.embedder +
                   (config.embedder == "dct"
                        ? "(k=" + std::to_string(config.dct_k) + ")"
                        : "") +
                   "+" + tag;
  return set;
}

ordered_json run_section(const RunConfig& config, const PreparedInputs& inputs,
                         const corpus::ExtractionTag& tag) {
  ordered_json section;
  section["extraction"] = tag.str();
  std::vector<std::string> errors;
  std::vector<std::string> skips;

  embed::EmbeddingSet set;
  bool have_embeddings = false;
  try {
    if (config.embedder == "precomputed") {
      set = inputs.precomputed;
      embed::join_labels(set, inputs.id_to_label);
      set.provenance = "precomputed+" + tag.str();
    } else {
      std::vector<corpus::SubSentence> subs;
      subs.reserve(inputs.sentences.size());
      for (const auto& s : inputs.sentences) {
        subs.push_back(corpus::extract(s, tag));
      }
      set = embed_sub_sentences(subs, config, inputs.table, tag.str());
    }
    have_embeddings = true;
  } catch (const std::exception& e) {
    errors.push_back(std::string("embedding: ") + e.what());
  }

  if (have_embeddings) {
    section["provenance"] = set.provenance;
    section["n"] = set.size();
    section["dimension"] = set.dimension();

    try {
      section["tendency"] =
          tendency_json(tendency::spatial_histogram(set, config.tendency,
                                                    config.threads));
    } catch (const std::exception& e) {
      errors.push_back(std::string("tendency: ") + e.what());
    }

    const std::set<std::string> distinct(set.labels.begin(), set.labels.end());
    if (distinct.size() < 2) {
      skips.push_back(
          "clustering-evaluation: label set has fewer than 2 labels");
    } else {
      try {
        const cluster::ClusterAssignment assignment =
            cluster::kmeans(set, config.kmeans_k, config.kmeans_seed,
                            config.kmeans_max_iter, config.kmeans_tol,
                            config.threads);
        const cluster::ContingencyTable table =
            cluster::contingency(assignment, set.labels);
        ordered_json cj;
        cj["k"] = assignment.k;
        cj["seed"] = config.kmeans_seed;
        cj["iterations"] = assignment.iterations;
        cj["inertia"] = assignment.inertia;
        cj["metrics"] = metrics_json(cluster::evaluate(table));
        section["clustering"] = std::move(cj);
      } catch (const std::exception& e) {
        errors.push_back(std::string("clustering: ") + e.what());
      }
    }

    if (!config.graph.enabled) {
      skips.push_back("graph: disabled by configuration");
    } else {
      try {
        graph::ThresholdEstimate threshold;
        if (config.graph.threshold_mode == "fixed") {
          threshold.value = config.graph.threshold;
          threshold.exact = true;
          threshold.pairs_used = 0;
        } else {
          threshold = graph::same_label_mean_distance(
              set, config.graph.pair_cap, config.graph.seed,
              config.graph.scope == "per-relation"
                  ? graph::ThresholdScope::per_relation_mean
                  : graph::ThresholdScope::all_relations,
              config.threads);
        }
        const graph::SimilarityGraph g =
            graph::build_sesg(set, threshold.value, config.threads);
        graph::AnalyzeOptions options;
        options.sample_fraction = config.graph.sample_fraction;
        options.seed = config.graph.seed;
        options.n_hubs = config.graph.hubs;
        options.neighbors_per_hub = config.graph.neighbors_per_hub;
        options.threads = config.threads;
        const graph::GraphReport gr = graph::analyze(g, set.labels, options);
        section["graph"] = graph_json(gr, threshold);
        if (gr.vertex_count > 0) {
          section["graph"]["hub_graph"] =
              hub_nodes_json(gr.hub, g, set.labels);
        }
        if (config.graph.export_edges) {
          const fs::path dir(config.out_dir);
          std::ofstream edges(dir / ("edges-" + tag.str() + ".tsv"));
          graph::write_edge_list(g, edges);
          std::ofstream vertices(dir / ("vertices-" + tag.str() + ".tsv"));
          graph::write_vertex_table(g, set.labels, vertices);
        }
      } catch (const std::exception& e) {
        errors.push_back(std::string("graph: ") + e.what());
      }
    }

    try {
      const std::size_t target = std::min<std::size_t>(2, set.dimension());
      const linalg::PcaResult pca = linalg::pca_project(set.vectors, target);
      ordered_json scatter = ordered_json::array();
      for (std::size_t i = 0; i < set.size(); ++i) {
        scatter.push_back(ordered_json::array(
            {set.ids[i], set.labels[i], pca.projected(i, 0),
             target > 1 ? pca.projected(i, 1) : 0.0}));
      }
      section["scatter"] = std::move(scatter);
    } catch (const std::exception& e) {
      errors.push_back(std::string("scatter: ") + e.what());
    }
  }

  section["errors"] = errors;
  section["skips"] = skips;
  return section;
}

}  // namespace

AnalysisReport run_pipeline(const RunConfig& config) {
  config.validate();

  PreparedInputs inputs;
  {
    std::ifstream in(config.corpus_path);
    if (!in) throw IoError("cannot open corpus: " + config.corpus_path);
    corpus::ParseResult parsed = corpus::parse_corpus(in, config.strict_parse);
    inputs.sentences = std::move(parsed.sentences);
    if (inputs.sentences.empty()) {
      throw EmptyInputError("corpus has no valid sentences: " +
                            config.corpus_path);
    }
    for (const auto& s : inputs.sentences) {
      inputs.id_to_label.emplace(s.id, s.relation);
    }
  }
  if (config.embedder == "precomputed") {
    std::ifstream in(config.embedding_set_path, std::ios::binary);
    if (!in) {
      throw IoError("cannot open embedding set: " + config.embedding_set_path);
    }
    inputs.precomputed = embed::load_embedding_set(in);
  } else {
    std::ifstream in(config.word_vectors_path);
    if (!in) {
      throw IoError("cannot open word vectors: " + config.word_vectors_path);
    }
    inputs.table = embed::load_word_vectors(in);
    inputs.table.oov_policy =
        config.oov == "zero" ? embed::OovPolicy::zero : embed::OovPolicy::skip;
  }

  fs::create_directories(config.out_dir);

  AnalysisReport report;
  report.metadata["toolkit"] = "embspace";
  report.metadata["version"] = kToolkitVersion;
  report.metadata["config"] = config.to_json();
  for (const auto& tag_text : config.extractions) {
    const corpus::ExtractionTag tag = corpus::ExtractionTag::parse(tag_text);
    report.sections.push_back(run_section(config, inputs, tag));
  }
  return report;
}

void write_report(const AnalysisReport& report, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  {
    std::ofstream out(dir / "report.jsonl");
    if (!out) throw IoError("cannot write report.jsonl under " + out_dir);
    for (const auto& section : report.sections) {
      out << section.dump() << "\n";
    }
  }
  {
    ordered_json summary = report.metadata;
    ordered_json sections = ordered_json::array();
    std::size_t errors_total = 0;
    for (const auto& section : report.sections) {
      ordered_json s;
      s["extraction"] = section.value("extraction", "");
      const std::size_t errs =
          section.contains("errors") ? section["errors"].size() : 0;
      const std::size_t skips =
          section.contains("skips") ? section["skips"].size() : 0;
      s["status"] = errs > 0 ? "error" : (skips > 0 ? "partial" : "ok");
      s["errors"] = section.contains("errors") ? section["errors"]
                                               : ordered_json::array();
      s["skips"] =
          section.contains("skips") ? section["skips"] : ordered_json::array();
      sections.push_back(std::move(s));
      errors_total += errs;
    }
    summary["sections"] = std::move(sections);
    summary["errors_total"] = errors_total;
    std::ofstream out(dir / "summary.json");
    if (!out) throw IoError("cannot write summary.json under " + out_dir);
    out << summary.dump(2) << "\n";
  }
}

AnalysisReport load_report(const std::string& report_path) {
  std::ifstream in(report_path);
  if (!in) throw IoError("cannot open report: " + report_path);
  AnalysisReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      report.sections.push_back(ordered_json::parse(line));
    } catch (const std::exception& e) {
      throw FormatError("report line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return report;
}

namespace {

// TSV cells use round-trip double formatting so re-emission is stable.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void emit_plot_data(const AnalysisReport& report, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  std::ofstream tendency_out(dir / "tendency.tsv");
  tendency_out << "extraction\tmean_kl\tstd_kl\tt\tb\n";
  std::ofstream metrics_out(dir / "metrics.tsv");
  metrics_out << "extraction\tpurity\tf_measure\trand_index\thomogeneity\t"
                 "mutual_information\tcompleteness\tv_measure\t"
                 "fowlkes_mallows\n";
  std::ofstream scatter_out(dir / "scatter.tsv");
  scatter_out << "extraction\tid\tlabel\tx\ty\n";
  std::ofstream hubs_out(dir / "hubs.jsonl");
  if (!tendency_out || !metrics_out || !scatter_out || !hubs_out) {
    throw IoError("cannot write plot data under " + out_dir);
  }

  for (const auto& section : report.sections) {
    const std::string tag = section.value("extraction", "");
    if (section.contains("tendency")) {
      const auto& t = section["tendency"];
      tendency_out << tag << "\t" << fmt(t["mean_kl"].get<double>()) << "\t"
                   << fmt(t["std_kl"].get<double>()) << "\t"
                   << t["t"].get<std::uint64_t>() << "\t"
                   << t["b"].get<std::uint64_t>() << "\n";
    }
    if (section.contains("clustering") &&
        section["clustering"].contains("metrics")) {
      const auto& m = section["clustering"]["metrics"];
      metrics_out << tag;
      for (const char* name :
           {"purity", "f_measure", "rand_index", "homogeneity",
            "mutual_information", "completeness", "v_measure",
            "fowlkes_mallows"}) {
        metrics_out << "\t" << fmt(m[name].get<double>());
      }
      metrics_out << "\n";
    }
    if (section.contains("scatter")) {
      for (const auto& point : section["scatter"]) {
        scatter_out << tag << "\t" << point[0].get<std::string>() << "\t"
                    << point[1].get<std::string>() << "\t"
                    << fmt(point[2].get<double>()) << "\t"
                    << fmt(point[3].get<double>()) << "\n";
      }
    }
    if (section.contains("graph") && section["graph"].contains("hub_graph")) {
      const auto& hub_graph = section["graph"]["hub_graph"];
      for (const auto& node : hub_graph["nodes"]) {
        ordered_json rec;
        rec["extraction"] = tag;
        rec["type"] = "node";
        rec["id"] = node["id"];
        rec["label"] = node["label"];
        rec["degree"] = node["degree"];
        rec["hub"] = node["hub"];
        hubs_out << rec.dump() << "\n";
      }
      for (const auto& link : hub_graph["links"]) {
        ordered_json rec;
        rec["extraction"] = tag;
        rec["type"] = "link";
        rec["source"] = link["source"];
        rec["target"] = link["target"];
        hubs_out << rec.dump() << "\n";
      }
    }
  }
}

}  // namespace embspace::pipeline
