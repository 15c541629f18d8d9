#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "embspace/cluster.hpp"
#include "embspace/corpus.hpp"
#include "embspace/embed.hpp"
#include "embspace/graph.hpp"
#include "embspace/tendency.hpp"

namespace embspace::pipeline {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct GraphOptions {
  bool enabled = true;
  std::string threshold_mode = "same-label-mean";  // or "fixed"
  double threshold = 0.0;                          // used by "fixed"
  std::string scope = "all";                       // or "per-relation"
  std::uint64_t pair_cap = 100'000'000;
  double sample_fraction = 0.001;
  std::size_t hubs = 2;
  std::size_t neighbors_per_hub = 20;
  std::uint64_t seed = 42;
  bool export_edges = false;  // edge list + vertex table under out.dir
};

struct RunConfig {
  std::string corpus_path;
  bool strict_parse = false;
  std::vector<std::string> extractions = {"original", "span"};

  std::string embedder = "mean";  // mean | dct | gem | precomputed
  std::string word_vectors_path;
  std::string embedding_set_path;
  std::string oov = "skip";
  std::size_t dct_k = 2;
  embed::GemParams gem;

  std::size_t kmeans_k = 24;
  std::uint64_t kmeans_seed = 42;
  std::size_t kmeans_max_iter = 300;
  double kmeans_tol = 1e-4;

  tendency::SpatHistConfig tendency;

  GraphOptions graph;

  std::string out_dir;
  int threads = 0;
  std::string split;  // recorded in metadata, not interpreted

  // Every key is settable through this single path; the config file loader
  // and the command-line flags both funnel into it.
  void apply(const std::string& dotted_key, const std::string& value);
  void validate() const;
  nlohmann::ordered_json to_json() const;

  static const std::vector<std::string>& known_keys();
};

// Key/value format with [section] headers; keys become `section.key`.
RunConfig load_config(std::istream& in);

struct AnalysisReport {
  nlohmann::ordered_json metadata;
  std::vector<nlohmann::ordered_json> sections;  // one per extraction tag

  bool any_error() const;
};

AnalysisReport run_pipeline(const RunConfig& config);

// report.jsonl (one section per line) and summary.json under out_dir.
void write_report(const AnalysisReport& report, const std::string& out_dir);
AnalysisReport load_report(const std::string& report_path);

// tendency.tsv, metrics.tsv, scatter.tsv, hubs.jsonl under out_dir.
void emit_plot_data(const AnalysisReport& report, const std::string& out_dir);

}  // namespace embspace::pipeline
