#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "embspace/errors.hpp"
#include "embspace/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace embspace;
using pipeline::AnalysisReport;
using pipeline::RunConfig;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

RunConfig planted_config(const fixtures::PlantedCorpus& planted,
                         const fs::path& out_dir) {
  RunConfig config;
  config.corpus_path = planted.corpus_path;
  config.word_vectors_path = planted.vectors_path;
  config.embedder = "mean";
  config.extractions = {"original", "span"};
  config.kmeans_k = 3;
  config.tendency.samples = 40;
  config.graph.sample_fraction = 0.01;
  config.out_dir = out_dir.string();
  return config;
}

const nlohmann::ordered_json* find_section(const AnalysisReport& report,
                                           const std::string& tag) {
  for (const auto& section : report.sections) {
    if (section.value("extraction", "") == tag) return &section;
  }
  return nullptr;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config file parsing with sections and overrides") {
  std::istringstream in(
      "# run settings\n"
      "[corpus]\n"
      "path = data/corpus.jsonl\n"
      "[embed]\n"
      "method = dct\n"
      "dct_k = 3\n"
      "word_vectors = vectors.txt\n"
      "[extract]\n"
      "tags = original, span, spanBA2\n"
      "[cluster]\n"
      "k = 24\n"
      "seed = 7\n"
      "[tendency]\n"
      "bins = 4\n"
      "[graph]\n"
      "enabled = true\n"
      "pair_cap = 1000\n"
      "[output]\n"
      "dir = out\n");
  RunConfig config = pipeline::load_config(in);
  CHECK(config.corpus_path == "data/corpus.jsonl");
  CHECK(config.embedder == "dct");
  CHECK(config.dct_k == 3);
  CHECK(config.extractions ==
        std::vector<std::string>{"original", "span", "spanBA2"});
  CHECK(config.kmeans_seed == 7);
  CHECK(config.tendency.bins_per_dim == 4);
  CHECK(config.graph.pair_cap == 1000);
  CHECK(config.out_dir == "out");

  config.apply("cluster.k", "5");
  CHECK(config.kmeans_k == 5);
  CHECK_THROWS_AS(config.apply("bogus.key", "1"), ParameterError);
  CHECK_THROWS_AS(config.apply("cluster.k", "abc"), ParameterError);
  CHECK_THROWS_AS(config.apply("graph.enabled", "maybe"), ParameterError);

  // Echo covers every known key.
  const auto echo = config.to_json();
  for (const auto& key : RunConfig::known_keys()) {
    CHECK(echo.contains(key));
  }
}

TEST_CASE("config validation") {
  RunConfig config;
  config.out_dir = "out";
  CHECK_THROWS_AS(config.validate(), ParameterError);  // no corpus

  config.corpus_path = "corpus.jsonl";
  CHECK_THROWS_AS(config.validate(), ParameterError);  // no vectors

  config.word_vectors_path = "vectors.txt";
  CHECK_NOTHROW(config.validate());

  config.embedding_set_path = "set.emb";
  CHECK_THROWS_AS(config.validate(), ParameterError);  // two sources

  config.word_vectors_path.clear();
  config.embedder = "precomputed";
  CHECK_THROWS_AS(config.validate(), ParameterError);  // two tags

  config.extractions = {"original"};
  CHECK_NOTHROW(config.validate());

  config.extractions = {"notatag"};
  CHECK_THROWS_AS(config.validate(), ParameterError);
}

TEST_CASE("planted corpus: span clusters better than originals") {
  const auto dir = fixtures::fresh_temp_dir("pipeline-planted");
  const auto planted = fixtures::write_planted_corpus(dir / "data");
  const RunConfig config = planted_config(planted, dir / "out");

  const AnalysisReport report = pipeline::run_pipeline(config);
  CHECK_FALSE(report.any_error());
  REQUIRE(report.sections.size() == 2);

  const auto* original = find_section(report, "original");
  const auto* span = find_section(report, "span");
  REQUIRE(original != nullptr);
  REQUIRE(span != nullptr);

  for (const auto* section : {original, span}) {
    CHECK(section->contains("tendency"));
    CHECK(section->contains("clustering"));
    CHECK(section->contains("graph"));
    CHECK(section->contains("scatter"));
    CHECK((*section)["errors"].empty());
    CHECK((*section)["n"] == planted.sentences);
  }

  const double span_h =
      (*span)["clustering"]["metrics"]["homogeneity"].get<double>();
  const double original_h =
      (*original)["clustering"]["metrics"]["homogeneity"].get<double>();
  CHECK(span_h > original_h);
  CHECK(span_h > 0.9);  // the planted span tokens are relation-pure

  // Tendency follows the same ordering on this fixture.
  const double span_kl = (*span)["tendency"]["mean_kl"].get<double>();
  CHECK(span_kl > 0.0);

  fs::remove_all(dir);
}

TEST_CASE("pipeline reports and plot exports are deterministic") {
  const auto dir = fixtures::fresh_temp_dir("pipeline-determinism");
  const auto planted = fixtures::write_planted_corpus(dir / "data", 60);
  RunConfig config = planted_config(planted, dir / "out");
  config.tendency.samples = 20;

  // Identical config both times; only the write target differs.
  const AnalysisReport first = pipeline::run_pipeline(config);
  pipeline::write_report(first, (dir / "out1").string());
  pipeline::emit_plot_data(first, (dir / "out1").string());

  const AnalysisReport second = pipeline::run_pipeline(config);
  pipeline::write_report(second, (dir / "out2").string());
  pipeline::emit_plot_data(second, (dir / "out2").string());

  for (const char* name :
       {"report.jsonl", "summary.json", "tendency.tsv", "metrics.tsv",
        "scatter.tsv", "hubs.jsonl"}) {
    CHECK(slurp(dir / "out1" / name) == slurp(dir / "out2" / name));
  }

  // export-plots from the written report reproduces the plot files.
  const auto replay = pipeline::load_report((dir / "out1" / "report.jsonl").string());
  pipeline::emit_plot_data(replay, (dir / "out3").string());
  for (const char* name :
       {"tendency.tsv", "metrics.tsv", "scatter.tsv", "hubs.jsonl"}) {
    CHECK(slurp(dir / "out1" / name) == slurp(dir / "out3" / name));
  }

  // Row counts: header plus one line per extraction tag; scatter carries one
  // line per embedded sub-sentence per tag.
  const auto line_count = [&](const char* name) {
    std::istringstream in(slurp(dir / "out1" / name));
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    return lines;
  };
  CHECK(line_count("tendency.tsv") == 1 + config.extractions.size());
  CHECK(line_count("metrics.tsv") == 1 + config.extractions.size());
  CHECK(line_count("scatter.tsv") ==
        1 + config.extractions.size() * planted.sentences);
  fs::remove_all(dir);
}

TEST_CASE("dct and gem embedders run end to end") {
  const auto dir = fixtures::fresh_temp_dir("pipeline-embedders");
  const auto planted = fixtures::write_planted_corpus(dir / "data", 40);
  RunConfig config = planted_config(planted, dir / "out");
  config.extractions = {"span"};
  config.tendency.samples = 10;

  config.embedder = "dct";
  config.dct_k = 2;
  config.graph.export_edges = true;
  const AnalysisReport dct = pipeline::run_pipeline(config);
  CHECK_FALSE(dct.any_error());
  CHECK(dct.sections[0]["dimension"] == 16);  // k * d with d = 8
  CHECK(fs::exists(dir / "out" / "edges-span.tsv"));
  CHECK(fs::exists(dir / "out" / "vertices-span.tsv"));
  config.graph.export_edges = false;

  config.embedder = "gem";
  // On this fixture the top corpus directions coincide with the class
  // centers, so component removal would erase the planted signal. Disable
  // it to check the weighted-sum path recovers the clusters.
  config.gem.corpus_components = 0;
  const AnalysisReport gem = pipeline::run_pipeline(config);
  CHECK_FALSE(gem.any_error());
  CHECK(gem.sections[0]["dimension"] == 8);
  CHECK(gem.sections[0]["clustering"]["metrics"]["homogeneity"]
            .get<double>() > 0.9);

  // With removal on, the run still completes cleanly.
  config.gem.corpus_components = 3;
  CHECK_FALSE(pipeline::run_pipeline(config).any_error());
  fs::remove_all(dir);
}

TEST_CASE("graph can be disabled with a recorded skip") {
  const auto dir = fixtures::fresh_temp_dir("pipeline-nograph");
  const auto planted = fixtures::write_planted_corpus(dir / "data", 40);
  RunConfig config = planted_config(planted, dir / "out");
  config.extractions = {"span"};
  config.tendency.samples = 10;
  config.graph.enabled = false;

  const AnalysisReport report = pipeline::run_pipeline(config);
  CHECK_FALSE(report.any_error());
  REQUIRE(report.sections.size() == 1);
  const auto& section = report.sections[0];
  CHECK_FALSE(section.contains("graph"));
  bool skip_recorded = false;
  for (const auto& skip : section["skips"]) {
    if (skip.get<std::string>().find("graph") != std::string::npos) {
      skip_recorded = true;
    }
  }
  CHECK(skip_recorded);
  fs::remove_all(dir);
}

TEST_CASE("oversized k surfaces as a section error") {
  const auto dir = fixtures::fresh_temp_dir("pipeline-bigk");
  const auto planted = fixtures::write_planted_corpus(dir / "data", 2);
  RunConfig config = planted_config(planted, dir / "out");
  config.extractions = {"span"};
  config.kmeans_k = 1000;  // more clusters than sentences
  config.tendency.samples = 5;

  const AnalysisReport report = pipeline::run_pipeline(config);
  CHECK(report.any_error());
  const auto& section = report.sections[0];
  REQUIRE(section["errors"].size() >= 1);
  bool found = false;
  for (const auto& err : section["errors"]) {
    if (err.get<std::string>().find("clustering") != std::string::npos) {
      found = true;
    }
  }
  CHECK(found);
  // Other analyses still ran.
  CHECK(section.contains("tendency"));
  fs::remove_all(dir);
}

TEST_CASE("single-label corpus skips clustering evaluation") {
  const auto dir = fixtures::fresh_temp_dir("pipeline-onelabel");
  fs::create_directories(dir);
  {
    std::ofstream corpus(dir / "corpus.jsonl");
    for (int i = 0; i < 8; ++i) {
      corpus << R"({"id":"s)" << i
             << R"(","tokens":["w0","w1","w2"],"m1":[0,1],"m2":[2,3],"relation":"only"})"
             << "\n";
    }
    std::ofstream vectors(dir / "vectors.txt");
    vectors << "w0 1.0 0.0\nw1 0.5 0.5\nw2 0.0 1.0\n";
  }
  RunConfig config;
  config.corpus_path = (dir / "corpus.jsonl").string();
  config.word_vectors_path = (dir / "vectors.txt").string();
  config.extractions = {"original"};
  config.tendency.samples = 5;
  config.out_dir = (dir / "out").string();

  const AnalysisReport report = pipeline::run_pipeline(config);
  const auto& section = report.sections[0];
  CHECK_FALSE(section.contains("clustering"));
  bool skip_recorded = false;
  for (const auto& skip : section["skips"]) {
    if (skip.get<std::string>().find("label") != std::string::npos) {
      skip_recorded = true;
    }
  }
  CHECK(skip_recorded);
  // Single-label graphs still build: every pair is same-label.
  CHECK(section.contains("graph"));
  fs::remove_all(dir);
}

TEST_CASE("precomputed embeddings join labels by id") {
  const auto dir = fixtures::fresh_temp_dir("pipeline-precomputed");
  const auto planted = fixtures::write_planted_corpus(dir / "data", 30);

  // Embed externally (mean over spans is irrelevant; any vectors work),
  // keyed by the corpus sentence ids.
  {
    std::ifstream in(planted.corpus_path);
    const auto parsed = corpus::parse_corpus(in);
    embed::EmbeddingSet set;
    set.vectors = linalg::Matrix(parsed.sentences.size(), 4);
    Rng rng(3);
    for (double& v : set.vectors.data()) v = rng.uniform(-1, 1);
    for (const auto& s : parsed.sentences) set.ids.push_back(s.id);
    std::ofstream out(dir / "set.emb", std::ios::binary);
    embed::save_embedding_set(set, out);
  }

  RunConfig config;
  config.corpus_path = planted.corpus_path;
  config.embedder = "precomputed";
  config.embedding_set_path = (dir / "set.emb").string();
  config.extractions = {"original"};
  config.kmeans_k = 3;
  config.tendency.samples = 10;
  config.graph.sample_fraction = 0.05;
  config.out_dir = (dir / "out").string();

  const AnalysisReport report = pipeline::run_pipeline(config);
  CHECK_FALSE(report.any_error());
  CHECK(report.sections[0]["provenance"] == "precomputed+original");
  CHECK(report.sections[0].contains("clustering"));

  // A file with unknown ids fails the join and surfaces as an error.
  {
    embed::EmbeddingSet set;
    set.vectors = linalg::Matrix(2, 4);
    set.ids = {"nope1", "nope2"};
    std::ofstream out(dir / "bad.emb", std::ios::binary);
    embed::save_embedding_set(set, out);
  }
  config.embedding_set_path = (dir / "bad.emb").string();
  const AnalysisReport bad = pipeline::run_pipeline(config);
  CHECK(bad.any_error());
  fs::remove_all(dir);
}

TEST_CASE("empty report emits headers only") {
  const auto dir = fixtures::fresh_temp_dir("pipeline-empty");
  AnalysisReport report;
  pipeline::emit_plot_data(report, dir.string());
  CHECK(slurp(dir / "tendency.tsv") == "extraction\tmean_kl\tstd_kl\tt\tb\n");
  CHECK(slurp(dir / "scatter.tsv") == "extraction\tid\tlabel\tx\ty\n");
  CHECK(slurp(dir / "hubs.jsonl").empty());
  fs::remove_all(dir);
}

TEST_CASE("missing inputs raise io errors") {
  RunConfig config;
  config.corpus_path = "/nonexistent/corpus.jsonl";
  config.word_vectors_path = "/nonexistent/vectors.txt";
  config.out_dir = "/tmp/embspace-unused";
  CHECK_THROWS_AS(pipeline::run_pipeline(config), IoError);
}

}  // TEST_SUITE
