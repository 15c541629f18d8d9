// Shared test fixtures: the worked example sentence, blob generators, and
// the planted three-relation corpus used by the pipeline tests.
#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "embspace/corpus.hpp"
#include "embspace/linalg.hpp"
#include "embspace/rng.hpp"

namespace fixtures {

// The chess-news sentence whose span extractions are worked through token
// by token; mentions are the two location names near the end.
inline embspace::corpus::TokenizedSentence s1_sentence() {
  embspace::corpus::TokenizedSentence s;
  s.id = "S1";
  s.tokens = {"But",     "that",       "spasm",    "of",     "irritation",
              "by",      "a",          "master",   "intimidator", "was",
              "minor",   "compared",   "with",     "what",   "Bobby",
              "Fischer", ",",          "the",      "erratic", "former",
              "world",   "chess",      "champion", ",",      "dished",
              "out",     "in",         "March",    "at",     "a",
              "news",    "conference", "in",       "Reykjavik", ",",
              "Iceland", "."};
  s.mention1 = {33, 34};  // Reykjavik
  s.mention2 = {35, 36};  // Iceland
  s.relation = "contains";
  return s;
}

struct Blobs {
  embspace::linalg::Matrix points;
  std::vector<std::uint32_t> membership;
  std::vector<std::string> labels;
};

// n points split evenly over the centers, Gaussian noise of the given sigma.
inline Blobs make_blobs(std::size_t n,
                        const std::vector<std::vector<double>>& centers,
                        double sigma, std::uint64_t seed) {
  const std::size_t d = centers.front().size();
  Blobs blobs;
  blobs.points = embspace::linalg::Matrix(n, d);
  blobs.membership.resize(n);
  blobs.labels.resize(n);
  embspace::Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % centers.size();
    blobs.membership[i] = static_cast<std::uint32_t>(c);
    blobs.labels[i] = "blob" + std::to_string(c);
    for (std::size_t j = 0; j < d; ++j) {
      blobs.points(i, j) = centers[c][j] + sigma * rng.normal();
    }
  }
  return blobs;
}

struct PlantedCorpus {
  std::string corpus_path;
  std::string vectors_path;
  std::size_t sentences = 0;
};

// Synthetic three-relation corpus whose span tokens are relation-pure while
// the surrounding context is shared noise, so span embeddings cluster much
// better than whole sentences.
inline PlantedCorpus write_planted_corpus(const std::filesystem::path& dir,
                                          std::size_t per_relation = 200,
                                          std::uint64_t seed = 7) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::size_t d = 8;
  const std::vector<std::string> relations = {"rel_a", "rel_b", "rel_c"};
  std::vector<std::vector<double>> centers = {
      {10, 0, 0, 0, 0, 0, 0, 0}, {0, 10, 0, 0, 0, 0, 0, 0},
      {0, 0, 10, 0, 0, 0, 0, 0}};

  embspace::Rng rng(seed);
  std::ostringstream vectors;
  auto emit = [&](const std::string& token, const std::vector<double>& v) {
    vectors << token;
    for (double x : v) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), " %.6f", x);
      vectors << buf;
    }
    vectors << "\n";
  };
  for (std::size_t r = 0; r < relations.size(); ++r) {
    for (std::size_t i = 0; i < 10; ++i) {
      std::vector<double> v(d);
      for (std::size_t j = 0; j < d; ++j) {
        v[j] = centers[r][j] + 0.2 * rng.normal();
      }
      emit("ent_" + relations[r] + "_" + std::to_string(i), v);
    }
    for (std::size_t i = 0; i < 5; ++i) {
      std::vector<double> v(d);
      for (std::size_t j = 0; j < d; ++j) {
        v[j] = centers[r][j] + 0.2 * rng.normal();
      }
      emit("rw_" + relations[r] + "_" + std::to_string(i), v);
    }
  }
  const std::size_t noise_vocab = 40;
  for (std::size_t i = 0; i < noise_vocab; ++i) {
    std::vector<double> v(d);
    for (std::size_t j = 0; j < d; ++j) v[j] = rng.uniform(-8.0, 8.0);
    emit("n_" + std::to_string(i), v);
  }

  std::ostringstream corpus;
  std::size_t sentence_id = 0;
  for (std::size_t r = 0; r < relations.size(); ++r) {
    for (std::size_t s = 0; s < per_relation; ++s) {
      std::vector<std::string> tokens;
      for (std::size_t i = 0; i < 10; ++i) {
        tokens.push_back("n_" + std::to_string(rng.next_below(noise_vocab)));
      }
      const std::size_t m1_start = tokens.size();
      tokens.push_back("ent_" + relations[r] + "_" +
                       std::to_string(rng.next_below(10)));
      tokens.push_back("rw_" + relations[r] + "_" +
                       std::to_string(rng.next_below(5)));
      const std::size_t m2_start = tokens.size();
      tokens.push_back("ent_" + relations[r] + "_" +
                       std::to_string(rng.next_below(10)));
      for (std::size_t i = 0; i < 10; ++i) {
        tokens.push_back("n_" + std::to_string(rng.next_below(noise_vocab)));
      }
      corpus << "{\"id\":\"s" << sentence_id++ << "\",\"tokens\":[";
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        corpus << (i ? "," : "") << "\"" << tokens[i] << "\"";
      }
      corpus << "],\"m1\":[" << m1_start << "," << m1_start + 1 << "],\"m2\":["
             << m2_start << "," << m2_start + 1 << "],\"relation\":\""
             << relations[r] << "\"}\n";
    }
  }

  PlantedCorpus out;
  out.sentences = sentence_id;
  out.corpus_path = (dir / "corpus.jsonl").string();
  out.vectors_path = (dir / "vectors.txt").string();
  std::ofstream(out.corpus_path) << corpus.str();
  std::ofstream(out.vectors_path) << vectors.str();
  return out;
}

inline std::filesystem::path fresh_temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("embspace-tests-" + name + "-" +
                    std::to_string(static_cast<unsigned>(::getpid())));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
