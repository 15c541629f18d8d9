#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "embspace/linalg.hpp"

namespace embspace::embed {

using linalg::Matrix;

enum class OovPolicy { skip, zero };

// token -> d-vector map loaded from GloVe-style text. Vectors are stored as
// float32 (storage) and widened to double inside the aggregators (compute).
// Read-only after load; shareable across threads.
class WordVectorTable {
 public:
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& token) const {
    return entries_.count(token) != 0;
  }
  std::span<const float> vector(const std::string& token) const;
  const float* find(const std::string& token) const;

  OovPolicy oov_policy = OovPolicy::skip;

  // Loader hooks.
  void set_dimension(std::size_t d) { dimension_ = d; }
  bool insert(const std::string& token, std::vector<float> values);

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<float>> entries_;
};

// One `token v1 ... vd` entry per line. The first line fixes d; a later line
// with a different d raises FormatError carrying its line number. Duplicate
// tokens keep the first occurrence; a note per duplicate goes to `warnings`
// when given.
WordVectorTable load_word_vectors(std::istream& in,
                                  std::vector<std::string>* warnings = nullptr);

struct EmbeddingSet {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  Matrix vectors;
  std::string provenance;

  std::size_t size() const { return vectors.rows(); }
  std::size_t dimension() const { return vectors.cols(); }
};

// Arithmetic mean of the resolved word vectors. With policy `skip`
// unresolved tokens are dropped; with `zero` they contribute zero vectors
// but still count toward n. All tokens unresolved under `skip` raises
// EmptyEmbeddingError.
std::vector<double> embed_mean(std::span<const std::string> tokens,
                               const WordVectorTable& table);

// Stacks resolved vectors into an n x d matrix and keeps the first k DCT
// coefficients per column, concatenated coefficient-major: output length k*d.
std::vector<double> embed_dct(std::span<const std::string> tokens,
                              const WordVectorTable& table, std::size_t k);

struct GemParams {
  std::size_t window_size = 7;       // context window around each word
  std::size_t corpus_components = 3; // principal directions removed
  double power = 2.0;                // singular-value weighting exponent
  double epsilon = 1e-12;
  bool unit_weights = false;         // diagnostic mode: all alpha forced to 1
};

// Per-word weights of one sentence against a prepared corpus basis.
// Exposed so the weighting can be inspected and cross-checked directly.
std::vector<double> gem_word_weights(const Matrix& sentence_vectors,
                                     const linalg::TopDirections& corpus_basis,
                                     const GemParams& params);

// Weighted-sum embedder: word weights from QR novelty / significance /
// corpus-uniqueness scores, then removal of the top corpus principal
// directions. ids default to row indices when not supplied.
EmbeddingSet embed_gem(std::span<const std::vector<std::string>> corpus_tokens,
                       const WordVectorTable& table, const GemParams& params,
                       std::vector<std::string> ids = {},
                       std::vector<std::string> labels = {}, int threads = 0);

// Binary embedding-set format: magic "EMB1", n and d as little-endian
// 64-bit counts, n*d little-endian float32 row-major, then n
// newline-terminated id strings.
void save_embedding_set(const EmbeddingSet& set, std::ostream& out);
EmbeddingSet load_embedding_set(std::istream& in);

// Attaches labels by id. Ids absent from the map raise JoinError listing
// every missing id.
void join_labels(EmbeddingSet& set,
                 const std::unordered_map<std::string, std::string>& id_to_label);

}  // namespace embspace::embed
