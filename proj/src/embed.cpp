#include "embspace/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "embspace/errors.hpp"
#include "embspace/parallel.hpp"

namespace embspace::embed {

std::span<const float> WordVectorTable::vector(const std::string& token) const {
  const auto it = entries_.find(token);
  if (it == entries_.end()) {
    throw ParameterError("token not in table: " + token);
  }
  return it->second;
}

const float* WordVectorTable::find(const std::string& token) const {
  const auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : it->second.data();
}

bool WordVectorTable::insert(const std::string& token,
                             std::vector<float> values) {
  return entries_.emplace(token, std::move(values)).second;
}

WordVectorTable load_word_vectors(std::istream& in,
                                  std::vector<std::string>* warnings) {
  WordVectorTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<float> values;
    double v;
    while (fields >> v) values.push_back(static_cast<float>(v));
    if (token.empty() || values.empty()) {
      throw FormatError("word vector line " + std::to_string(line_no) +
                        " is malformed");
    }
    if (!fields.eof()) {
      throw FormatError("word vector line " + std::to_string(line_no) +
                        " has a non-numeric component");
    }
    for (float f : values) {
      if (!std::isfinite(f)) {
        throw FormatError("word vector line " + std::to_string(line_no) +
                          " has a non-finite component");
      }
    }
    if (dim == 0) {
      dim = values.size();
      table.set_dimension(dim);
    } else if (values.size() != dim) {
      throw FormatError("word vector line " + std::to_string(line_no) +
                        " has dimension " + std::to_string(values.size()) +
                        ", expected " + std::to_string(dim));
    }
    if (!table.insert(token, std::move(values)) && warnings != nullptr) {
      warnings->push_back("duplicate token `" + token + "` at line " +
                          std::to_string(line_no) + "; first occurrence kept");
    }
  }
  return table;
}

namespace {

// Word vectors of a token sequence under the table's OOV policy, widened to
// doubles. Row count is the effective n of the aggregation formulas.
Matrix resolve_tokens(std::span<const std::string> tokens,
                      const WordVectorTable& table) {
  const std::size_t d = table.dimension();
  if (d == 0) {
    throw EmptyInputError("word vector table is empty (no dimension)");
  }
  std::vector<double> rows;
  std::size_t n = 0;
  for (const auto& token : tokens) {
    const float* vec = table.find(token);
    if (vec == nullptr) {
      if (table.oov_policy == OovPolicy::zero) {
        rows.insert(rows.end(), d, 0.0);
        ++n;
      }
      continue;
    }
    for (std::size_t j = 0; j < d; ++j) {
      rows.push_back(static_cast<double>(vec[j]));
    }
    ++n;
  }
  if (n == 0) {
    throw EmptyEmbeddingError("no token resolved to a word vector");
  }
  return Matrix(n, d, std::move(rows));
}

}  // namespace

std::vector<double> embed_mean(std::span<const std::string> tokens,
                               const WordVectorTable& table) {
  const Matrix m = resolve_tokens(tokens, table);
  std::vector<double> mean(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) mean[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(m.rows());
  for (double& v : mean) v *= inv;
  return mean;
}

std::vector<double> embed_dct(std::span<const std::string> tokens,
                              const WordVectorTable& table, std::size_t k) {
  if (k < 1) throw ParameterError("dct embedder needs k >= 1");
  const Matrix m = resolve_tokens(tokens, table);
  const std::size_t d = m.cols();
  std::vector<double> out(k * d, 0.0);
  std::vector<double> column(m.rows());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < m.rows(); ++i) column[i] = m(i, j);
    const auto coef = linalg::dct_coefficients(column, k);
    // coefficient-major: all d values of coef[0], then coef[1], ...
    for (std::size_t c = 0; c < k; ++c) out[c * d + j] = coef[c];
  }
  return out;
}

namespace {

// Context matrix for word i: the surrounding window in textual order with
// the word's own vector as the last column, so the last column of R holds
// the word's coordinates and its last entry the novel component.
Matrix context_matrix(const Matrix& words, std::size_t i,
                      std::size_t window_size) {
  const std::size_t n = words.rows();
  const std::size_t d = words.cols();
  const std::size_t left = (window_size - 1) / 2;
  const std::size_t right = window_size - 1 - left;
  const std::size_t lo = i >= left ? i - left : 0;
  const std::size_t hi = std::min(n, i + right + 1);
  Matrix ctx(d, hi - lo);
  std::size_t col = 0;
  for (std::size_t w = lo; w < hi; ++w) {
    if (w == i) continue;
    for (std::size_t r = 0; r < d; ++r) ctx(r, col) = words(w, r);
    ++col;
  }
  for (std::size_t r = 0; r < d; ++r) ctx(r, col) = words(i, r);
  return ctx;
}

// Gram-Schmidt that zeroes linearly dependent columns instead of failing;
// reports whether the last column (the focus word) survived.
struct TolerantQr {
  Matrix q;
  Matrix r;
  bool last_column_ok = false;
};

TolerantQr tolerant_qr(const Matrix& a) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  TolerantQr out{a, Matrix(cols, cols), false};
  Matrix& q = out.q;
  Matrix& r = out.r;
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      double dot = 0.0;
      for (std::size_t i = 0; i < rows; ++i) dot += q(i, p) * q(i, j);
      r(p, j) = dot;
      for (std::size_t i = 0; i < rows; ++i) q(i, j) -= dot * q(i, p);
    }
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < rows; ++i) norm_sq += q(i, j) * q(i, j);
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
      for (std::size_t i = 0; i < rows; ++i) q(i, j) = 0.0;
      r(j, j) = 0.0;
      continue;
    }
    r(j, j) = norm;
    const double inv = 1.0 / norm;
    for (std::size_t i = 0; i < rows; ++i) q(i, j) *= inv;
    if (j + 1 == cols) out.last_column_ok = true;
  }
  return out;
}

}  // namespace

std::vector<double> gem_word_weights(const Matrix& sentence_vectors,
                                     const linalg::TopDirections& corpus_basis,
                                     const GemParams& params) {
  const std::size_t n = sentence_vectors.rows();
  const std::size_t d = sentence_vectors.cols();
  std::vector<double> alphas(n, 0.0);
  if (params.unit_weights) {
    std::fill(alphas.begin(), alphas.end(), 1.0);
    return alphas;
  }
  if (params.window_size < 1) {
    throw ParameterError("gem window_size must be >= 1");
  }

  const std::size_t n_dirs = corpus_basis.singular_values.size();
  double sigma_power_sum = 0.0;
  std::vector<double> sigma_powers(n_dirs, 0.0);
  for (std::size_t j = 0; j < n_dirs; ++j) {
    sigma_powers[j] = std::pow(corpus_basis.singular_values[j], params.power);
    sigma_power_sum += sigma_powers[j];
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Matrix ctx = context_matrix(sentence_vectors, i, params.window_size);
    const TolerantQr qr = tolerant_qr(ctx);
    if (!qr.last_column_ok) {
      alphas[i] = 0.0;  // word adds nothing new to its context
      continue;
    }
    const std::size_t last = ctx.cols() - 1;
    double r_norm_sq = 0.0;
    for (std::size_t p = 0; p <= last; ++p) {
      r_norm_sq += qr.r(p, last) * qr.r(p, last);
    }
    const double r_last = qr.r(last, last);
    const double novelty =
        std::exp(r_last / (std::sqrt(r_norm_sq) + params.epsilon));
    const double significance =
        r_last / static_cast<double>(params.window_size);

    double uniqueness = 1.0;  // no corpus directions -> no penalty
    if (n_dirs > 0 && sigma_power_sum > 0.0) {
      double penalty = 0.0;
      for (std::size_t j = 0; j < n_dirs; ++j) {
        double dot = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
          dot += qr.q(r, last) * corpus_basis.directions(r, j);
        }
        penalty += sigma_powers[j] * dot * dot;
      }
      uniqueness = std::exp(-penalty / sigma_power_sum);
    }
    alphas[i] = novelty + significance + uniqueness;
  }
  return alphas;
}

EmbeddingSet embed_gem(std::span<const std::vector<std::string>> corpus_tokens,
                       const WordVectorTable& table, const GemParams& params,
                       std::vector<std::string> ids,
                       std::vector<std::string> labels, int threads) {
  if (corpus_tokens.empty()) {
    throw EmptyInputError("gem needs a non-empty corpus");
  }
  const std::size_t n = corpus_tokens.size();
  const std::size_t d = table.dimension();
  if (d == 0) {
    throw EmptyInputError("word vector table is empty (no dimension)");
  }
  if (!ids.empty() && ids.size() != n) {
    throw DimensionError("gem: ids/corpus size mismatch");
  }
  if (!labels.empty() && labels.size() != n) {
    throw DimensionError("gem: labels/corpus size mismatch");
  }

  // Phase A: corpus basis from per-sentence mean vectors.
  std::vector<Matrix> resolved(n);
  for (std::size_t s = 0; s < n; ++s) {
    try {
      resolved[s] = resolve_tokens(corpus_tokens[s], table);
    } catch (const EmptyEmbeddingError&) {
      const std::string id = ids.empty() ? std::to_string(s) : ids[s];
      throw EmptyEmbeddingError("sentence " + id +
                                " has no resolvable token for gem");
    }
  }
  Matrix coarse(n, d);
  for (std::size_t s = 0; s < n; ++s) {
    const Matrix& words = resolved[s];
    const double inv = 1.0 / static_cast<double>(words.rows());
    for (std::size_t i = 0; i < words.rows(); ++i) {
      for (std::size_t j = 0; j < d; ++j) coarse(s, j) += words(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) coarse(s, j) *= inv;
  }
  const linalg::TopDirections basis =
      linalg::top_directions(coarse, params.corpus_components);

  // Phase B: per-sentence weighted sums, independent across sentences.
  EmbeddingSet out;
  out.vectors = Matrix(n, d);
  parallel_for(n, threads, [&](std::size_t s) {
    const Matrix& words = resolved[s];
    const std::vector<double> alphas = gem_word_weights(words, basis, params);
    auto row = out.vectors.row(s);
    for (std::size_t i = 0; i < words.rows(); ++i) {
      for (std::size_t j = 0; j < d; ++j) row[j] += alphas[i] * words(i, j);
    }
    // Remove the sentence-independent principal components.
    for (std::size_t c = 0; c < basis.singular_values.size(); ++c) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        dot += row[j] * basis.directions(j, c);
      }
      for (std::size_t j = 0; j < d; ++j) {
        row[j] -= dot * basis.directions(j, c);
      }
    }
  });

  if (ids.empty()) {
    out.ids.resize(n);
    for (std::size_t s = 0; s < n; ++s) out.ids[s] = std::to_string(s);
  } else {
    out.ids = std::move(ids);
  }
  out.labels = std::move(labels);
  out.provenance = "gem(window=" + std::to_string(params.window_size) +
                   ",components=" + std::to_string(params.corpus_components) +
                   ",power=" + std::to_string(params.power) + ")";
  return out;
}

namespace {

void write_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw FormatError("embedding set truncated in header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

}  // namespace

void save_embedding_set(const EmbeddingSet& set, std::ostream& out) {
  if (set.ids.size() != set.vectors.rows()) {
    throw DimensionError("embedding set ids/rows mismatch");
  }
  out.write("EMB1", 4);
  write_u64_le(out, set.vectors.rows());
  write_u64_le(out, set.vectors.cols());
  std::vector<float> row32(set.vectors.cols());
  for (std::size_t i = 0; i < set.vectors.rows(); ++i) {
    const auto row = set.vectors.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row32[j] = static_cast<float>(row[j]);
    }
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(row32.data()),
              static_cast<std::streamsize>(row32.size() * 4));
  }
  for (const auto& id : set.ids) {
    if (id.find('\n') != std::string::npos) {
      throw FormatError("embedding id contains a newline: " + id);
    }
    out << id << "\n";
  }
  if (!out) throw IoError("failed writing embedding set");
}

EmbeddingSet load_embedding_set(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "EMB1", 4) != 0) {
    throw FormatError("not an embedding set (bad magic)");
  }
  const std::uint64_t n = read_u64_le(in);
  const std::uint64_t d = read_u64_le(in);
  EmbeddingSet set;
  set.vectors = Matrix(n, d);
  std::vector<float> row32(d);
  for (std::uint64_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row32.data()),
            static_cast<std::streamsize>(d * 4));
    if (!in) {
      throw FormatError("embedding set truncated at row " + std::to_string(i) +
                        " of " + std::to_string(n));
    }
    auto row = set.vectors.row(i);
    bool finite = true;
    for (std::uint64_t j = 0; j < d; ++j) {
      row[j] = static_cast<double>(row32[j]);
      finite = finite && std::isfinite(row[j]);
    }
    if (!finite) {
      throw ValidationError("embedding row " + std::to_string(i) +
                            " has non-finite values");
    }
  }
  set.ids.reserve(n);
  std::string id;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!std::getline(in, id)) {
      throw FormatError("embedding set truncated in id block at " +
                        std::to_string(i) + " of " + std::to_string(n));
    }
    set.ids.push_back(id);
  }
  set.provenance = "precomputed";
  return set;
}

void join_labels(
    EmbeddingSet& set,
    const std::unordered_map<std::string, std::string>& id_to_label) {
  std::vector<std::string> labels(set.ids.size());
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < set.ids.size(); ++i) {
    const auto it = id_to_label.find(set.ids[i]);
    if (it == id_to_label.end()) {
      missing.push_back(set.ids[i]);
    } else {
      labels[i] = it->second;
    }
  }
  if (!missing.empty()) {
    std::string msg = "label join failed for " +
                      std::to_string(missing.size()) + " id(s):";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
      msg += " " + missing[i];
    }
    if (missing.size() > 10) msg += " ...";
    throw JoinError(std::move(missing), msg);
  }
  set.labels = std::move(labels);
}

}  // namespace embspace::embed
