#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace embspace::linalg {

// Dense row-major matrix of doubles. Shapes are validated on construction;
// finiteness is checked at input boundaries (file loaders, parsers) rather
// than on every operation.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return std::span<double>(data_.data() + r * cols_, cols_);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_.data() + r * cols_, cols_);
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Probability mass function over histogram cells: non-negative entries
// summing to 1 (within 1e-9).
struct Pmf {
  std::vector<double> probabilities;

  std::size_t cells() const { return probabilities.size(); }
  static Pmf from_counts(std::span<const std::uint64_t> counts);
  void validate() const;  // throws ValidationError on a broken invariant
};

// L2 distance; 64-bit accumulation. Throws DimensionError on length mismatch.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

// Squared L2 distance over the leading `dims` entries of two raw rows.
// Shared kernel for K-means and similarity-graph construction; accumulation
// order is fixed (4 interleaved partial sums), so results are identical
// regardless of how callers tile or thread the pair space.
double squared_distance(const double* a, const double* b, std::size_t dims);

// DCT-II coefficients 0..k-1 of the series:
//   coef[0] = sqrt(1/N) * sum c_n
//   coef[k] = sqrt(2/N) * sum c_n * cos(pi/N * (n + 1/2) * k)
// Coefficients at k >= N are zero. Throws EmptyInputError on an empty series.
std::vector<double> dct_coefficients(std::span<const double> series,
                                     std::size_t k);

struct QrResult {
  Matrix q;  // orthonormal columns
  Matrix r;  // upper triangular, non-negative diagonal
};

// Modified Gram-Schmidt QR of a with rows >= cols. Throws
// DegenerateColumnError (with the column index) when a column's residual
// norm falls below 1e-12.
QrResult qr_decompose(const Matrix& a);

struct PcaResult {
  Matrix projected;                       // rows x n_components
  std::vector<double> explained_variance; // non-increasing
  Matrix basis;                           // cols x n_components, orthonormal
};

// Principal component projection. Input is mean-centered; the basis comes
// from a Jacobi eigendecomposition of the sample covariance, so the result
// is deterministic. Sign convention: the largest-magnitude entry of each
// basis column is positive.
PcaResult pca_project(const Matrix& x, std::size_t n_components);

// KL(p' || q') over smoothed and renormalized distributions
// p'_i = (p_i + epsilon) / (1 + epsilon * cells), same for q'.
double kl_divergence(const Pmf& p, const Pmf& q, double epsilon);

// --- shared numeric building blocks -------------------------------------

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Fixed sweep order
// and relative thresholds; two runs on identical input are bit-identical.
SymmetricEigen symmetric_eigen(Matrix a);

struct TopDirections {
  Matrix directions;                  // dim x count, orthonormal columns
  std::vector<double> singular_values;  // descending
};

// Top principal directions of an (uncentered) data matrix via the
// eigendecomposition of x^T x. Directions whose singular value is below
// 1e-12 * max are dropped.
TopDirections top_directions(const Matrix& x, std::size_t count);

}  // namespace embspace::linalg
