#include "embspace/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "embspace/errors.hpp"

namespace embspace::linalg {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kQrDegenerateTol = 1e-12;
}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ * cols_ != data_.size()) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
  }
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Pmf Pmf::from_counts(std::span<const std::uint64_t> counts) {
  Pmf pmf;
  pmf.probabilities.resize(counts.size(), 0.0);
  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  if (total == 0) {
    throw EmptyInputError("cannot build a pmf from all-zero counts");
  }
  const double inv = 1.0 / static_cast<double>(total);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    pmf.probabilities[i] = static_cast<double>(counts[i]) * inv;
  }
  return pmf;
}

void Pmf::validate() const {
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) {
      throw ValidationError("pmf entry is negative or NaN");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("pmf does not sum to 1 (sum = " +
                          std::to_string(sum) + ")");
  }
}

double euclidean_distance(std::span<const double> a,
                          std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("vector lengths differ: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
  return std::sqrt(squared_distance(a.data(), b.data(), a.size()));
}

double squared_distance(const double* a, const double* b, std::size_t dims) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= dims; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < dims; ++i) {
    const double d = a[i] - b[i];
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

std::vector<double> dct_coefficients(std::span<const double> series,
                                     std::size_t k) {
  const std::size_t n = series.size();
  if (n == 0) {
    throw EmptyInputError("dct of an empty series");
  }
  std::vector<double> coef(k, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t computed = std::min(k, n);  // coefficients >= n stay zero
  for (std::size_t j = 0; j < computed; ++j) {
    double sum = 0.0;
    if (j == 0) {
      for (std::size_t i = 0; i < n; ++i) sum += series[i];
      coef[0] = std::sqrt(inv_n) * sum;
    } else {
      const double freq = kPi * inv_n * static_cast<double>(j);
      for (std::size_t i = 0; i < n; ++i) {
        sum += series[i] * std::cos(freq * (static_cast<double>(i) + 0.5));
      }
      coef[j] = std::sqrt(2.0 * inv_n) * sum;
    }
  }
  return coef;
}

QrResult qr_decompose(const Matrix& a) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  if (rows < cols) {
    throw DimensionError("qr requires rows >= cols, got " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  QrResult out{Matrix(rows, cols), Matrix(cols, cols)};
  Matrix& q = out.q;
  Matrix& r = out.r;
  q = a;

  // Modified Gram-Schmidt: subtract projections one basis vector at a time.
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
    if (norm < kQrDegenerateTol) {
      throw DegenerateColumnError(
          j, "qr column " + std::to_string(j) +
                 " is linearly dependent (residual norm " +
                 std::to_string(norm) + ")");
    }
    r(j, j) = norm;
    const double inv = 1.0 / norm;
    for (std::size_t i = 0; i < rows; ++i) q(i, j) *= inv;
  }
  return out;
}

SymmetricEigen symmetric_eigen(Matrix a) {
  const std::size_t n = a.rows();
  if (n != a.cols()) {
    throw DimensionError("symmetric_eigen needs a square matrix");
  }
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double frob_sq = 0.0;
  for (double x : a.data()) frob_sq += x * x;
  const double off_tol = 1e-30 * frob_sq + 1e-300;

  // Cyclic-by-rows Jacobi sweeps. The rotation order is fixed, so the
  // decomposition is reproducible bit for bit.
  const std::size_t max_sweeps = 64;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off_sq = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off_sq += a(p, q) * a(p, q);
    }
    if (2.0 * off_sq <= off_tol) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Skip rotations that cannot change the result at double precision.
        if (std::abs(apq) <= 1e-18 * (std::abs(app) + std::abs(aqq))) {
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                             : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  // Order eigenpairs by value descending; ties keep the lower index first.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x) > a(y, y);
  });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.values[j] = a(src, src);
    // Sign convention: largest-magnitude entry positive; the first of equal
    // magnitudes decides, so the choice is deterministic.
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(v(i, src));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    const double flip = (v(arg, src) < 0.0) ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = flip * v(i, src);
  }
  return out;
}

PcaResult pca_project(const Matrix& x, std::size_t n_components) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  if (n_components > cols) {
    throw DimensionError("n_components " + std::to_string(n_components) +
                         " exceeds column count " + std::to_string(cols));
  }
  if (rows < 2) {
    throw EmptyInputError("pca needs at least 2 rows");
  }

  std::vector<double> mean(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto r = x.row(i);
    for (std::size_t j = 0; j < cols; ++j) mean[j] += r[j];
  }
  for (double& m : mean) m /= static_cast<double>(rows);

  Matrix centered(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      centered(i, j) = x(i, j) - mean[j];
    }
  }

  Matrix cov(cols, cols);
  const double inv_nm1 = 1.0 / static_cast<double>(rows - 1);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t l = j; l < cols; ++l) {
      double sum = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        sum += centered(i, j) * centered(i, l);
      }
      cov(j, l) = sum * inv_nm1;
      cov(l, j) = cov(j, l);
    }
  }

  SymmetricEigen eig = symmetric_eigen(std::move(cov));

  PcaResult out;
  out.explained_variance.assign(eig.values.begin(),
                                eig.values.begin() + n_components);
  out.basis = Matrix(cols, n_components);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t c = 0; c < n_components; ++c) {
      out.basis(j, c) = eig.vectors(j, c);
    }
  }
  out.projected = Matrix(rows, n_components);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < n_components; ++c) {
      double sum = 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        sum += centered(i, j) * out.basis(j, c);
      }
      out.projected(i, c) = sum;
    }
  }
  return out;
}

TopDirections top_directions(const Matrix& x, std::size_t count) {
  const std::size_t cols = x.cols();
  count = std::min(count, cols);
  TopDirections out;
  out.directions = Matrix(cols, 0);
  if (count == 0 || x.rows() == 0) return out;

  Matrix gram(cols, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t l = j; l < cols; ++l) {
      double sum = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) sum += x(i, j) * x(i, l);
      gram(j, l) = sum;
      gram(l, j) = sum;
    }
  }
  SymmetricEigen eig = symmetric_eigen(std::move(gram));

  const double top = eig.values.empty() ? 0.0 : std::max(eig.values[0], 0.0);
  const double sigma_max = std::sqrt(top);
  std::size_t kept = 0;
  std::vector<double> sigmas;
  for (std::size_t j = 0; j < count; ++j) {
    const double sigma = std::sqrt(std::max(eig.values[j], 0.0));
    if (sigma <= 1e-12 * sigma_max || sigma == 0.0) break;
    sigmas.push_back(sigma);
    ++kept;
  }
  out.singular_values = std::move(sigmas);
  out.directions = Matrix(cols, kept);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t c = 0; c < kept; ++c) {
      out.directions(j, c) = eig.vectors(j, c);
    }
  }
  return out;
}

double kl_divergence(const Pmf& p, const Pmf& q, double epsilon) {
  if (p.cells() != q.cells()) {
    throw DimensionError("pmf cell counts differ: " + std::to_string(p.cells()) +
                         " vs " + std::to_string(q.cells()));
  }
  if (!(epsilon > 0.0)) {
    throw ParameterError("kl smoothing epsilon must be positive");
  }
  const std::size_t cells = p.cells();
  const double denom = 1.0 + epsilon * static_cast<double>(cells);
  double sum = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double pi = (p.probabilities[i] + epsilon) / denom;
    const double qi = (q.probabilities[i] + epsilon) / denom;
    sum += pi * std::log(pi / qi);
  }
  return sum;
}

}  // namespace embspace::linalg
