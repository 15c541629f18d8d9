#include "embspace/tendency.hpp"

#include <algorithm>
#include <cmath>

#include "embspace/errors.hpp"
#include "embspace/parallel.hpp"
#include "embspace/rng.hpp"

namespace embspace::tendency {

BoundingBox bounding_box(const Matrix& points) {
  if (points.rows() == 0) {
    throw EmptyInputError("bounding box of an empty point set");
  }
  const std::size_t d = points.cols();
  BoundingBox box;
  box.min.assign(points.row(0).begin(), points.row(0).end());
  box.max = box.min;
  for (std::size_t i = 1; i < points.rows(); ++i) {
    const auto row = points.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      box.min[j] = std::min(box.min[j], row[j]);
      box.max[j] = std::max(box.max[j], row[j]);
    }
  }
  return box;
}

namespace {

std::size_t cell_count(std::size_t b, std::size_t d) {
  std::size_t cells = 1;
  for (std::size_t j = 0; j < d; ++j) cells *= b;
  return cells;
}

std::vector<std::uint64_t> bin_counts(const Matrix& points, std::size_t b,
                                      const BoundingBox& bbox) {
  const std::size_t d = points.cols();
  std::vector<std::uint64_t> counts(cell_count(b, d), 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto row = points.row(i);
    std::size_t cell = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const double width = bbox.max[j] - bbox.min[j];
      std::size_t idx = 0;
      if (width > 0.0) {
        const double pos = (row[j] - bbox.min[j]) / width;
        idx = static_cast<std::size_t>(pos * static_cast<double>(b));
        if (idx >= b) idx = b - 1;  // max edge closes the last bin
      }
      cell = cell * b + idx;
    }
    ++counts[cell];
  }
  return counts;
}

}  // namespace

Pmf empirical_pmf(const Matrix& points, std::size_t b, const BoundingBox& bbox) {
  if (b < 2) throw ParameterError("spatial histogram needs bins_per_dim >= 2");
  if (bbox.min.size() != points.cols() || bbox.max.size() != points.cols()) {
    throw DimensionError("bounding box dimension does not match points");
  }
  return Pmf::from_counts(bin_counts(points, b, bbox));
}

SpatHistResult spatial_histogram(const Matrix& vectors,
                                 const SpatHistConfig& config, int threads) {
  const std::size_t n = vectors.rows();
  if (n < 2) {
    throw EmptyInputError("spatial histogram needs at least 2 points");
  }
  if (config.samples < 1) {
    throw ParameterError("spatial histogram needs samples >= 1");
  }
  // PCA is a dimensionality mitigation: applied only when the data has more
  // dimensions than the histogram target. Projecting d <= reduce_to data
  // would just rotate it inside a larger bounding box.
  Matrix reduced;
  if (vectors.cols() > config.reduce_to) {
    reduced = linalg::pca_project(vectors, config.reduce_to).projected;
  } else {
    reduced = vectors;
  }
  const std::size_t d = reduced.cols();
  const std::size_t b = config.bins_per_dim;

  const BoundingBox box = bounding_box(reduced);
  const Pmf data_pmf = empirical_pmf(reduced, b, box);

  SpatHistResult result;
  result.t = config.samples;
  result.b = b;
  result.kl_values.assign(config.samples, 0.0);

  parallel_for(config.samples, threads, [&](std::size_t s) {
    Rng rng = Rng::derive(config.seed, s);
    Matrix sample(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = sample.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        row[j] = box.min[j] + rng.next_double() * (box.max[j] - box.min[j]);
      }
    }
    const Pmf sample_pmf = empirical_pmf(sample, b, box);
    result.kl_values[s] =
        linalg::kl_divergence(data_pmf, sample_pmf, config.epsilon);
  });

  double mean = 0.0;
  for (double v : result.kl_values) mean += v;
  mean /= static_cast<double>(config.samples);
  double var = 0.0;
  for (double v : result.kl_values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(config.samples);
  result.mean_kl = std::max(mean, 0.0);  // KL round-off must not go negative
  result.std_kl = std::sqrt(var);
  return result;
}

}  // namespace embspace::tendency
