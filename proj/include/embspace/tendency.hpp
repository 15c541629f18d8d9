#pragma once

#include <cstdint>
#include <vector>

#include "embspace/embed.hpp"
#include "embspace/linalg.hpp"

namespace embspace::tendency {

using linalg::Matrix;
using linalg::Pmf;

struct SpatHistConfig {
  std::size_t bins_per_dim = 8;
  std::size_t samples = 500;
  std::uint64_t seed = 42;
  std::size_t reduce_to = 2;  // PCA target dimension
  double epsilon = 1e-10;     // KL smoothing
};

struct SpatHistResult {
  double mean_kl = 0.0;
  double std_kl = 0.0;
  std::size_t t = 0;
  std::size_t b = 0;
  std::vector<double> kl_values;  // one per sample, in sample order
};

struct BoundingBox {
  std::vector<double> min;
  std::vector<double> max;
};

BoundingBox bounding_box(const Matrix& points);

// Bins points into b^d equi-width cells over the box and normalizes the
// counts. Points on the max edge land in the last bin; a zero-width
// dimension puts everything in its first slice. Cell index is row-major,
// (i, j) -> i*b + j in two dimensions.
Pmf empirical_pmf(const Matrix& points, std::size_t b, const BoundingBox& bbox);

// Clustering-tendency score: reduce to `reduce_to` dimensions by PCA, bin
// the data, then average the KL divergence between the data's cell
// distribution and those of t uniform samples drawn in the same bounding
// box. Each sample's generator derives from (seed, sample index), so the
// result does not depend on scheduling.
SpatHistResult spatial_histogram(const Matrix& vectors,
                                 const SpatHistConfig& config, int threads = 0);

inline SpatHistResult spatial_histogram(const embed::EmbeddingSet& x,
                                        const SpatHistConfig& config,
                                        int threads = 0) {
  return spatial_histogram(x.vectors, config, threads);
}

}  // namespace embspace::tendency
