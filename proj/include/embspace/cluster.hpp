#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embspace/embed.hpp"
#include "embspace/linalg.hpp"

namespace embspace::cluster {

using linalg::Matrix;

struct ClusterAssignment {
  std::vector<std::uint32_t> assignments;  // one id in [0, k) per point
  std::size_t k = 0;
  double inertia = 0.0;                    // sum of squared distances
  std::vector<double> inertia_history;     // per Lloyd iteration
  std::size_t iterations = 0;
};

// Lloyd's algorithm from k-means++ initialization. Deterministic for a
// fixed seed and independent of the thread count: the assignment step is
// parallel per point, the centroid update runs in index order. An emptied
// cluster is reseeded to the point farthest from its current centroid.
ClusterAssignment kmeans(const Matrix& points, std::size_t k,
                         std::uint64_t seed, std::size_t max_iter = 300,
                         double tol = 1e-4, int threads = 0);

inline ClusterAssignment kmeans(const embed::EmbeddingSet& x, std::size_t k,
                                std::uint64_t seed, std::size_t max_iter = 300,
                                double tol = 1e-4, int threads = 0) {
  return kmeans(x.vectors, k, seed, max_iter, tol, threads);
}

// Cluster-by-label co-occurrence counts N_ij with marginals.
struct ContingencyTable {
  std::size_t clusters = 0;  // k
  std::size_t partitions = 0;  // m
  std::vector<std::uint64_t> counts;  // k x m row-major
  std::vector<std::uint64_t> row_marginals;  // per cluster
  std::vector<std::uint64_t> col_marginals;  // per label
  std::uint64_t total = 0;
  std::vector<std::string> label_names;  // column order (first appearance)

  std::uint64_t at(std::size_t i, std::size_t j) const {
    return counts[i * partitions + j];
  }
};

ContingencyTable contingency(const ClusterAssignment& assignment,
                             std::span<const std::string> labels);

// For tests and oracles working on raw index pairs.
ContingencyTable contingency_from_indices(std::span<const std::uint32_t> clusters,
                                          std::size_t k,
                                          std::span<const std::uint32_t> labels,
                                          std::size_t m);

struct EvaluationReport {
  double purity = 0.0;
  double f_measure = 0.0;        // pairwise F1
  double rand_index = 0.0;       // unadjusted
  double homogeneity = 0.0;
  double mutual_information = 0.0;  // raw, in nats
  double completeness = 0.0;
  double v_measure = 0.0;
  double fowlkes_mallows = 0.0;
};

// The eight label-aligned clustering metrics over a contingency table.
// Entropies are in nats. Pairwise metrics on an input without pairs
// (n < 2) report vacuous agreement (1.0).
EvaluationReport evaluate(const ContingencyTable& table);

}  // namespace embspace::cluster
