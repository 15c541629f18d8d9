#include "embspace/cluster.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "embspace/errors.hpp"
#include "embspace/parallel.hpp"
#include "embspace/rng.hpp"

namespace embspace::cluster {

namespace {

std::uint32_t nearest_centroid(const double* point, const Matrix& centroids,
                               std::size_t d, double* best_sq_out) {
  std::uint32_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double sq = linalg::squared_distance(point, centroids.row(c).data(), d);
    if (sq < best_sq) {  // strict: ties keep the lowest centroid id
      best_sq = sq;
      best = static_cast<std::uint32_t>(c);
    }
  }
  *best_sq_out = best_sq;
  return best;
}

Matrix kmeanspp_init(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  Matrix centroids(k, d);

  std::vector<double> dist_sq(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.next_below(n);
  std::copy_n(points.row(first).data(), d, centroids.row(0).data());

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sq = linalg::squared_distance(
          points.row(i).data(), centroids.row(c - 1).data(), d);
      dist_sq[i] = std::min(dist_sq[i], sq);
      total += dist_sq[i];
    }
    std::size_t chosen;
    if (total > 0.0) {
      const double target = rng.next_double() * total;
      double cum = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += dist_sq[i];
        if (cum > target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = rng.next_below(n);  // all remaining mass zero (duplicates)
    }
    std::copy_n(points.row(chosen).data(), d, centroids.row(c).data());
  }
  return centroids;
}

}  // namespace

ClusterAssignment kmeans(const Matrix& points, std::size_t k,
                         std::uint64_t seed, std::size_t max_iter, double tol,
                         int threads) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (k < 1) throw ParameterError("kmeans needs k >= 1");
  if (n < k) {
    throw ParameterError("kmeans needs n >= k, got n = " + std::to_string(n) +
                         ", k = " + std::to_string(k));
  }

  Rng rng(seed);
  Matrix centroids = kmeanspp_init(points, k, rng);

  ClusterAssignment result;
  result.k = k;
  result.assignments.assign(n, 0);
  std::vector<double> point_sq(n, 0.0);
  std::vector<std::uint64_t> sizes(k, 0);
  Matrix next(k, d);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::atomic<bool> any_moved{false};
    parallel_for(n, threads, [&](std::size_t i) {
      double sq;
      const std::uint32_t a =
          nearest_centroid(points.row(i).data(), centroids, d, &sq);
      if (a != result.assignments[i]) {
        result.assignments[i] = a;
        any_moved.store(true, std::memory_order_relaxed);
      }
      point_sq[i] = sq;
    });
    bool changed = any_moved.load(std::memory_order_relaxed);

    // Reseed emptied clusters to the worst-fit points, lowest cluster id
    // first; scanning points in index order keeps this deterministic.
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++sizes[result.assignments[i]];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t farthest = n;
      double far_sq = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[result.assignments[i]] < 2) continue;
        if (point_sq[i] > far_sq) {
          far_sq = point_sq[i];
          farthest = i;
        }
      }
      if (farthest == n) break;  // nothing left to move
      --sizes[result.assignments[farthest]];
      result.assignments[farthest] = static_cast<std::uint32_t>(c);
      sizes[c] = 1;
      point_sq[farthest] = 0.0;
      changed = true;
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += point_sq[i];
    result.inertia_history.push_back(inertia);
    result.iterations = iter + 1;

    // Centroid update, sequential in point order.
    std::fill(next.data().begin(), next.data().end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = points.row(i);
      auto acc = next.row(result.assignments[i]);
      for (std::size_t j = 0; j < d; ++j) acc[j] += row[j];
    }
    double max_shift_sq = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double inv = 1.0 / static_cast<double>(sizes[c]);
      auto nc = next.row(c);
      for (std::size_t j = 0; j < d; ++j) nc[j] *= inv;
      max_shift_sq = std::max(
          max_shift_sq, linalg::squared_distance(nc.data(),
                                                 centroids.row(c).data(), d));
    }
    std::swap(centroids, next);

    if (!changed || max_shift_sq < tol * tol) break;
  }

  // Final inertia against the final centroids. Assignments stay as the loop
  // left them; re-assigning here could empty a repaired cluster again when
  // duplicate points tie.
  double inertia = 0.0;
  parallel_for(n, threads, [&](std::size_t i) {
    point_sq[i] = linalg::squared_distance(
        points.row(i).data(), centroids.row(result.assignments[i]).data(), d);
  });
  for (std::size_t i = 0; i < n; ++i) inertia += point_sq[i];
  result.inertia = inertia;
  return result;
}

ContingencyTable contingency(const ClusterAssignment& assignment,
                             std::span<const std::string> labels) {
  if (assignment.assignments.size() != labels.size()) {
    throw DimensionError("assignment/label lengths differ: " +
                         std::to_string(assignment.assignments.size()) +
                         " vs " + std::to_string(labels.size()));
  }
  ContingencyTable table;
  table.clusters = assignment.k;
  std::unordered_map<std::string, std::size_t> label_index;
  std::vector<std::uint32_t> label_ids(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto [it, inserted] =
        label_index.emplace(labels[i], table.label_names.size());
    if (inserted) table.label_names.push_back(labels[i]);
    label_ids[i] = static_cast<std::uint32_t>(it->second);
  }
  table.partitions = table.label_names.size();
  table.counts.assign(table.clusters * table.partitions, 0);
  table.row_marginals.assign(table.clusters, 0);
  table.col_marginals.assign(table.partitions, 0);
  table.total = labels.size();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint32_t c = assignment.assignments[i];
    const std::uint32_t l = label_ids[i];
    ++table.counts[c * table.partitions + l];
    ++table.row_marginals[c];
    ++table.col_marginals[l];
  }
  return table;
}

ContingencyTable contingency_from_indices(std::span<const std::uint32_t> clusters,
                                          std::size_t k,
                                          std::span<const std::uint32_t> labels,
                                          std::size_t m) {
  if (clusters.size() != labels.size()) {
    throw DimensionError("cluster/label index lengths differ");
  }
  ContingencyTable table;
  table.clusters = k;
  table.partitions = m;
  table.counts.assign(k * m, 0);
  table.row_marginals.assign(k, 0);
  table.col_marginals.assign(m, 0);
  table.total = clusters.size();
  table.label_names.resize(m);
  for (std::size_t j = 0; j < m; ++j) table.label_names[j] = std::to_string(j);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    ++table.counts[clusters[i] * m + labels[i]];
    ++table.row_marginals[clusters[i]];
    ++table.col_marginals[labels[i]];
  }
  return table;
}

namespace {

double entropy(std::span<const std::uint64_t> marginals, double n) {
  double h = 0.0;
  for (std::uint64_t m : marginals) {
    if (m == 0) continue;
    const double p = static_cast<double>(m) / n;
    h -= p * std::log(p);
  }
  return h;
}

double pairs_of(std::uint64_t c) {
  return 0.5 * static_cast<double>(c) * static_cast<double>(c - 1);
}

}  // namespace

EvaluationReport evaluate(const ContingencyTable& table) {
  if (table.total == 0) {
    throw EmptyInputError("cannot evaluate an empty contingency table");
  }
  const double n = static_cast<double>(table.total);
  EvaluationReport rep;

  double max_sum = 0.0;
  for (std::size_t i = 0; i < table.clusters; ++i) {
    std::uint64_t row_max = 0;
    for (std::size_t j = 0; j < table.partitions; ++j) {
      row_max = std::max(row_max, table.at(i, j));
    }
    max_sum += static_cast<double>(row_max);
  }
  rep.purity = max_sum / n;

  const double h_labels = entropy(table.col_marginals, n);
  const double h_clusters = entropy(table.row_marginals, n);
  double h_labels_given = 0.0;   // H(labels | clusters)
  double h_clusters_given = 0.0; // H(clusters | labels)
  double mi = 0.0;
  for (std::size_t i = 0; i < table.clusters; ++i) {
    for (std::size_t j = 0; j < table.partitions; ++j) {
      const std::uint64_t nij = table.at(i, j);
      if (nij == 0) continue;
      const double pij = static_cast<double>(nij) / n;
      const double ni = static_cast<double>(table.row_marginals[i]);
      const double nj = static_cast<double>(table.col_marginals[j]);
      h_labels_given -= pij * std::log(static_cast<double>(nij) / ni);
      h_clusters_given -= pij * std::log(static_cast<double>(nij) / nj);
      mi += pij * std::log(n * static_cast<double>(nij) / (ni * nj));
    }
  }
  rep.homogeneity = h_labels > 0.0 ? 1.0 - h_labels_given / h_labels : 1.0;
  rep.completeness =
      h_clusters > 0.0 ? 1.0 - h_clusters_given / h_clusters : 1.0;
  const double hc_sum = rep.homogeneity + rep.completeness;
  rep.v_measure =
      hc_sum > 0.0 ? 2.0 * rep.homogeneity * rep.completeness / hc_sum : 0.0;
  rep.mutual_information = std::max(mi, 0.0);

  // Pairwise agreement counts from the marginals.
  double tp = 0.0;
  for (std::uint64_t nij : table.counts) tp += pairs_of(nij);
  double same_cluster = 0.0;
  for (std::uint64_t ni : table.row_marginals) same_cluster += pairs_of(ni);
  double same_label = 0.0;
  for (std::uint64_t nj : table.col_marginals) same_label += pairs_of(nj);
  const double all_pairs = pairs_of(table.total);
  const double fp = same_cluster - tp;
  const double fn = same_label - tp;
  const double tn = all_pairs - same_cluster - fn;

  if (all_pairs == 0.0) {
    // A single point: agreement is vacuous.
    rep.rand_index = 1.0;
    rep.f_measure = 1.0;
    rep.fowlkes_mallows = 1.0;
    return rep;
  }
  rep.rand_index = (tp + tn) / all_pairs;
  rep.f_measure = (2.0 * tp + fp + fn) > 0.0
                      ? 2.0 * tp / (2.0 * tp + fp + fn)
                      : 1.0;
  const double fm_denom = (tp + fp) * (tp + fn);
  rep.fowlkes_mallows = fm_denom > 0.0 ? tp / std::sqrt(fm_denom) : 0.0;
  return rep;
}

}  // namespace embspace::cluster
