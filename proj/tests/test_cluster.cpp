#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <map>

#include "embspace/cluster.hpp"
#include "embspace/errors.hpp"
#include "embspace/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace embspace;
using cluster::ClusterAssignment;
using cluster::ContingencyTable;
using cluster::EvaluationReport;
using linalg::Matrix;

namespace {

ClusterAssignment fixed_assignment(std::vector<std::uint32_t> ids,
                                   std::size_t k) {
  ClusterAssignment a;
  a.assignments = std::move(ids);
  a.k = k;
  return a;
}

}  // namespace

TEST_SUITE("cluster") {

TEST_CASE("kmeans with one cluster") {
  fixtures::Blobs blobs = fixtures::make_blobs(
      60, {{0.0, 0.0}, {4.0, 4.0}}, 1.0, 5);
  const auto result = cluster::kmeans(blobs.points, 1, 42);
  CHECK(result.k == 1);
  for (auto a : result.assignments) CHECK(a == 0);

  std::vector<double> mean(2, 0.0);
  for (std::size_t i = 0; i < blobs.points.rows(); ++i) {
    mean[0] += blobs.points(i, 0);
    mean[1] += blobs.points(i, 1);
  }
  mean[0] /= 60;
  mean[1] /= 60;
  double want = 0;
  for (std::size_t i = 0; i < blobs.points.rows(); ++i) {
    const double dx = blobs.points(i, 0) - mean[0];
    const double dy = blobs.points(i, 1) - mean[1];
    want += dx * dx + dy * dy;
  }
  CHECK(result.inertia == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("kmeans with k equal to n") {
  fixtures::Blobs blobs = fixtures::make_blobs(12, {{0.0, 0.0}}, 3.0, 6);
  const auto result = cluster::kmeans(blobs.points, 12, 42);
  CHECK(result.inertia == doctest::Approx(0.0).scale(1.0));
  std::vector<bool> seen(12, false);
  for (auto a : result.assignments) {
    CHECK_FALSE(seen[a]);
    seen[a] = true;
  }
}

TEST_CASE("kmeans separates distant blobs exactly") {
  // Two blobs 10 sigma apart.
  fixtures::Blobs blobs =
      fixtures::make_blobs(200, {{0.0, 0.0}, {10.0, 0.0}}, 1.0, 9);
  const auto result = cluster::kmeans(blobs.points, 2, 42);
  // Perfect recovery up to permutation: exactly two (cluster, truth) cells,
  // each holding one whole blob.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> joint;
  for (std::size_t i = 0; i < 200; ++i) {
    ++joint[{result.assignments[i], blobs.membership[i]}];
  }
  CHECK(joint.size() == 2);
  for (const auto& [key, count] : joint) CHECK(count == 100);
}

TEST_CASE("kmeans parameter errors") {
  fixtures::Blobs blobs = fixtures::make_blobs(5, {{0.0, 0.0}}, 1.0, 10);
  CHECK_THROWS_AS(cluster::kmeans(blobs.points, 6, 42), ParameterError);
  CHECK_THROWS_AS(cluster::kmeans(blobs.points, 0, 42), ParameterError);
}

TEST_CASE("kmeans is deterministic and thread-count independent") {
  fixtures::Blobs blobs = fixtures::make_blobs(
      300, {{0.0, 0.0}, {6.0, 0.0}, {0.0, 6.0}}, 1.5, 11);
  const auto a = cluster::kmeans(blobs.points, 3, 42, 300, 1e-4, 1);
  const auto b = cluster::kmeans(blobs.points, 3, 42, 300, 1e-4, 1);
  const auto c = cluster::kmeans(blobs.points, 3, 42, 300, 1e-4, 4);
  CHECK(a.assignments == b.assignments);
  CHECK(a.assignments == c.assignments);
  CHECK(std::memcmp(&a.inertia, &b.inertia, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.inertia, &c.inertia, sizeof(double)) == 0);
}

TEST_CASE("kmeans inertia is non-increasing over iterations") {
  fixtures::Blobs blobs = fixtures::make_blobs(
      240, {{0.0, 0.0}, {3.0, 0.0}, {0.0, 3.0}, {3.0, 3.0}}, 1.2, 13);
  const auto result = cluster::kmeans(blobs.points, 4, 1);
  REQUIRE(result.inertia_history.size() >= 1);
  for (std::size_t i = 1; i < result.inertia_history.size(); ++i) {
    CHECK(result.inertia_history[i] <=
          result.inertia_history[i - 1] * (1 + 1e-9));
  }
  CHECK(result.inertia <= result.inertia_history.back() * (1 + 1e-9));
}

TEST_CASE("kmeans never leaves a cluster empty") {
  // Heavy duplication makes k-means++ prone to duplicate centers.
  Matrix points(9, 1, {0, 0, 0, 0, 0, 0, 1, 1, 5});
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto result = cluster::kmeans(points, 4, seed);
    std::vector<std::size_t> sizes(4, 0);
    for (auto a : result.assignments) ++sizes[a];
    for (std::size_t c = 0; c < 4; ++c) CHECK(sizes[c] > 0);
  }
}

TEST_CASE("contingency tables") {
  const std::vector<std::string> labels{"A", "A", "B", "B"};
  const auto diag = cluster::contingency(fixed_assignment({0, 0, 1, 1}, 2),
                                         labels);
  CHECK(diag.at(0, 0) == 2);
  CHECK(diag.at(1, 1) == 2);
  CHECK(diag.at(0, 1) == 0);
  CHECK(diag.total == 4);
  CHECK(diag.row_marginals == std::vector<std::uint64_t>{2, 2});
  CHECK(diag.label_names == std::vector<std::string>{"A", "B"});

  const auto row = cluster::contingency(fixed_assignment({0, 0, 0, 0}, 1),
                                        labels);
  CHECK(row.clusters == 1);
  CHECK(row.at(0, 0) == 2);
  CHECK(row.at(0, 1) == 2);

  CHECK_THROWS_AS(cluster::contingency(fixed_assignment({0, 1}, 2),
                                       std::vector<std::string>{"A"}),
                  DimensionError);
}

TEST_CASE("contingency counts match brute-force recounting") {
  Rng rng(15);
  std::vector<std::uint32_t> clusters(50), labels(50);
  for (std::size_t i = 0; i < 50; ++i) {
    clusters[i] = static_cast<std::uint32_t>(rng.next_below(4));
    labels[i] = static_cast<std::uint32_t>(rng.next_below(3));
  }
  const auto table = cluster::contingency_from_indices(clusters, 4, labels, 3);
  for (std::uint32_t c = 0; c < 4; ++c) {
    for (std::uint32_t l = 0; l < 3; ++l) {
      std::uint64_t want = 0;
      for (std::size_t i = 0; i < 50; ++i) {
        if (clusters[i] == c && labels[i] == l) ++want;
      }
      CHECK(table.at(c, l) == want);
    }
  }
}

TEST_CASE("perfect clustering scores one on the unit-range metrics") {
  std::vector<std::uint32_t> clusters, labels;
  const std::vector<std::size_t> sizes{2, 3, 4};
  for (std::uint32_t g = 0; g < sizes.size(); ++g) {
    for (std::size_t i = 0; i < sizes[g]; ++i) {
      clusters.push_back(g);
      labels.push_back(g);
    }
  }
  const auto rep = cluster::evaluate(
      cluster::contingency_from_indices(clusters, 3, labels, 3));
  CHECK(rep.purity == doctest::Approx(1.0));
  CHECK(rep.homogeneity == doctest::Approx(1.0));
  CHECK(rep.completeness == doctest::Approx(1.0));
  CHECK(rep.v_measure == doctest::Approx(1.0));
  CHECK(rep.rand_index == doctest::Approx(1.0));
  CHECK(rep.fowlkes_mallows == doctest::Approx(1.0));
  CHECK(rep.f_measure == doctest::Approx(1.0));
  CHECK(rep.mutual_information > 0.0);
}

TEST_CASE("single cluster over two balanced labels") {
  const auto rep = cluster::evaluate(cluster::contingency_from_indices(
      std::vector<std::uint32_t>{0, 0, 0, 0}, 1,
      std::vector<std::uint32_t>{0, 0, 1, 1}, 2));
  CHECK(rep.homogeneity == doctest::Approx(0.0));
  CHECK(rep.completeness == doctest::Approx(1.0));
  CHECK(rep.purity == doctest::Approx(0.5));
  CHECK(rep.v_measure == doctest::Approx(0.0));
}

TEST_CASE("anti-correlated clustering") {
  // clusters [0,1,0,1] against labels [A,A,B,B]: no agreeing pair.
  const auto rep = cluster::evaluate(cluster::contingency_from_indices(
      std::vector<std::uint32_t>{0, 1, 0, 1}, 2,
      std::vector<std::uint32_t>{0, 0, 1, 1}, 2));
  CHECK(rep.homogeneity == doctest::Approx(0.0));
  CHECK(rep.rand_index == doctest::Approx(1.0 / 3.0));
  CHECK(rep.fowlkes_mallows == doctest::Approx(0.0));
  CHECK(rep.f_measure == doctest::Approx(0.0));
}

TEST_CASE("evaluate rejects an empty table") {
  ContingencyTable empty;
  CHECK_THROWS_AS(cluster::evaluate(empty), EmptyInputError);
}

TEST_CASE("v measure is the harmonic mean of its parts") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.next_below(11);
    std::vector<std::uint32_t> clusters(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      clusters[i] = static_cast<std::uint32_t>(rng.next_below(4));
      labels[i] = static_cast<std::uint32_t>(rng.next_below(4));
    }
    const auto rep = cluster::evaluate(
        cluster::contingency_from_indices(clusters, 4, labels, 4));
    const double h = rep.homogeneity, c = rep.completeness;
    const double want = (h + c) > 0 ? 2 * h * c / (h + c) : 0.0;
    CHECK(std::abs(rep.v_measure - want) <= 1e-12);
  }
}

TEST_CASE("metrics are invariant under relabeling") {
  Rng rng(79);
  std::vector<std::uint32_t> clusters(40), labels(40);
  for (std::size_t i = 0; i < 40; ++i) {
    clusters[i] = static_cast<std::uint32_t>(rng.next_below(4));
    labels[i] = static_cast<std::uint32_t>(rng.next_below(3));
  }
  const auto base = cluster::evaluate(
      cluster::contingency_from_indices(clusters, 4, labels, 3));

  const std::vector<std::uint32_t> cluster_perm{2, 0, 3, 1};
  const std::vector<std::uint32_t> label_perm{1, 2, 0};
  std::vector<std::uint32_t> pc(40), pl(40);
  for (std::size_t i = 0; i < 40; ++i) {
    pc[i] = cluster_perm[clusters[i]];
    pl[i] = label_perm[labels[i]];
  }
  const auto permuted =
      cluster::evaluate(cluster::contingency_from_indices(pc, 4, pl, 3));
  CHECK(std::abs(permuted.purity - base.purity) <= 1e-12);
  CHECK(std::abs(permuted.f_measure - base.f_measure) <= 1e-12);
  CHECK(std::abs(permuted.rand_index - base.rand_index) <= 1e-12);
  CHECK(std::abs(permuted.homogeneity - base.homogeneity) <= 1e-12);
  CHECK(std::abs(permuted.mutual_information - base.mutual_information) <=
        1e-12);
  CHECK(std::abs(permuted.completeness - base.completeness) <= 1e-12);
  CHECK(std::abs(permuted.v_measure - base.v_measure) <= 1e-12);
  CHECK(std::abs(permuted.fowlkes_mallows - base.fowlkes_mallows) <= 1e-12);
}

TEST_CASE("two hundred random instances match the definition oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.next_below(11);  // up to 12 points
    const std::size_t k = 1 + rng.next_below(4);
    const std::size_t m = 1 + rng.next_below(4);
    std::vector<std::uint32_t> clusters(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      clusters[i] = static_cast<std::uint32_t>(rng.next_below(k));
      labels[i] = static_cast<std::uint32_t>(rng.next_below(m));
    }
    const auto rep = cluster::evaluate(
        cluster::contingency_from_indices(clusters, k, labels, m));
    const auto want = oracle::clustering_metrics(clusters, labels);
    CHECK(std::abs(rep.purity - want.purity) <= 1e-9);
    CHECK(std::abs(rep.f_measure - want.f_measure) <= 1e-9);
    CHECK(std::abs(rep.rand_index - want.rand_index) <= 1e-9);
    CHECK(std::abs(rep.homogeneity - want.homogeneity) <= 1e-9);
    CHECK(std::abs(rep.mutual_information - want.mutual_information) <= 1e-9);
    CHECK(std::abs(rep.completeness - want.completeness) <= 1e-9);
    CHECK(std::abs(rep.v_measure - want.v_measure) <= 1e-9);
    CHECK(std::abs(rep.fowlkes_mallows - want.fowlkes_mallows) <= 1e-9);
  }
}

TEST_CASE("metrics fall as a perfect clustering is corrupted") {
  const std::size_t n = 200;
  const std::size_t k = 4;
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<std::uint32_t>(i % k);
  }
  const std::vector<double> fractions{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<oracle::Metrics> averages(fractions.size());

  for (std::size_t f = 0; f < fractions.size(); ++f) {
    oracle::Metrics sum;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed * 1000 + f);
      std::vector<std::uint32_t> clusters = labels;
      const std::size_t corrupted =
          static_cast<std::size_t>(fractions[f] * n);
      for (std::size_t c = 0; c < corrupted; ++c) {
        clusters[rng.next_below(n)] =
            static_cast<std::uint32_t>(rng.next_below(k));
      }
      const auto rep = cluster::evaluate(
          cluster::contingency_from_indices(clusters, k, labels, k));
      sum.purity += rep.purity;
      sum.f_measure += rep.f_measure;
      sum.rand_index += rep.rand_index;
      sum.homogeneity += rep.homogeneity;
      sum.mutual_information += rep.mutual_information;
      sum.completeness += rep.completeness;
      sum.v_measure += rep.v_measure;
      sum.fowlkes_mallows += rep.fowlkes_mallows;
    }
    averages[f] = sum;
  }
  for (std::size_t f = 1; f < fractions.size(); ++f) {
    const double slack = 1e-3;
    CHECK(averages[f].purity <= averages[f - 1].purity + slack);
    CHECK(averages[f].f_measure <= averages[f - 1].f_measure + slack);
    CHECK(averages[f].rand_index <= averages[f - 1].rand_index + slack);
    CHECK(averages[f].homogeneity <= averages[f - 1].homogeneity + slack);
    CHECK(averages[f].mutual_information <=
          averages[f - 1].mutual_information + slack);
    CHECK(averages[f].completeness <= averages[f - 1].completeness + slack);
    CHECK(averages[f].v_measure <= averages[f - 1].v_measure + slack);
    CHECK(averages[f].fowlkes_mallows <=
          averages[f - 1].fowlkes_mallows + slack);
  }
}

}  // TEST_SUITE
