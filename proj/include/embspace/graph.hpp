#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "embspace/embed.hpp"
#include "embspace/linalg.hpp"

namespace embspace::graph {

using linalg::Matrix;

// Undirected threshold graph over an embedding set. Vertices exist only for
// rows that carry at least one edge; adjacency is CSR with sorted neighbor
// lists. Immutable once built.
struct SimilarityGraph {
  std::vector<std::uint32_t> vertex_rows;  // vertex -> embedding row, ascending
  std::vector<std::uint64_t> offsets;      // size vertex_count + 1
  std::vector<std::uint32_t> neighbors;    // vertex ids, sorted per vertex
  double threshold = 0.0;
  std::uint64_t edge_count = 0;

  std::size_t vertex_count() const { return vertex_rows.size(); }
  std::uint32_t degree(std::uint32_t v) const {
    return static_cast<std::uint32_t>(offsets[v + 1] - offsets[v]);
  }
  std::span<const std::uint32_t> neighbors_of(std::uint32_t v) const {
    return std::span<const std::uint32_t>(neighbors.data() + offsets[v],
                                          offsets[v + 1] - offsets[v]);
  }
  bool has_edge(std::uint32_t u, std::uint32_t v) const;
};

enum class ThresholdScope {
  all_relations,      // pair-weighted mean over every same-label pair
  per_relation_mean,  // unweighted mean of per-relation means
};

struct ThresholdEstimate {
  double value = 0.0;
  bool exact = true;            // false when pair_cap forced sampling
  std::uint64_t pairs_used = 0;
};

// Mean Euclidean distance between same-label rows. Exact enumeration while
// the same-label pair count stays within pair_cap, seeded uniform sampling
// of pair_cap pairs beyond that.
ThresholdEstimate same_label_mean_distance(
    const embed::EmbeddingSet& x, std::uint64_t pair_cap, std::uint64_t seed,
    ThresholdScope scope = ThresholdScope::all_relations, int threads = 0);

// Edge (i, j) iff ||v_i - v_j|| < threshold, strict. The pair space is
// walked tile by tile; per-tile edge buffers are merged in tile order and
// every published structure is canonicalized, so the graph is identical for
// any thread count.
SimilarityGraph build_sesg(const Matrix& vectors, double threshold,
                           int threads = 0);

inline SimilarityGraph build_sesg(const embed::EmbeddingSet& x,
                                  double threshold, int threads = 0) {
  return build_sesg(x.vectors, threshold, threads);
}

// edge_count / C(n_basis, 2). The caller picks the basis (whole set or one
// component). n_basis < 2 raises ParameterError.
double density(const SimilarityGraph& g, std::size_t n_basis);
double pair_density(std::uint64_t edges, std::size_t n_basis);

struct DegreeHistogram {
  std::map<std::uint32_t, std::uint64_t> counts;  // degree -> vertices
  std::uint32_t max_degree = 0;
  std::uint64_t count_at_max = 0;
};

DegreeHistogram degree_histogram(const SimilarityGraph& g);

struct ComponentSet {
  // Per vertex: component id = smallest vertex id inside its component.
  std::vector<std::uint32_t> component_of;
  // (component id, size), largest first; equal sizes ordered by id.
  std::vector<std::pair<std::uint32_t, std::uint64_t>> sizes;

  std::vector<std::uint32_t> members(std::uint32_t component_id) const;
};

ComponentSet connected_components(const SimilarityGraph& g);

struct DistanceHistogram {
  std::map<std::uint32_t, std::uint64_t> counts;  // distance -> pair count
  std::uint64_t unreachable = 0;  // sampled-source pairs with no path
  std::size_t sources = 0;
};

// Unweighted BFS from max(1, ceil(fraction * |V|)) seeded source vertices.
// Distances to the sources themselves (0) are not counted.
DistanceHistogram sample_shortest_paths(const SimilarityGraph& g,
                                        double fraction, std::uint64_t seed,
                                        int threads = 0);

// Fractions of each label within the given vertices; labels are per
// embedding row.
std::map<std::string, double> label_distribution(
    std::span<const std::uint32_t> vertices, const SimilarityGraph& g,
    std::span<const std::string> labels_by_row);

struct HubNeighborhood {
  std::vector<std::uint32_t> hubs;      // seeded picks among max-degree ties
  std::vector<std::uint32_t> vertices;  // hubs plus sampled neighbors, sorted
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // induced, u < v
  double density = 0.0;  // over C(|vertices|, 2)
  bool fewer_hubs_than_requested = false;
};

HubNeighborhood hub_neighborhood(const SimilarityGraph& g, std::size_t n_hubs,
                                 std::size_t neighbors_per_hub,
                                 std::uint64_t seed);

// `u<TAB>v` per edge, u < v.
void write_edge_list(const SimilarityGraph& g, std::ostream& out);
// `vertex<TAB>embedding_row<TAB>label` per vertex.
void write_vertex_table(const SimilarityGraph& g,
                        std::span<const std::string> labels_by_row,
                        std::ostream& out);
// Line-delimited node-link records for external plotting.
void write_node_link(const HubNeighborhood& hood, const SimilarityGraph& g,
                     std::span<const std::string> labels_by_row,
                     std::ostream& out);

struct AnalyzeOptions {
  double sample_fraction = 0.001;
  std::uint64_t seed = 42;
  std::size_t n_hubs = 2;
  std::size_t neighbors_per_hub = 20;
  std::size_t component_label_reports = 5;
  int threads = 0;
};

struct ComponentReport {
  std::uint32_t id = 0;
  std::uint64_t size = 0;
  double density = 0.0;
  std::map<std::string, double> labels;
};

// The five analyses bundled for reporting: degree distribution, connected
// components, sampled shortest paths, label distribution of the largest
// components, and a hub-neighborhood case study.
struct GraphReport {
  std::size_t vertex_count = 0;
  std::uint64_t edge_count = 0;
  double density = 0.0;  // basis = vertex_count
  DegreeHistogram degrees;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> component_sizes;
  std::vector<ComponentReport> top_components;
  DistanceHistogram sampled_distances;
  HubNeighborhood hub;
};

GraphReport analyze(const SimilarityGraph& g,
                    std::span<const std::string> labels_by_row,
                    const AnalyzeOptions& options);

}  // namespace embspace::graph
