#include "embspace/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "embspace/errors.hpp"
#include "embspace/parallel.hpp"
#include "embspace/rng.hpp"

namespace embspace::graph {

bool SimilarityGraph::has_edge(std::uint32_t u, std::uint32_t v) const {
  const auto adj = neighbors_of(u);
  return std::binary_search(adj.begin(), adj.end(), v);
}

namespace {

struct LabelGroups {
  std::vector<std::string> names;               // first-appearance order
  std::vector<std::vector<std::uint32_t>> rows; // per label
};

LabelGroups group_by_label(std::span<const std::string> labels) {
  LabelGroups groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto [it, inserted] = index.emplace(labels[i], groups.names.size());
    if (inserted) {
      groups.names.push_back(labels[i]);
      groups.rows.emplace_back();
    }
    groups.rows[it->second].push_back(static_cast<std::uint32_t>(i));
  }
  return groups;
}

std::uint64_t pair_count(std::uint64_t g) { return g * (g - 1) / 2; }

// Index p in [0, g*(g-1)/2) -> ordered pair (i, j), i < j, lexicographic.
std::pair<std::uint64_t, std::uint64_t> decode_pair(std::uint64_t p,
                                                    std::uint64_t g) {
  double gd = static_cast<double>(g);
  std::uint64_t i = static_cast<std::uint64_t>(
      (2.0 * gd - 1.0 - std::sqrt((2.0 * gd - 1.0) * (2.0 * gd - 1.0) -
                                  8.0 * static_cast<double>(p))) /
      2.0);
  // Correct any floating-point drift at block boundaries.
  auto before = [g](std::uint64_t i) { return i * (2 * g - i - 1) / 2; };
  while (i > 0 && before(i) > p) --i;
  while (before(i + 1) <= p) ++i;
  const std::uint64_t j = p - before(i) + i + 1;
  return {i, j};
}

// Sum of same-label pair distances over a fixed block range of one group's
// pair space.
double group_block_sum(const Matrix& vectors,
                       std::span<const std::uint32_t> rows, std::uint64_t lo,
                       std::uint64_t hi) {
  const std::size_t d = vectors.cols();
  double sum = 0.0;
  auto [i, j] = decode_pair(lo, rows.size());
  for (std::uint64_t p = lo; p < hi; ++p) {
    sum += std::sqrt(linalg::squared_distance(vectors.row(rows[i]).data(),
                                              vectors.row(rows[j]).data(), d));
    if (++j == rows.size()) {
      ++i;
      j = i + 1;
    }
  }
  return sum;
}

struct GroupMean {
  double sum = 0.0;
  std::uint64_t pairs = 0;
};

GroupMean exact_group_mean(const Matrix& vectors,
                           std::span<const std::uint32_t> rows, int threads) {
  const std::uint64_t pairs = pair_count(rows.size());
  constexpr std::uint64_t kBlock = 1 << 16;
  const std::size_t n_blocks = (pairs + kBlock - 1) / kBlock;
  std::vector<double> partial(n_blocks, 0.0);
  parallel_blocks(pairs, kBlock, threads,
                  [&](std::size_t b, std::size_t lo, std::size_t hi) {
                    partial[b] = group_block_sum(vectors, rows, lo, hi);
                  });
  GroupMean out;
  out.pairs = pairs;
  for (double v : partial) out.sum += v;  // block order, thread-independent
  return out;
}

}  // namespace

ThresholdEstimate same_label_mean_distance(const embed::EmbeddingSet& x,
                                           std::uint64_t pair_cap,
                                           std::uint64_t seed,
                                           ThresholdScope scope, int threads) {
  if (x.labels.size() != x.size()) {
    throw DimensionError("embedding set has no labels to group by");
  }
  const LabelGroups groups = group_by_label(x.labels);
  std::uint64_t total_pairs = 0;
  for (const auto& rows : groups.rows) total_pairs += pair_count(rows.size());
  if (total_pairs == 0) {
    throw DegenerateLabelsError("no same-label pair exists");
  }

  ThresholdEstimate est;
  if (total_pairs <= pair_cap) {
    est.exact = true;
    est.pairs_used = total_pairs;
    if (scope == ThresholdScope::all_relations) {
      double sum = 0.0;
      for (const auto& rows : groups.rows) {
        if (rows.size() < 2) continue;
        sum += exact_group_mean(x.vectors, rows, threads).sum;
      }
      est.value = sum / static_cast<double>(total_pairs);
    } else {
      double mean_of_means = 0.0;
      std::size_t groups_with_pairs = 0;
      for (const auto& rows : groups.rows) {
        if (rows.size() < 2) continue;
        const GroupMean gm = exact_group_mean(x.vectors, rows, threads);
        mean_of_means += gm.sum / static_cast<double>(gm.pairs);
        ++groups_with_pairs;
      }
      est.value = mean_of_means / static_cast<double>(groups_with_pairs);
    }
    return est;
  }

  // Sampled mode: uniform draws over the concatenated same-label pair space.
  if (scope == ThresholdScope::per_relation_mean) {
    throw ParameterError(
        "per-relation threshold requires exact enumeration; raise pair_cap");
  }
  std::vector<std::uint64_t> cumulative;  // end offset per group with pairs
  std::vector<std::size_t> group_of;
  cumulative.reserve(groups.rows.size());
  std::uint64_t running = 0;
  for (std::size_t gidx = 0; gidx < groups.rows.size(); ++gidx) {
    const std::uint64_t pairs = pair_count(groups.rows[gidx].size());
    if (pairs == 0) continue;
    running += pairs;
    cumulative.push_back(running);
    group_of.push_back(gidx);
  }

  const std::size_t d = x.vectors.cols();
  constexpr std::uint64_t kBlock = 1 << 14;
  const std::size_t n_blocks = (pair_cap + kBlock - 1) / kBlock;
  std::vector<double> partial(n_blocks, 0.0);
  parallel_blocks(pair_cap, kBlock, threads,
                  [&](std::size_t b, std::size_t lo, std::size_t hi) {
                    Rng rng = Rng::derive(seed, b);
                    double sum = 0.0;
                    for (std::size_t s = lo; s < hi; ++s) {
                      const std::uint64_t pick = rng.next_below(total_pairs);
                      const auto it = std::upper_bound(cumulative.begin(),
                                                       cumulative.end(), pick);
                      const std::size_t slot =
                          static_cast<std::size_t>(it - cumulative.begin());
                      const auto& rows = groups.rows[group_of[slot]];
                      const std::uint64_t base =
                          slot == 0 ? 0 : cumulative[slot - 1];
                      const auto [i, j] = decode_pair(pick - base, rows.size());
                      sum += std::sqrt(linalg::squared_distance(
                          x.vectors.row(rows[i]).data(),
                          x.vectors.row(rows[j]).data(), d));
                    }
                    partial[b] = sum;
                  });
  double sum = 0.0;
  for (double v : partial) sum += v;
  est.exact = false;
  est.pairs_used = pair_cap;
  est.value = sum / static_cast<double>(pair_cap);
  return est;
}

SimilarityGraph build_sesg(const Matrix& vectors, double threshold,
                           int threads) {
  if (threshold < 0.0) {
    throw ParameterError("similarity threshold must be >= 0");
  }
  const std::size_t n = vectors.rows();
  const std::size_t d = vectors.cols();
  const double threshold_sq = threshold * threshold;

  SimilarityGraph g;
  g.threshold = threshold;
  if (n < 2) {
    g.offsets.assign(1, 0);
    return g;
  }

  using Edge = std::pair<std::uint32_t, std::uint32_t>;
  constexpr std::size_t kTile = 1024;
  const std::size_t n_tiles = (n + kTile - 1) / kTile;
  const std::size_t n_tasks = n_tiles * (n_tiles + 1) / 2;
  std::vector<std::vector<Edge>> task_edges(n_tasks);

  // Tile (bi, bj), bi <= bj, at task index bi*n_tiles - bi*(bi-1)/2 + (bj-bi).
  parallel_blocks(n_tasks, 1, threads, [&](std::size_t task, std::size_t,
                                           std::size_t) {
    // Invert the task index to its tile coordinates.
    std::size_t bi = 0;
    std::size_t base = 0;
    while (base + (n_tiles - bi) <= task) {
      base += n_tiles - bi;
      ++bi;
    }
    const std::size_t bj = bi + (task - base);

    const std::size_t i_lo = bi * kTile, i_hi = std::min(n, i_lo + kTile);
    const std::size_t j_lo = bj * kTile, j_hi = std::min(n, j_lo + kTile);
    auto& edges = task_edges[task];
    for (std::size_t i = i_lo; i < i_hi; ++i) {
      const double* vi = vectors.row(i).data();
      const std::size_t j_start = bi == bj ? i + 1 : j_lo;
      for (std::size_t j = j_start; j < j_hi; ++j) {
        if (linalg::squared_distance(vi, vectors.row(j).data(), d) <
            threshold_sq) {
          edges.emplace_back(static_cast<std::uint32_t>(i),
                             static_cast<std::uint32_t>(j));
        }
      }
    }
  });

  // Degrees over embedding rows, then a dense vertex numbering for rows
  // that carry edges.
  std::vector<std::uint32_t> degree(n, 0);
  std::uint64_t edge_total = 0;
  for (const auto& edges : task_edges) {
    edge_total += edges.size();
    for (const auto& [i, j] : edges) {
      ++degree[i];
      ++degree[j];
    }
  }
  g.edge_count = edge_total;
  constexpr std::uint32_t kNoVertex = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> row_to_vertex(n, kNoVertex);
  for (std::size_t i = 0; i < n; ++i) {
    if (degree[i] > 0) {
      row_to_vertex[i] = static_cast<std::uint32_t>(g.vertex_rows.size());
      g.vertex_rows.push_back(static_cast<std::uint32_t>(i));
    }
  }

  const std::size_t v_count = g.vertex_rows.size();
  g.offsets.assign(v_count + 1, 0);
  for (std::size_t v = 0; v < v_count; ++v) {
    g.offsets[v + 1] = g.offsets[v] + degree[g.vertex_rows[v]];
  }
  g.neighbors.assign(2 * edge_total, 0);
  std::vector<std::uint64_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
  for (auto& edges : task_edges) {
    for (const auto& [i, j] : edges) {
      const std::uint32_t u = row_to_vertex[i];
      const std::uint32_t v = row_to_vertex[j];
      g.neighbors[cursor[u]++] = v;
      g.neighbors[cursor[v]++] = u;
    }
    edges.clear();
    edges.shrink_to_fit();  // bound peak memory while the CSR fills
  }
  // Sorted adjacency makes the final layout independent of fill order.
  parallel_for(v_count, threads, [&](std::size_t v) {
    std::sort(g.neighbors.begin() + g.offsets[v],
              g.neighbors.begin() + g.offsets[v + 1]);
  });
  return g;
}

double pair_density(std::uint64_t edges, std::size_t n_basis) {
  if (n_basis < 2) {
    throw ParameterError("density basis must be at least 2");
  }
  const double possible = 0.5 * static_cast<double>(n_basis) *
                          static_cast<double>(n_basis - 1);
  return static_cast<double>(edges) / possible;
}

double density(const SimilarityGraph& g, std::size_t n_basis) {
  return pair_density(g.edge_count, n_basis);
}

DegreeHistogram degree_histogram(const SimilarityGraph& g) {
  DegreeHistogram hist;
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
    ++hist.counts[g.degree(v)];
  }
  if (!hist.counts.empty()) {
    const auto last = std::prev(hist.counts.end());
    hist.max_degree = last->first;
    hist.count_at_max = last->second;
  }
  return hist;
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];  // path halving
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint64_t> size_;
};

}  // namespace

std::vector<std::uint32_t> ComponentSet::members(
    std::uint32_t component_id) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < component_of.size(); ++v) {
    if (component_of[v] == component_id) out.push_back(v);
  }
  return out;
}

ComponentSet connected_components(const SimilarityGraph& g) {
  const std::size_t v_count = g.vertex_count();
  UnionFind uf(v_count);
  for (std::uint32_t v = 0; v < v_count; ++v) {
    for (std::uint32_t u : g.neighbors_of(v)) {
      if (u > v) uf.unite(v, u);
    }
  }
  ComponentSet out;
  out.component_of.assign(v_count, 0);
  // Ascending scan: the first vertex of each component names it.
  std::vector<std::uint32_t> root_to_id(v_count, static_cast<std::uint32_t>(-1));
  std::unordered_map<std::uint32_t, std::uint64_t> size_of;
  for (std::uint32_t v = 0; v < v_count; ++v) {
    const std::uint32_t root = uf.find(v);
    if (root_to_id[root] == static_cast<std::uint32_t>(-1)) {
      root_to_id[root] = v;
    }
    out.component_of[v] = root_to_id[root];
    ++size_of[root_to_id[root]];
  }
  out.sizes.assign(size_of.begin(), size_of.end());
  std::sort(out.sizes.begin(), out.sizes.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second > b.second
                                          : a.first < b.first;
            });
  return out;
}

DistanceHistogram sample_shortest_paths(const SimilarityGraph& g,
                                        double fraction, std::uint64_t seed,
                                        int threads) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw ParameterError("sample fraction must be in (0, 1]");
  }
  const std::size_t v_count = g.vertex_count();
  DistanceHistogram out;
  if (v_count == 0) return out;

  const std::size_t wanted = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(fraction * static_cast<double>(v_count))));
  const std::size_t n_sources = std::min(wanted, v_count);

  // Seeded partial Fisher-Yates over the vertex ids.
  std::vector<std::uint32_t> pool(v_count);
  std::iota(pool.begin(), pool.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < n_sources; ++i) {
    const std::size_t pick =
        i + static_cast<std::size_t>(rng.next_below(v_count - i));
    std::swap(pool[i], pool[pick]);
  }
  out.sources = n_sources;

  constexpr std::uint32_t kUnreached = static_cast<std::uint32_t>(-1);
  std::vector<std::map<std::uint32_t, std::uint64_t>> histograms(n_sources);
  std::vector<std::uint64_t> unreachable(n_sources, 0);
  parallel_for(n_sources, threads, [&](std::size_t s) {
    std::vector<std::uint32_t> dist(v_count, kUnreached);
    std::vector<std::uint32_t> frontier{pool[s]};
    dist[pool[s]] = 0;
    std::uint64_t reached = 0;
    auto& hist = histograms[s];
    while (!frontier.empty()) {
      std::vector<std::uint32_t> next;
      for (std::uint32_t v : frontier) {
        const std::uint32_t dv = dist[v] + 1;
        for (std::uint32_t u : g.neighbors_of(v)) {
          if (dist[u] != kUnreached) continue;
          dist[u] = dv;
          next.push_back(u);
          ++hist[dv];
          ++reached;
        }
      }
      frontier = std::move(next);
    }
    unreachable[s] = v_count - 1 - reached;  // excludes the source itself
  });
  for (std::size_t s = 0; s < n_sources; ++s) {
    for (const auto& [d, c] : histograms[s]) out.counts[d] += c;
    out.unreachable += unreachable[s];
  }
  return out;
}

std::map<std::string, double> label_distribution(
    std::span<const std::uint32_t> vertices, const SimilarityGraph& g,
    std::span<const std::string> labels_by_row) {
  if (vertices.empty()) {
    throw EmptyInputError("label distribution of an empty vertex set");
  }
  std::map<std::string, std::uint64_t> counts;
  for (std::uint32_t v : vertices) {
    ++counts[labels_by_row[g.vertex_rows[v]]];
  }
  std::map<std::string, double> out;
  const double inv = 1.0 / static_cast<double>(vertices.size());
  for (const auto& [label, c] : counts) {
    out[label] = static_cast<double>(c) * inv;
  }
  return out;
}

HubNeighborhood hub_neighborhood(const SimilarityGraph& g, std::size_t n_hubs,
                                 std::size_t neighbors_per_hub,
                                 std::uint64_t seed) {
  if (g.vertex_count() == 0) {
    throw EmptyInputError("hub neighborhood of an empty graph");
  }
  std::uint32_t max_degree = 0;
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
    max_degree = std::max(max_degree, g.degree(v));
  }
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(v) == max_degree) candidates.push_back(v);
  }

  HubNeighborhood hood;
  if (candidates.size() < n_hubs) {
    hood.fewer_hubs_than_requested = true;
    n_hubs = candidates.size();
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < n_hubs; ++i) {
    const std::size_t pick =
        i + static_cast<std::size_t>(rng.next_below(candidates.size() - i));
    std::swap(candidates[i], candidates[pick]);
  }
  hood.hubs.assign(candidates.begin(), candidates.begin() + n_hubs);
  std::sort(hood.hubs.begin(), hood.hubs.end());

  std::vector<std::uint32_t> chosen = hood.hubs;
  for (std::size_t h = 0; h < hood.hubs.size(); ++h) {
    const auto adj = g.neighbors_of(hood.hubs[h]);
    std::vector<std::uint32_t> local(adj.begin(), adj.end());
    Rng hub_rng = Rng::derive(seed, h);
    const std::size_t take = std::min(neighbors_per_hub, local.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t pick =
          i + static_cast<std::size_t>(hub_rng.next_below(local.size() - i));
      std::swap(local[i], local[pick]);
      chosen.push_back(local[i]);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  hood.vertices = std::move(chosen);

  for (std::size_t a = 0; a < hood.vertices.size(); ++a) {
    for (std::size_t b = a + 1; b < hood.vertices.size(); ++b) {
      if (g.has_edge(hood.vertices[a], hood.vertices[b])) {
        hood.edges.emplace_back(hood.vertices[a], hood.vertices[b]);
      }
    }
  }
  hood.density = hood.vertices.size() >= 2
                     ? pair_density(hood.edges.size(), hood.vertices.size())
                     : 0.0;
  return hood;
}

void write_edge_list(const SimilarityGraph& g, std::ostream& out) {
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
    for (std::uint32_t u : g.neighbors_of(v)) {
      if (u > v) out << v << "\t" << u << "\n";
    }
  }
}

void write_vertex_table(const SimilarityGraph& g,
                        std::span<const std::string> labels_by_row,
                        std::ostream& out) {
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
    const std::uint32_t row = g.vertex_rows[v];
    out << v << "\t" << row << "\t"
        << (row < labels_by_row.size() ? labels_by_row[row] : "") << "\n";
  }
}

void write_node_link(const HubNeighborhood& hood, const SimilarityGraph& g,
                     std::span<const std::string> labels_by_row,
                     std::ostream& out) {
  using nlohmann::ordered_json;
  for (std::uint32_t v : hood.vertices) {
    ordered_json node;
    node["type"] = "node";
    node["id"] = v;
    const std::uint32_t row = g.vertex_rows[v];
    node["label"] = row < labels_by_row.size() ? labels_by_row[row] : "";
    node["degree"] = g.degree(v);
    node["hub"] = std::binary_search(hood.hubs.begin(), hood.hubs.end(), v);
    out << node.dump() << "\n";
  }
  for (const auto& [u, v] : hood.edges) {
    ordered_json link;
    link["type"] = "link";
    link["source"] = u;
    link["target"] = v;
    out << link.dump() << "\n";
  }
}

GraphReport analyze(const SimilarityGraph& g,
                    std::span<const std::string> labels_by_row,
                    const AnalyzeOptions& options) {
  GraphReport report;
  report.vertex_count = g.vertex_count();
  report.edge_count = g.edge_count;
  if (report.vertex_count >= 2) {
    report.density = density(g, report.vertex_count);
  }
  report.degrees = degree_histogram(g);
  if (report.vertex_count == 0) return report;

  const ComponentSet components = connected_components(g);
  report.component_sizes = components.sizes;

  // Per-edge component lookup for component densities.
  std::unordered_map<std::uint32_t, std::uint64_t> component_edges;
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
    for (std::uint32_t u : g.neighbors_of(v)) {
      if (u > v) ++component_edges[components.component_of[v]];
    }
  }
  const std::size_t top = std::min<std::size_t>(
      options.component_label_reports, components.sizes.size());
  for (std::size_t c = 0; c < top; ++c) {
    ComponentReport cr;
    cr.id = components.sizes[c].first;
    cr.size = components.sizes[c].second;
    const auto members = components.members(cr.id);
    cr.labels = labels_by_row.empty()
                    ? std::map<std::string, double>{}
                    : label_distribution(members, g, labels_by_row);
    cr.density = cr.size >= 2
                     ? pair_density(component_edges[cr.id],
                                    static_cast<std::size_t>(cr.size))
                     : 0.0;
    report.top_components.push_back(std::move(cr));
  }

  report.sampled_distances = sample_shortest_paths(
      g, options.sample_fraction, options.seed, options.threads);
  report.hub = hub_neighborhood(g, options.n_hubs, options.neighbors_per_hub,
                                options.seed);
  return report;
}

}  // namespace embspace::graph
