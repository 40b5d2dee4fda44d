#pragma once

// Communication-free contraction of edges that are provably in the MSF
// because they are the lightest edge leaving a component whose vertices all
// live on this PE. Shared vertices take no part in it.

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "dmst/labels.hpp"
#include "dmst/oracle.hpp"

namespace dmst {

inline constexpr double kLocalEdgeFraction = 0.10;
inline constexpr double kLightFraction = 0.10;
inline constexpr std::size_t kMaxHashedPairs = std::size_t{1} << 20;

struct LocalContractionResult {
  std::vector<WeightedEdge> contracted_edges;  // sources and local destinations relabeled, no self-loops
  std::vector<EdgeId> mst_edge_ids;
  LabelMap local_label;
  bool applied = false;
};

namespace detail {

// Local view of a slice: dense indices for source vertices and, per edge,
// the index of the destination when it is a non-shared local vertex.
struct LocalView {
  std::vector<VertexId> vertices;
  std::vector<std::uint8_t> shared;
  std::vector<std::uint32_t> src_index;
  std::vector<std::int64_t> dst_index;  // -1 for cut edges
  std::size_t local_edges = 0;

  explicit LocalView(const DistributedGraph& g) : vertices(local_vertices(g.local_edges)), shared(vertices.size(), 0) {
    if (!vertices.empty()) {
      if (g.first_shared()) shared.front() = 1;
      if (g.last_shared()) shared.back() = 1;
    }
    src_index.reserve(g.local_edges.size());
    dst_index.reserve(g.local_edges.size());
    std::uint32_t s = 0;
    for (const auto& e : g.local_edges) {
      while (vertices[s] != e.src) ++s;
      src_index.push_back(s);
      auto it = std::lower_bound(vertices.begin(), vertices.end(), e.dst);
      std::int64_t d = -1;
      if (it != vertices.end() && *it == e.dst) {
        const auto idx = static_cast<std::size_t>(it - vertices.begin());
        if (!shared[idx] && !shared[s]) d = static_cast<std::int64_t>(idx);
      }
      dst_index.push_back(d);
      if (d >= 0) ++local_edges;
    }
  }
};

// Guarded Boruvka rounds over the edges in `active` (indices into the
// slice). Edges that become internal are removed from `active`.
inline void guarded_rounds(const DistributedGraph& g, const LocalView& view, std::vector<std::size_t>& active,
                           UnionFind& uf, std::vector<EdgeId>& mst) {
  const std::size_t n = view.vertices.size();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> best(n, kNone);
  while (true) {
    std::fill(best.begin(), best.end(), kNone);
    std::size_t kept = 0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t i = active[k];
      const std::size_t s = view.src_index[i];
      if (view.shared[s]) continue;
      const std::size_t cs = uf.find(s);
      if (view.dst_index[i] >= 0 && uf.find(static_cast<std::size_t>(view.dst_index[i])) == cs) continue;
      active[kept++] = i;
      if (best[cs] == kNone || key_less(g.local_edges[i], g.local_edges[best[cs]])) best[cs] = i;
    }
    active.resize(kept);
    bool merged = false;
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t i = best[c];
      // the lightest edge leaving the component must stay on this PE
      if (i == kNone || view.dst_index[i] < 0) continue;
      if (uf.unite(c, static_cast<std::size_t>(view.dst_index[i]))) {
        mst.push_back(g.local_edges[i].id);
        merged = true;
      }
    }
    if (!merged) return;
  }
}

}  // namespace detail

/// True iff at least 10% of the local edges have both endpoints as
/// non-shared sources on this PE. Local data only.
inline bool should_preprocess(const DistributedGraph& g) {
  if (g.local_edges.empty()) return false;
  const detail::LocalView view(g);
  return static_cast<double>(view.local_edges) >= kLocalEdgeFraction * static_cast<double>(g.local_edges.size());
}

/// Contracts local MSF edges. A component is merged along its lightest
/// incident edge only when that edge is local, so no lighter cut edge can be
/// overlooked. Runs one light-weight level first, then all edges.
inline LocalContractionResult local_boruvka_guarded(const DistributedGraph& g) {
  LocalContractionResult out;
  const detail::LocalView view(g);
  out.local_label.vertices = view.vertices;
  out.local_label.labels = view.vertices;
  if (g.local_edges.empty()) return out;
  out.applied = true;

  std::vector<Weight> weights;
  weights.reserve(g.local_edges.size());
  for (const auto& e : g.local_edges) weights.push_back(e.weight);
  auto mid = weights.begin() + static_cast<std::ptrdiff_t>(weights.size() / 2);
  std::nth_element(weights.begin(), mid, weights.end());
  const Weight pivot = *mid;

  UnionFind uf(view.vertices.size());
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < g.local_edges.size(); ++i) {
    if (g.local_edges[i].weight <= pivot) active.push_back(i);
  }
  detail::guarded_rounds(g, view, active, uf, out.mst_edge_ids);
  active.clear();
  for (std::size_t i = 0; i < g.local_edges.size(); ++i) active.push_back(i);
  detail::guarded_rounds(g, view, active, uf, out.mst_edge_ids);

  for (std::size_t v = 0; v < view.vertices.size(); ++v) out.local_label.labels[v] = view.vertices[uf.find(v)];
  out.contracted_edges.reserve(g.local_edges.size());
  for (std::size_t i = 0; i < g.local_edges.size(); ++i) {
    auto e = g.local_edges[i];
    const std::size_t s = uf.find(view.src_index[i]);
    if (view.dst_index[i] >= 0) {
      const std::size_t d = uf.find(static_cast<std::size_t>(view.dst_index[i]));
      if (s == d) continue;
      e.dst = view.vertices[d];
    }
    e.src = view.vertices[s];
    out.contracted_edges.push_back(e);
  }
  return out;
}

/// Lightest edge per (src, dst) pair, sorted lexicographically. Edges below
/// the light quantile are deduplicated through a hash set first so that
/// heavy parallels are dropped in one scan.
inline std::vector<WeightedEdge> dedup_parallel_hashed(std::vector<WeightedEdge> edges,
                                                       double light_fraction = kLightFraction) {
  if (edges.size() > 1) {
    std::vector<Weight> sample;
    for (std::size_t i = 0; i < edges.size(); i += 100) sample.push_back(edges[i].weight);
    auto q = sample.begin() + static_cast<std::ptrdiff_t>(light_fraction * static_cast<double>(sample.size() - 1));
    std::nth_element(sample.begin(), q, sample.end());
    const Weight pivot = *q;

    std::vector<WeightedEdge> light;
    for (const auto& e : edges) {
      if (e.weight < pivot) light.push_back(e);
    }
    if (!light.empty() && light.size() <= kMaxHashedPairs) {
      std::sort(light.begin(), light.end(), lex_less);
      light = dedup_sorted_runs(std::move(light), nullptr);
      struct PairHash {
        std::size_t operator()(const std::pair<VertexId, VertexId>& p) const { return hash_combine(p.first, p.second); }
      };
      std::unordered_set<std::pair<VertexId, VertexId>, PairHash> seen;
      seen.reserve(light.size());
      for (const auto& e : light) seen.insert({e.src, e.dst});
      std::vector<WeightedEdge> kept = std::move(light);
      for (const auto& e : edges) {
        if (e.weight >= pivot && !seen.contains({e.src, e.dst})) kept.push_back(e);
      }
      edges = std::move(kept);
    }
  }
  std::sort(edges.begin(), edges.end(), lex_less);
  return dedup_sorted_runs(std::move(edges), nullptr);
}

struct PreprocessStats {
  bool applied = false;         // some PE contracted
  bool used_full_sort = false;  // boundary runs too long, fell back to a global sort
  VertexCounts vertices_before;
  VertexCounts vertices_after;
  std::uint64_t edges_before = 0;
  std::uint64_t edges_after = 0;
};

/// Collective. Restores the distributed graph invariants after local
/// contraction: ghost destinations get their new labels, parallels are
/// removed and the runs of shared boundary vertices, which may have been
/// reordered by relabeling, are merged on the first PE of the run.
inline DistributedGraph reestablish_sorted(LocalContractionResult& local, const DistributedGraph& original,
                                           Communicator& comm, bool* used_full_sort = nullptr) {
  const int p = comm.size();
  const int me = comm.rank();
  exchange_labels(local.local_label, original, comm);
  std::vector<WeightedEdge> edges;
  edges.reserve(local.contracted_edges.size());
  for (auto e : local.contracted_edges) {
    e.dst = local.local_label(e.dst);
    if (e.src != e.dst) edges.push_back(e);
  }
  local.contracted_edges.clear();
  local.contracted_edges.shrink_to_fit();
  edges = dedup_parallel_hashed(std::move(edges));

  // The run of the first source continues a run that starts on an earlier
  // PE; it moves to that PE.
  int leader = -1;
  std::size_t piece = 0;
  if (original.first_shared()) {
    const VertexId s = original.local_edges.front().src;
    leader = original.vertex_pe_range(s).first;
    while (piece < edges.size() && edges[piece].src == s) ++piece;
  }
  const bool too_long = 2 * piece > edges.size();
  if (comm.allreduce(too_long, ops::logical_or{})) {
    if (used_full_sort) *used_full_sort = true;
    return redistribute(std::move(edges), comm);
  }
  MessageBatch<WeightedEdge> send(p);
  if (leader >= 0 && leader != me) {
    send[leader].assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(piece));
    edges.erase(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(piece));
  }
  auto recv = comm.alltoallv(send);
  bool received = false;
  for (auto& part : recv) {
    if (part.empty()) continue;
    edges.insert(edges.end(), part.begin(), part.end());
    received = true;
  }
  if (received) {
    std::sort(edges.begin(), edges.end(), lex_less);
    edges = dedup_sorted_runs(std::move(edges), nullptr);
  }
  return build_distributed_graph(std::move(edges), comm);
}

struct PreprocessOutput {
  DistributedGraph graph;
  std::vector<EdgeId> mst_edge_ids;  // local share
  PreprocessStats stats;
};

/// Collective. Local contraction on PEs where it pays off, then one global
/// repair step. Returns the input unchanged if no PE contracts.
inline PreprocessOutput local_preprocessing(const DistributedGraph& g, Communicator& comm) {
  PreprocessOutput out;
  out.stats.vertices_before = global_vertex_counts(g, comm);
  out.stats.edges_before = global_edge_count(g, comm);
  LocalContractionResult local;
  if (should_preprocess(g)) {
    local = local_boruvka_guarded(g);
  } else {
    local.local_label = LabelMap::identity(g.local_edges);
    local.contracted_edges = g.local_edges;
  }
  out.stats.applied = comm.allreduce(local.applied, ops::logical_or{});
  if (!out.stats.applied) {
    out.graph = g;
    out.stats.vertices_after = out.stats.vertices_before;
    out.stats.edges_after = out.stats.edges_before;
    return out;
  }
  out.mst_edge_ids = std::move(local.mst_edge_ids);
  out.graph = reestablish_sorted(local, g, comm, &out.stats.used_full_sort);
  out.stats.vertices_after = global_vertex_counts(out.graph, comm);
  out.stats.edges_after = global_edge_count(out.graph, comm);
  return out;
}

}  // namespace dmst
