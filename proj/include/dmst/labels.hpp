#pragma once

// Component labels of local and ghost vertices, and the per-round steps that
// consume them: label exchange across the partition, relabeling of edges and
// redistribution with parallel-edge removal.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dmst/graph.hpp"
#include "dmst/grid_alltoall.hpp"
#include "dmst/sorting.hpp"

namespace dmst {

struct LabelMap {
  std::vector<VertexId> vertices;  // sorted local source vertices
  std::vector<VertexId> labels;    // label of vertices[i]
  std::unordered_map<VertexId, VertexId> ghost;

  static LabelMap identity(std::span<const WeightedEdge> sorted_edges) {
    LabelMap m;
    m.vertices = local_vertices(sorted_edges);
    m.labels = m.vertices;
    return m;
  }

  /// Label of a local source vertex, or nullptr.
  const VertexId* find_local(VertexId v) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
    if (it == vertices.end() || *it != v) return nullptr;
    return &labels[static_cast<std::size_t>(it - vertices.begin())];
  }

  VertexId& local(VertexId v) {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
    if (it == vertices.end() || *it != v) throw Error(Errc::unlabeled_vertex, "no local label for " + std::to_string(v));
    return labels[static_cast<std::size_t>(it - vertices.begin())];
  }

  VertexId operator()(VertexId v) const {
    if (const auto* l = find_local(v)) return *l;
    auto it = ghost.find(v);
    if (it == ghost.end()) throw Error(Errc::unlabeled_vertex, "vertex " + std::to_string(v) + " has no label");
    return it->second;
  }
};

struct LabelRecord {
  VertexId vertex;
  VertexId label;
};

/// Collective. For every local edge (u, v), the PEs that hold the reverse
/// edge (v, u) learn the label of u; one record per (PE, u). Fills
/// labels.ghost with the labels of all destinations that are not local
/// sources. Returns the number of records sent.
inline std::uint64_t exchange_labels(LabelMap& labels, const DistributedGraph& g, Communicator& comm) {
  const int p = comm.size();
  const int me = comm.rank();
  MessageBatch<LabelRecord> send(p);
  std::vector<VertexId> last_sent(p, kMaxVertex);  // sources are sorted, so dedup per (PE, u) is a scan
  std::uint64_t sent = 0;
  for (const auto& e : g.local_edges) {
    auto [lo, hi] = g.edge_pe_range(e.dst, e.src);
    if (lo < 0 || (lo == me && hi == me)) continue;
    const VertexId label = labels.local(e.src);
    for (int q = lo; q <= hi; ++q) {
      if (q == me || last_sent[q] == e.src) continue;
      // empty PEs inside the range cannot hold the edge
      if (g.lexmin[q] == kEmptySlice) continue;
      send[q].push_back({e.src, label});
      last_sent[q] = e.src;
      ++sent;
    }
  }
  auto recv = smart_alltoall(send, comm);
  labels.ghost.clear();
  for (const auto& from : recv) {
    for (const auto& r : from) {
      if (!labels.find_local(r.vertex)) labels.ghost[r.vertex] = r.label;
    }
  }
  for (const auto& e : g.local_edges) {
    if (!labels.find_local(e.dst) && !labels.ghost.contains(e.dst)) {
      throw Error(Errc::missing_ghost_label, "PE " + std::to_string(me) + " got no label for ghost " + std::to_string(e.dst));
    }
  }
  return sent;
}

/// (u, v, w, id) -> (L(u), L(v), w, id), dropping self-loops. Dropped ids are
/// appended to `dropped` when given.
inline std::vector<WeightedEdge> relabel(const LabelMap& labels, std::span<const WeightedEdge> edges,
                                         std::vector<EdgeId>* dropped = nullptr) {
  std::vector<WeightedEdge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    const VertexId u = labels(e.src);
    const VertexId v = labels(e.dst);
    if (u == v) {
      if (dropped && e.src < e.dst) dropped->push_back(e.id);
      continue;
    }
    out.push_back({u, v, e.weight, e.id});
  }
  return out;
}

/// Keeps the first edge of every (src, dst) run of a lex-sorted slice.
/// `before` is the last edge of the preceding nonempty slice, if any.
inline std::vector<WeightedEdge> dedup_sorted_runs(std::vector<WeightedEdge> sorted, const WeightedEdge* before,
                                                   std::vector<EdgeId>* dropped = nullptr) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const WeightedEdge* prev = out > 0 ? &sorted[out - 1] : before;
    if (prev && same_endpoints(*prev, sorted[i])) {
      if (dropped && sorted[i].src < sorted[i].dst) dropped->push_back(sorted[i].id);
      continue;
    }
    sorted[out++] = sorted[i];
  }
  sorted.resize(out);
  return sorted;
}

/// Last edge of the nearest nonempty slice on a lower rank, via one allgather.
inline std::optional<WeightedEdge> preceding_last_edge(std::span<const WeightedEdge> local, Communicator& comm) {
  struct Last {
    std::uint8_t has;
    WeightedEdge edge;
  };
  const auto lasts = comm.allgather(Last{static_cast<std::uint8_t>(!local.empty()), local.empty() ? WeightedEdge{} : local.back()});
  for (int r = comm.rank() - 1; r >= 0; --r) {
    if (lasts[r].has) return lasts[r].edge;
  }
  return std::nullopt;
}

/// Collective. Sorts globally by (src, dst, weight, id), keeps the lightest
/// edge per (src, dst) and rebuilds the boundary arrays.
inline DistributedGraph redistribute(std::vector<WeightedEdge> edges, Communicator& comm,
                                     std::vector<EdgeId>* dropped = nullptr) {
  edges = distributed_sort(std::move(edges), lex_less, comm);
  const auto before = preceding_last_edge(edges, comm);
  edges = dedup_sorted_runs(std::move(edges), before ? &*before : nullptr, dropped);
  return build_distributed_graph(std::move(edges), comm);
}

}  // namespace dmst
