#pragma once

// 1D-partitioned distributed edge list. Every PE holds a contiguous slice of
// the globally sorted directed edge sequence plus the replicated first and
// last edge of every slice, which locates the home PE of any vertex or edge
// by binary search without communication.

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dmst/sorting.hpp"
#include "dmst/transport.hpp"
#include "dmst/types.hpp"

namespace dmst {

enum class VertexClass { Local, Ghost, SharedWithPrev, SharedWithNext, SharedBoth };

inline const char* vertex_class_name(VertexClass c) {
  switch (c) {
    case VertexClass::Local: return "Local";
    case VertexClass::Ghost: return "Ghost";
    case VertexClass::SharedWithPrev: return "SharedWithPrev";
    case VertexClass::SharedWithNext: return "SharedWithNext";
    case VertexClass::SharedBoth: return "SharedBoth";
  }
  return "?";
}

/// Sentinel entry for a PE whose slice is empty.
inline constexpr WeightedEdge kEmptySlice{kMaxVertex, kMaxVertex, kMaxWeight, kNoEdge};

inline bool is_empty_slice(const WeightedEdge& e) { return e.src == kMaxVertex && e.dst == kMaxVertex; }

inline bool pair_less(VertexId s1, VertexId d1, VertexId s2, VertexId d2) {
  return s1 < s2 || (s1 == s2 && d1 < d2);
}

struct DistributedGraph {
  int rank = 0;
  int num_pes = 1;
  std::vector<WeightedEdge> local_edges;
  std::vector<WeightedEdge> lexmin;  // first edge per PE, sentinel if empty
  std::vector<WeightedEdge> lexmax;  // last edge per PE, sentinel if empty
  std::vector<int> nonempty;         // ranks with a nonempty slice, ascending

  bool empty_slice() const { return local_edges.empty(); }
  std::size_t num_local_edges() const { return local_edges.size(); }

  int prev_nonempty(int r) const {
    auto it = std::lower_bound(nonempty.begin(), nonempty.end(), r);
    return it == nonempty.begin() ? -1 : *(it - 1);
  }
  int next_nonempty(int r) const {
    auto it = std::upper_bound(nonempty.begin(), nonempty.end(), r);
    return it == nonempty.end() ? -1 : *it;
  }

  /// The first vertex of this slice also starts a run on an earlier PE.
  bool first_shared() const {
    if (local_edges.empty()) return false;
    const int prev = prev_nonempty(rank);
    return prev >= 0 && lexmax[prev].src == local_edges.front().src;
  }
  /// The last vertex of this slice continues on a later PE.
  bool last_shared() const {
    if (local_edges.empty()) return false;
    const int next = next_nonempty(rank);
    return next >= 0 && lexmin[next].src == local_edges.back().src;
  }

  /// True iff v's edge run spans more than one PE (replicated data only).
  bool is_shared_vertex(VertexId v) const {
    auto [lo, hi] = vertex_pe_range(v);
    return lo >= 0 && lo != hi;
  }

  /// First and last PE whose slice contains edges with src == v, or (-1,-1).
  std::pair<int, int> vertex_pe_range(VertexId v) const {
    // nonempty slices are ordered, so src ranges are monotone in rank
    auto first = std::partition_point(nonempty.begin(), nonempty.end(), [&](int r) { return lexmax[r].src < v; });
    if (first == nonempty.end() || lexmin[*first].src > v) return {-1, -1};
    auto last = std::partition_point(first, nonempty.end(), [&](int r) { return lexmin[r].src <= v; });
    return {*first, *(last - 1)};
  }

  /// First and last PE whose slice may contain edges (src, dst, *).
  std::pair<int, int> edge_pe_range(VertexId src, VertexId dst) const {
    auto first = std::partition_point(nonempty.begin(), nonempty.end(),
                                      [&](int r) { return pair_less(lexmax[r].src, lexmax[r].dst, src, dst); });
    if (first == nonempty.end() || pair_less(src, dst, lexmin[*first].src, lexmin[*first].dst)) return {-1, -1};
    auto last = std::partition_point(first, nonempty.end(), [&](int r) {
      return !pair_less(src, dst, lexmin[r].src, lexmin[r].dst);
    });
    return {*first, *(last - 1)};
  }

  bool has_local_src(VertexId v) const {
    auto it = std::partition_point(local_edges.begin(), local_edges.end(),
                                   [&](const WeightedEdge& e) { return e.src < v; });
    return it != local_edges.end() && it->src == v;
  }
};

/// Home PE of the edge key (src, dst): the first PE whose slice reaches the
/// key, i.e. the first PE holding (src, dst, *) when such edges exist. For a
/// shared vertex v queried as (v, 0) this is the first PE holding v's run.
/// Keys beyond every slice map to the last nonempty PE; an edgeless graph
/// maps everything to PE 0.
inline int home_pe(const DistributedGraph& g, VertexId src, VertexId dst) {
  if (g.nonempty.empty()) return 0;
  auto it = std::partition_point(g.nonempty.begin(), g.nonempty.end(), [&](int r) {
    return pair_less(g.lexmax[r].src, g.lexmax[r].dst, src, dst);
  });
  return it == g.nonempty.end() ? g.nonempty.back() : *it;
}

/// PE that owns the (non-shared) vertex v; for a shared vertex, the last PE
/// of its run.
inline int vertex_home_pe(const DistributedGraph& g, VertexId v) {
  if (g.nonempty.empty()) return 0;
  auto it = std::partition_point(g.nonempty.begin(), g.nonempty.end(), [&](int r) { return g.lexmin[r].src <= v; });
  return it == g.nonempty.begin() ? g.nonempty.front() : *(it - 1);
}

/// Local classification from replicated boundaries; never communicates.
inline VertexClass classify_vertex(VertexId v, const DistributedGraph& g) {
  if (!g.has_local_src(v)) {
    const bool as_dst =
        std::any_of(g.local_edges.begin(), g.local_edges.end(), [&](const WeightedEdge& e) { return e.dst == v; });
    if (as_dst) return VertexClass::Ghost;
    throw Error(Errc::unknown_vertex, "vertex " + std::to_string(v) + " does not occur on PE " + std::to_string(g.rank));
  }
  const bool prev = g.first_shared() && g.local_edges.front().src == v;
  const bool next = g.last_shared() && g.local_edges.back().src == v;
  if (prev && next) return VertexClass::SharedBoth;
  if (prev) return VertexClass::SharedWithPrev;
  if (next) return VertexClass::SharedWithNext;
  return VertexClass::Local;
}

inline bool is_locally_sorted(std::span<const WeightedEdge> edges) {
  return std::is_sorted(edges.begin(), edges.end(), lex_less);
}

/// Collective. Builds the replicated boundary arrays with one allgather of
/// each PE's first and last edge.
inline DistributedGraph build_distributed_graph(std::vector<WeightedEdge> local_sorted_edges, Communicator& comm) {
  if (!is_locally_sorted(local_sorted_edges)) {
    throw Error(Errc::local_order_violation, "local slice of PE " + std::to_string(comm.rank()) + " is unsorted");
  }
  struct Bounds {
    WeightedEdge first;
    WeightedEdge last;
  };
  Bounds mine{kEmptySlice, kEmptySlice};
  if (!local_sorted_edges.empty()) mine = {local_sorted_edges.front(), local_sorted_edges.back()};
  const auto all = comm.allgather(mine);

  DistributedGraph g;
  g.rank = comm.rank();
  g.num_pes = comm.size();
  g.local_edges = std::move(local_sorted_edges);
  g.lexmin.reserve(all.size());
  g.lexmax.reserve(all.size());
  for (int r = 0; r < comm.size(); ++r) {
    g.lexmin.push_back(all[r].first);
    g.lexmax.push_back(all[r].last);
    if (!is_empty_slice(all[r].first)) g.nonempty.push_back(r);
  }
  for (std::size_t k = 1; k < g.nonempty.size(); ++k) {
    if (lex_less(g.lexmin[g.nonempty[k]], g.lexmax[g.nonempty[k - 1]])) {
      throw Error(Errc::local_order_violation,
                  "slices of PE " + std::to_string(g.nonempty[k - 1]) + " and " + std::to_string(g.nonempty[k]) +
                      " overlap");
    }
  }
  return g;
}

/// Distinct source vertices of a sorted slice.
inline std::vector<VertexId> local_vertices(std::span<const WeightedEdge> sorted_edges) {
  std::vector<VertexId> out;
  for (const auto& e : sorted_edges) {
    if (out.empty() || out.back() != e.src) out.push_back(e.src);
  }
  return out;
}

struct VertexCounts {
  std::uint64_t total = 0;       // distinct vertices, shared ones counted once
  std::uint64_t non_shared = 0;  // vertices whose run lies on a single PE
  std::uint64_t shared = 0;
  VertexCounts operator+(const VertexCounts& o) const {
    return {total + o.total, non_shared + o.non_shared, shared + o.shared};
  }
};

inline VertexCounts local_vertex_counts(const DistributedGraph& g) {
  VertexCounts c;
  const auto verts = local_vertices(g.local_edges);
  if (verts.empty()) return c;
  const bool first = g.first_shared();
  const bool last = g.last_shared();
  std::uint64_t shared_here = (first ? 1 : 0) + (last ? 1 : 0);
  if (first && last && verts.size() == 1) shared_here = 1;
  c.non_shared = verts.size() - shared_here;
  // a shared vertex is counted by the first PE of its run
  c.shared = (last && !(first && verts.size() == 1)) ? 1 : 0;
  c.total = c.non_shared + c.shared;
  return c;
}

/// Collective.
inline VertexCounts global_vertex_counts(const DistributedGraph& g, Communicator& comm) {
  return comm.allreduce(local_vertex_counts(g), ops::sum{});
}

inline std::uint64_t global_edge_count(const DistributedGraph& g, Communicator& comm) {
  return comm.allreduce(static_cast<std::uint64_t>(g.local_edges.size()), ops::sum{});
}

/// Whole edge sequence in rank order, replicated on every PE. Test and
/// verification helper.
inline std::vector<WeightedEdge> gather_edges(const DistributedGraph& g, Communicator& comm) {
  return comm.allgatherv(g.local_edges);
}

/// Collective. Builds a distributed graph from arbitrary local pieces of an
/// undirected edge list: canonicalizes, drops self-loops and exact
/// duplicates, assigns ids by global rank in (min, max, weight) order, adds
/// back edges and sorts globally.
inline DistributedGraph make_graph_from_undirected(std::vector<WeightedEdge> edges, Communicator& comm) {
  std::vector<WeightedEdge> canon;
  canon.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.src == e.dst) continue;
    canon.push_back({std::min(e.src, e.dst), std::max(e.src, e.dst), e.weight, 0});
  }
  edges.clear();
  edges.shrink_to_fit();
  const auto triple_less = [](const WeightedEdge& a, const WeightedEdge& b) {
    return std::tie(a.src, a.dst, a.weight) < std::tie(b.src, b.dst, b.weight);
  };
  canon = distributed_sort(std::move(canon), triple_less, comm);
  struct Last {
    std::uint8_t has;
    WeightedEdge edge;
  };
  const auto lasts = comm.allgather(Last{static_cast<std::uint8_t>(!canon.empty()), canon.empty() ? WeightedEdge{} : canon.back()});
  std::vector<WeightedEdge> unique;
  unique.reserve(canon.size());
  const WeightedEdge* prev = nullptr;
  for (int r = comm.rank() - 1; r >= 0; --r) {
    if (lasts[r].has) {
      prev = &lasts[r].edge;
      break;
    }
  }
  for (const auto& e : canon) {
    const WeightedEdge* before = unique.empty() ? prev : &unique.back();
    if (before && before->src == e.src && before->dst == e.dst && before->weight == e.weight) continue;
    unique.push_back(e);
  }
  const std::uint64_t offset = comm.prefix_sum(static_cast<std::uint64_t>(unique.size()));
  std::vector<WeightedEdge> directed;
  directed.reserve(2 * unique.size());
  for (std::size_t i = 0; i < unique.size(); ++i) {
    auto e = unique[i];
    e.id = offset + i;
    directed.push_back(e);
    directed.push_back(reversed(e));
  }
  directed = distributed_sort(std::move(directed), lex_less, comm);
  return build_distributed_graph(std::move(directed), comm);
}

}  // namespace dmst
