#pragma once

// Sequential reference algorithms. All of them return the unique minimum
// spanning forest under total_order_less and serve as ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "dmst/types.hpp"

namespace dmst {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n = 0) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t size() const { return parent_.size(); }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::size_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  /// Returns false if a and b were already connected.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

struct OracleResult {
  std::vector<EdgeId> ids;  // ascending
  std::uint64_t total_weight = 0;
  std::vector<std::pair<VertexId, VertexId>> component_root;  // vertex -> representative, sorted by vertex
  std::size_t rounds = 0;                                     // Boruvka rounds where applicable
};

namespace detail {

// Dense vertex numbering of an undirected edge list.
struct DenseGraph {
  std::vector<VertexId> labels;
  std::vector<WeightedEdge> edges;  // src/dst are dense indices; one entry per id

  explicit DenseGraph(std::span<const WeightedEdge> input) {
    labels.reserve(input.size() * 2);
    for (const auto& e : input) {
      labels.push_back(e.src);
      labels.push_back(e.dst);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    edges.reserve(input.size());
    for (const auto& e : input) {
      if (e.src == e.dst) continue;
      // keep the canonical direction so that back edges collapse by id below
      edges.push_back({e.src, e.dst, e.weight, e.id});
    }
    std::sort(edges.begin(), edges.end(), total_order_less);
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const WeightedEdge& a, const WeightedEdge& b) { return a.id == b.id; }),
                edges.end());
  }

  std::size_t index(VertexId v) const {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), v) - labels.begin());
  }
};

inline OracleResult finish(const DenseGraph& g, std::vector<EdgeId> ids, UnionFind& uf) {
  OracleResult out;
  std::sort(ids.begin(), ids.end());
  out.ids = std::move(ids);
  std::unordered_map<EdgeId, Weight> weight_of;
  for (const auto& e : g.edges) weight_of.emplace(e.id, e.weight);
  for (auto id : out.ids) out.total_weight += weight_of.at(id);
  out.component_root.reserve(g.labels.size());
  for (std::size_t i = 0; i < g.labels.size(); ++i) out.component_root.emplace_back(g.labels[i], g.labels[uf.find(i)]);
  return out;
}

}  // namespace detail

/// Kruskal with union-find. Accepts one or both directions of each edge;
/// directions of the same undirected edge must share the id.
inline OracleResult kruskal(std::span<const WeightedEdge> edges) {
  detail::DenseGraph g(edges);
  UnionFind uf(g.labels.size());
  std::vector<EdgeId> ids;
  for (const auto& e : g.edges) {
    if (uf.unite(g.index(e.src), g.index(e.dst))) ids.push_back(e.id);
  }
  return detail::finish(g, std::move(ids), uf);
}

/// Textbook Boruvka: minimum incident edge per component, pseudo trees
/// rooted by the smaller label of their 2-cycle, contraction, removal of
/// self-loops and parallel edges.
inline OracleResult sequential_boruvka(std::span<const WeightedEdge> edges) {
  detail::DenseGraph g(edges);
  const std::size_t n = g.labels.size();
  UnionFind uf(n);
  struct Arc {
    std::size_t u, v;
    WeightedEdge edge;
  };
  std::vector<Arc> arcs;
  for (const auto& e : g.edges) arcs.push_back({g.index(e.src), g.index(e.dst), e});
  std::vector<EdgeId> ids;
  std::vector<std::size_t> label(n);
  std::iota(label.begin(), label.end(), 0);
  std::size_t rounds = 0;
  while (!arcs.empty()) {
    ++rounds;
    std::vector<const Arc*> best(n, nullptr);
    for (const auto& a : arcs) {
      for (std::size_t end : {a.u, a.v}) {
        if (!best[end] || total_order_less(a.edge, best[end]->edge)) best[end] = &a;
      }
    }
    // parent pointers of the pseudo forest
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t x = 0; x < n; ++x) {
      if (!best[x]) continue;
      const std::size_t y = best[x]->u == x ? best[x]->v : best[x]->u;
      const bool two_cycle = best[y] && best[y]->edge.id == best[x]->edge.id;
      if (two_cycle && x < y) continue;  // x roots the 2-cycle
      parent[x] = y;
      ids.push_back(best[x]->edge.id);
    }
    std::vector<std::size_t> root(n);
    for (std::size_t x = 0; x < n; ++x) {
      std::size_t r = x;
      while (parent[r] != r) r = parent[r];
      root[x] = r;
      uf.unite(label[x], label[r]);
    }
    std::vector<Arc> next;
    for (const auto& a : arcs) {
      const std::size_t u = root[a.u];
      const std::size_t v = root[a.v];
      if (u != v) next.push_back({std::min(u, v), std::max(u, v), a.edge});
    }
    std::sort(next.begin(), next.end(), [](const Arc& a, const Arc& b) {
      if (a.u != b.u) return a.u < b.u;
      if (a.v != b.v) return a.v < b.v;
      return total_order_less(a.edge, b.edge);
    });
    arcs.clear();
    for (const auto& a : next) {
      if (!arcs.empty() && arcs.back().u == a.u && arcs.back().v == a.v) continue;
      arcs.push_back(a);
    }
  }
  auto out = detail::finish(g, std::move(ids), uf);
  out.rounds = rounds;
  return out;
}

namespace detail {

inline void filter_kruskal_rec(std::vector<WeightedEdge> edges, const DenseGraph& g, UnionFind& uf,
                               std::vector<EdgeId>& ids) {
  if (edges.size() <= 16) {
    std::sort(edges.begin(), edges.end(), total_order_less);
    for (const auto& e : edges) {
      if (uf.unite(g.index(e.src), g.index(e.dst))) ids.push_back(e.id);
    }
    return;
  }
  // deterministic pivot: median of first, middle and last under the total order
  std::array<WeightedEdge, 3> c{edges.front(), edges[edges.size() / 2], edges.back()};
  std::sort(c.begin(), c.end(), total_order_less);
  const WeightedEdge pivot = c[1];
  std::vector<WeightedEdge> light;
  std::vector<WeightedEdge> heavy;
  for (const auto& e : edges) (total_order_less(pivot, e) ? heavy : light).push_back(e);
  edges.clear();
  edges.shrink_to_fit();
  filter_kruskal_rec(std::move(light), g, uf, ids);
  std::erase_if(heavy, [&](const WeightedEdge& e) { return uf.find(g.index(e.src)) == uf.find(g.index(e.dst)); });
  filter_kruskal_rec(std::move(heavy), g, uf, ids);
}

}  // namespace detail

/// Filter-Kruskal: quicksort-style partition around a pivot, recurse on the
/// light part, discard heavy edges inside a light component, recurse on the
/// rest.
inline OracleResult filter_kruskal(std::span<const WeightedEdge> edges) {
  detail::DenseGraph g(edges);
  UnionFind uf(g.labels.size());
  std::vector<EdgeId> ids;
  detail::filter_kruskal_rec(g.edges, g, uf, ids);
  return detail::finish(g, std::move(ids), uf);
}

enum class MsfVerdict { ok, cycle, not_spanning, wrong_weight };

inline const char* verdict_name(MsfVerdict v) {
  switch (v) {
    case MsfVerdict::ok: return "ok";
    case MsfVerdict::cycle: return "cycle";
    case MsfVerdict::not_spanning: return "not_spanning";
    case MsfVerdict::wrong_weight: return "wrong_weight";
  }
  return "?";
}

/// Checks that candidate_ids form a spanning forest of the graph with the
/// minimum total weight.
inline MsfVerdict verify_msf(std::span<const WeightedEdge> graph_edges, std::span<const EdgeId> candidate_ids) {
  detail::DenseGraph g(graph_edges);
  std::unordered_map<EdgeId, const WeightedEdge*> by_id;
  for (const auto& e : g.edges) by_id.emplace(e.id, &e);
  UnionFind uf(g.labels.size());
  std::uint64_t weight = 0;
  std::vector<EdgeId> seen(candidate_ids.begin(), candidate_ids.end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) return MsfVerdict::cycle;
  for (auto id : candidate_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(Errc::unknown_id, "edge id " + std::to_string(id) + " not in graph");
    if (!uf.unite(g.index(it->second->src), g.index(it->second->dst))) return MsfVerdict::cycle;
    weight += it->second->weight;
  }
  UnionFind all(g.labels.size());
  std::size_t graph_components = g.labels.size();
  for (const auto& e : g.edges) {
    if (all.unite(g.index(e.src), g.index(e.dst))) --graph_components;
  }
  const std::size_t candidate_components = g.labels.size() - candidate_ids.size();
  if (candidate_components != graph_components) return MsfVerdict::not_spanning;
  if (weight != kruskal(graph_edges).total_weight) return MsfVerdict::wrong_weight;
  return MsfVerdict::ok;
}

}  // namespace dmst
