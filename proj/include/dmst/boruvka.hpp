#pragma once

// Distributed Boruvka. Rounds of minimum-edge selection, contraction by
// pointer doubling, label exchange, relabeling and redistribution shrink the
// graph until it is small enough to be replicated; the rest is solved on
// every PE after one vector allreduce per round. Finally the MSF edges are
// sent back to the PEs that hold them in the input.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dmst/labels.hpp"
#include "dmst/local_preproc.hpp"
#include "dmst/oracle.hpp"
#include "dmst/parent_array.hpp"
#include "dmst/phase_timer.hpp"
#include "dmst/varint.hpp"

namespace dmst {

inline constexpr std::uint64_t kBaseCaseVertices = 35000;

struct BoruvkaConfig {
  std::uint64_t base_case_threshold = 0;  // 0: max(2p, 35000)
  bool preprocess = true;
  bool redistribute_output = true;
  DistributedParentArray* parents = nullptr;  // written after every round and after the base case
  PhaseClock* clock = nullptr;
};

/// Threshold below which the base case takes over, clamped to [p, n0].
inline std::uint64_t effective_threshold(const BoruvkaConfig& cfg, int p, std::uint64_t initial_vertices) {
  std::uint64_t t = cfg.base_case_threshold ? cfg.base_case_threshold
                                            : std::max<std::uint64_t>(2 * static_cast<std::uint64_t>(p), kBaseCaseVertices);
  t = std::max<std::uint64_t>(t, static_cast<std::uint64_t>(p));
  return std::min(t, initial_vertices);
}

struct RoundStats {
  VertexCounts before;
  VertexCounts after;
  std::uint64_t edges_before = 0;
  std::uint64_t edges_after = 0;
  std::uint64_t non_shared_roots = 0;  // non-shared vertices that stay roots
  std::uint64_t doubling_iterations = 0;
  std::uint64_t shared_requests = 0;  // doubling requests addressed to shared vertices
  std::uint64_t label_records = 0;
};

struct BoruvkaStats {
  PreprocessStats preprocess;
  std::uint64_t threshold = 0;
  std::uint64_t initial_vertices = 0;  // entering the distributed rounds
  std::vector<RoundStats> rounds;
  std::uint64_t base_case_vertices = 0;
  std::uint64_t base_case_rounds = 0;
};

struct MsfEdge {
  EdgeId id = 0;
  VertexId src = 0;
  VertexId dst = 0;
  Weight weight = 0;
  friend bool operator==(const MsfEdge&, const MsfEdge&) = default;
};

struct MsfResult {
  std::vector<MsfEdge> edges;     // MSF edges whose forward copy lives on this PE, by id
  std::vector<EdgeId> found_ids;  // ids this PE discovered, before redistribution
  std::uint64_t total_weight = 0;  // global
  std::uint64_t edge_count = 0;    // global
  PhaseTimes phase_times{};
  BoruvkaStats stats;
};

struct MinEdgeCandidate {
  VertexId vertex;
  WeightedEdge edge;
};

/// Lightest incident edge of every non-shared source vertex, in vertex order.
inline std::vector<MinEdgeCandidate> min_edges(const DistributedGraph& g) {
  std::vector<MinEdgeCandidate> out;
  const auto& edges = g.local_edges;
  const bool skip_first = g.first_shared();
  const bool skip_last = g.last_shared();
  for (std::size_t i = 0; i < edges.size();) {
    std::size_t j = i;
    WeightedEdge best = edges[i];
    for (; j < edges.size() && edges[j].src == edges[i].src; ++j) {
      if (key_less(edges[j], best)) best = edges[j];
    }
    const bool shared = (i == 0 && skip_first) || (j == edges.size() && skip_last);
    if (!shared) out.push_back({edges[i].src, best});
    i = j;
  }
  return out;
}

struct Contraction {
  LabelMap labels;
  std::vector<EdgeId> mst_ids;
  std::uint64_t doubling_iterations = 0;
  std::uint64_t shared_requests = 0;
  std::uint64_t non_shared_roots = 0;  // local
};

namespace detail {

template <typename Reply, typename Answer>
std::vector<Reply> ask_owners(std::span<const VertexId> targets, const DistributedGraph& g, Communicator& comm,
                              Answer&& answer) {
  const int p = comm.size();
  MessageBatch<VertexId> send(p);
  std::vector<VertexId> unique(targets.begin(), targets.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  for (auto v : unique) send[vertex_home_pe(g, v)].push_back(v);
  const auto requests = smart_alltoall(send, comm);
  MessageBatch<Reply> replies(p);
  for (int q = 0; q < p; ++q) {
    for (auto v : requests[q]) replies[q].push_back(answer(v));
  }
  const auto answers = smart_alltoall(replies, comm);
  std::vector<Reply> flat;
  flat.reserve(unique.size());
  for (const auto& a : answers) flat.insert(flat.end(), a.begin(), a.end());
  std::vector<Reply> out;
  out.reserve(targets.size());
  for (auto v : targets) {
    out.push_back(flat[static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), v) - unique.begin())]);
  }
  return out;
}

}  // namespace detail

/// Collective. Turns the pseudo forest of candidate edges into rooted stars.
/// A 2-cycle is rooted at its smaller vertex, shared vertices are roots, and
/// pointer doubling runs until every vertex points to a root.
inline Contraction contract_components(std::span<const MinEdgeCandidate> cands, const DistributedGraph& g,
                                       Communicator& comm) {
  Contraction out;
  out.labels = LabelMap::identity(g.local_edges);
  const std::size_t k = cands.size();
  std::vector<VertexId> parent(k);
  std::vector<std::uint8_t> done(k, 0);

  const auto index_of = [&](VertexId v) -> std::size_t {
    auto it = std::lower_bound(cands.begin(), cands.end(), v,
                               [](const MinEdgeCandidate& c, VertexId x) { return c.vertex < x; });
    if (it == cands.end() || it->vertex != v) {
      throw Error(Errc::unknown_vertex, "vertex " + std::to_string(v) + " has no candidate on PE " + std::to_string(comm.rank()));
    }
    return static_cast<std::size_t>(it - cands.begin());
  };

  // Iteration 0: detect 2-cycles by comparing candidate ids.
  struct CandidateInfo {
    VertexId dst;
    EdgeId id;
  };
  std::vector<VertexId> targets;
  for (const auto& c : cands) {
    if (!g.is_shared_vertex(c.edge.dst)) targets.push_back(c.edge.dst);
  }
  const auto infos = detail::ask_owners<CandidateInfo>(targets, g, comm, [&](VertexId v) {
    const auto& c = cands[index_of(v)];
    return CandidateInfo{c.edge.dst, c.edge.id};
  });
  for (std::size_t i = 0, t = 0; i < k; ++i) {
    const auto& c = cands[i];
    const VertexId u = c.edge.dst;
    parent[i] = u;
    if (g.is_shared_vertex(u)) {
      done[i] = 1;
    } else {
      const auto& info = infos[t++];
      if (info.id == c.edge.id) {
        done[i] = 1;
        if (c.vertex < u) {
          parent[i] = c.vertex;
          continue;  // root of the 2-cycle, the edge is recorded by u
        }
      }
    }
    out.mst_ids.push_back(c.edge.id);
  }

  struct ParentInfo {
    VertexId parent;
    std::uint8_t root;
    std::uint8_t done;
  };
  while (comm.allreduce(std::any_of(done.begin(), done.end(), [](std::uint8_t d) { return d == 0; }),
                        ops::logical_or{})) {
    ++out.doubling_iterations;
    targets.clear();
    for (std::size_t i = 0; i < k; ++i) {
      if (done[i]) continue;
      if (g.is_shared_vertex(parent[i])) ++out.shared_requests;
      targets.push_back(parent[i]);
    }
    const std::vector<VertexId> old_parent = parent;
    const std::vector<std::uint8_t> old_done = done;
    const auto replies = detail::ask_owners<ParentInfo>(targets, g, comm, [&](VertexId v) {
      const std::size_t i = index_of(v);
      return ParentInfo{old_parent[i], static_cast<std::uint8_t>(old_parent[i] == v), old_done[i]};
    });
    for (std::size_t i = 0, t = 0; i < k; ++i) {
      if (old_done[i]) continue;
      const auto& r = replies[t++];
      if (r.root) {
        done[i] = 1;
      } else {
        parent[i] = r.parent;
        done[i] = r.done || g.is_shared_vertex(r.parent);
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    out.labels.local(cands[i].vertex) = parent[i];
    if (parent[i] == cands[i].vertex) ++out.non_shared_roots;
  }
  return out;
}

/// Collective. Replicated base case: dense relabeling of the remaining
/// vertices, then Boruvka rounds whose minimum edges are combined by one
/// vector allreduce each. Rank 0 keeps the found ids. Returns the number of
/// rounds.
inline std::uint64_t base_case(const DistributedGraph& g, Communicator& comm, std::vector<EdgeId>& ids,
                               std::uint64_t threshold, DistributedParentArray* parents = nullptr,
                               std::uint64_t* vertex_count = nullptr) {
  auto verts = distributed_sort(local_vertices(g.local_edges), std::less<VertexId>{}, comm);
  struct Last {
    std::uint8_t has;
    VertexId v;
  };
  const auto lasts = comm.allgather(Last{static_cast<std::uint8_t>(!verts.empty()), verts.empty() ? 0 : verts.back()});
  std::optional<VertexId> before;
  for (int r = comm.rank() - 1; r >= 0; --r) {
    if (lasts[r].has) {
      before = lasts[r].v;
      break;
    }
  }
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  if (!verts.empty() && before && verts.front() == *before) verts.erase(verts.begin());
  const std::uint64_t offset = comm.prefix_sum(static_cast<std::uint64_t>(verts.size()));
  const auto labels = comm.allgatherv(verts);
  const std::uint64_t n = labels.size();
  if (vertex_count) *vertex_count = n;
  if (n > threshold) {
    throw Error(Errc::vertex_count_over_threshold, std::to_string(n) + " vertices exceed base case threshold " + std::to_string(threshold));
  }
  (void)offset;

  const auto dense = [&](VertexId v) {
    return static_cast<VertexId>(std::lower_bound(labels.begin(), labels.end(), v) - labels.begin());
  };
  std::vector<WeightedEdge> edges;
  edges.reserve(g.local_edges.size());
  for (const auto& e : g.local_edges) edges.push_back({dense(e.src), dense(e.dst), e.weight, e.id});

  UnionFind uf(n);
  std::uint64_t rounds = 0;
  std::vector<WeightedEdge> best;
  while (true) {
    best.assign(n, kNoCandidate);
    std::size_t kept = 0;
    for (const auto& e : edges) {
      const auto cs = uf.find(e.src);
      if (cs == uf.find(e.dst)) continue;
      edges[kept++] = e;
      if (key_less(e, best[cs])) best[cs] = e;
    }
    edges.resize(kept);
    best = comm.allreduce_vec(std::span<const WeightedEdge>(best), ops::min_by_key{});
    bool merged = false;
    for (const auto& e : best) {
      if (!is_candidate(e)) continue;
      if (uf.unite(e.src, e.dst)) {
        if (comm.rank() == 0) ids.push_back(e.id);
        merged = true;
      }
    }
    if (!merged) break;
    ++rounds;
  }
  if (parents) {
    for (std::uint64_t i = 0; i < n; ++i) {
      if (parents->owns(labels[i])) parents->at(labels[i]) = labels[uf.find(i)];
    }
  }
  return rounds;
}

/// Forward edges (src < dst) of the input slice, compressed, plus the
/// replicated id range of every PE. Forward ids are increasing along the
/// global order, so the ranges are disjoint and sorted.
struct MstIndex {
  struct Range {
    EdgeId lo = kNoEdge;
    EdgeId hi = 0;
  };
  std::vector<std::uint8_t> compressed;
  std::vector<Range> ranges;

  int home(EdgeId id) const {
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      if (ranges[r].lo <= id && id <= ranges[r].hi) return static_cast<int>(r);
    }
    throw Error(Errc::unknown_edge_id, "edge id " + std::to_string(id) + " belongs to no PE");
  }
};

inline MstIndex build_mst_index(const DistributedGraph& g, Communicator& comm) {
  MstIndex idx;
  std::vector<WeightedEdge> forward;
  MstIndex::Range mine;
  for (const auto& e : g.local_edges) {
    if (e.src >= e.dst) continue;
    forward.push_back(e);
    mine.lo = std::min(mine.lo, e.id);
    mine.hi = std::max(mine.hi, e.id);
  }
  idx.compressed = encode_edges(forward);
  idx.ranges = comm.allgather(mine);
  return idx;
}

/// Collective. Routes found ids to the PE holding the forward edge and
/// materializes (id, u, v, w) there, sorted by id.
inline std::vector<MsfEdge> redistribute_mst(std::span<const EdgeId> ids, const MstIndex& index, Communicator& comm) {
  MessageBatch<EdgeId> send(comm.size());
  for (auto id : ids) send[index.home(id)].push_back(id);
  auto mine = flatten(comm.alltoallv(send));
  std::sort(mine.begin(), mine.end());
  const auto forward = decode_edges(index.compressed);
  std::vector<MsfEdge> out;
  out.reserve(mine.size());
  for (auto id : mine) {
    auto it = std::lower_bound(forward.begin(), forward.end(), id,
                               [](const WeightedEdge& e, EdgeId x) { return e.id < x; });
    if (it == forward.end() || it->id != id) {
      throw Error(Errc::unknown_edge_id, "edge id " + std::to_string(id) + " missing on PE " + std::to_string(comm.rank()));
    }
    out.push_back({id, it->src, it->dst, it->weight});
  }
  return out;
}

/// Collective. The distributed rounds and the base case on an already
/// prepared graph; found ids are appended to `ids`.
inline void boruvka_core(DistributedGraph g, const BoruvkaConfig& cfg, Communicator& comm, std::vector<EdgeId>& ids,
                         BoruvkaStats& stats) {
  PhaseClock* clock = cfg.clock;
  auto counts = global_vertex_counts(g, comm);
  std::uint64_t edges = global_edge_count(g, comm);
  stats.initial_vertices = counts.total;
  stats.threshold = effective_threshold(cfg, comm.size(), counts.total);
  while (counts.total > stats.threshold && edges > 0) {
    RoundStats round;
    round.before = counts;
    round.edges_before = edges;
    std::vector<MinEdgeCandidate> cands;
    {
      PhaseScope s(clock, Phase::min_edges);
      cands = min_edges(g);
    }
    Contraction con;
    {
      PhaseScope s(clock, Phase::contraction);
      con = contract_components(cands, g, comm);
      ids.insert(ids.end(), con.mst_ids.begin(), con.mst_ids.end());
      round.doubling_iterations = con.doubling_iterations;
      round.shared_requests = comm.allreduce(con.shared_requests, ops::sum{});
      round.non_shared_roots = comm.allreduce(con.non_shared_roots, ops::sum{});
    }
    {
      PhaseScope s(clock, Phase::label_exchange);
      round.label_records = comm.allreduce(exchange_labels(con.labels, g, comm), ops::sum{});
      if (cfg.parents) {
        std::vector<ParentWrite> writes;
        for (const auto& c : cands) writes.push_back({c.vertex, con.labels.local(c.vertex)});
        write_parents(*cfg.parents, writes, comm);
      }
    }
    {
      PhaseScope s(clock, Phase::redistribute);
      auto relabeled = relabel(con.labels, g.local_edges);
      g = redistribute(std::move(relabeled), comm);
      counts = global_vertex_counts(g, comm);
      edges = global_edge_count(g, comm);
    }
    round.after = counts;
    round.edges_after = edges;
    stats.rounds.push_back(round);
  }
  PhaseScope s(clock, Phase::base_case);
  stats.base_case_rounds = base_case(g, comm, ids, stats.threshold, cfg.parents, &stats.base_case_vertices);
}

/// Collective. Minimum spanning forest of g; the result is the unique MSF
/// under (weight, min endpoint, max endpoint) order.
inline MsfResult mst(const DistributedGraph& graph, const BoruvkaConfig& cfg, Communicator& comm) {
  PhaseClock local_clock;
  BoruvkaConfig c = cfg;
  if (!c.clock) c.clock = &local_clock;
  MsfResult out;
  MstIndex index;
  {
    PhaseScope s(c.clock, Phase::mst_redistribution);
    if (c.redistribute_output) index = build_mst_index(graph, comm);
  }
  std::optional<DistributedGraph> prepared;
  if (c.preprocess) {
    PhaseScope s(c.clock, Phase::local_preprocessing);
    auto pre = local_preprocessing(graph, comm);
    out.found_ids = std::move(pre.mst_edge_ids);
    out.stats.preprocess = pre.stats;
    prepared = std::move(pre.graph);
  }
  boruvka_core(prepared ? std::move(*prepared) : graph, c, comm, out.found_ids, out.stats);
  {
    PhaseScope s(c.clock, Phase::mst_redistribution);
    if (c.redistribute_output) {
      out.edges = redistribute_mst(out.found_ids, index, comm);
      std::uint64_t w = 0;
      for (const auto& e : out.edges) w += e.weight;
      out.total_weight = comm.allreduce(w, ops::sum{});
    }
    out.edge_count = comm.allreduce(static_cast<std::uint64_t>(out.found_ids.size()), ops::sum{});
  }
  if (c.clock == &local_clock) out.phase_times = local_clock.flush();
  return out;
}

}  // namespace dmst
