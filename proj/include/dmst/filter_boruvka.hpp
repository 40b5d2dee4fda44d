#pragma once

// Filter-Boruvka. Edges are split at a sampled median weight; the light part
// is solved recursively, which records component representatives in the
// distributed parent array P. Heavy edges inside one component are then
// discarded before the heavy part is solved. Sparse (sub)graphs go straight
// to distributed Boruvka.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "dmst/boruvka.hpp"

namespace dmst {

struct FilterConfig {
  std::uint64_t sparsity_degree = 4;
  std::uint64_t min_edges_per_pe = 1000;
  std::uint64_t min_partition_edges_per_pe = 1000;
  double merge_back_fraction = 0.05;
  double sample_rate = 0.01;
  int max_pivot_retries = 8;
  bool preprocess = true;
  bool redistribute_output = true;
  std::uint64_t base_case_threshold = 0;  // passed to the Boruvka calls
  bool trace = false;                     // record every filter step (expensive)
  PhaseClock* clock = nullptr;
};

/// One filter step, replicated on all PEs when tracing.
struct FilterStep {
  std::vector<EdgeId> accumulated;  // MSF ids known before the step
  std::vector<EdgeId> self_loops;   // discarded: both endpoints in one component
  std::vector<EdgeId> parallels;    // discarded: a lighter parallel edge survived
};

struct FilterStats {
  std::uint64_t boruvka_calls = 0;
  std::uint64_t filter_steps = 0;
  std::uint64_t max_depth = 0;
  std::uint64_t pivot_retries = 0;
  std::uint64_t fallbacks = 0;  // pivot selection gave up
  std::uint64_t merge_backs = 0;
  std::uint64_t compress_rounds = 0;
  std::uint64_t filtered_edges = 0;  // directed edges discarded by filter steps
  std::vector<BoruvkaStats> calls;
  std::vector<FilterStep> trace;
};

/// Collective. Average degree at most `sparsity_degree`, or fewer than
/// min_edges_per_pe directed edges per PE.
inline bool is_sparse(const DistributedGraph& g, std::uint64_t n_remaining, const FilterConfig& cfg, Communicator& comm) {
  const std::uint64_t m = global_edge_count(g, comm);
  return m <= cfg.sparsity_degree * n_remaining || m < cfg.min_edges_per_pe * static_cast<std::uint64_t>(comm.size());
}

struct EdgeKey {
  Weight weight;
  EdgeId id;
  friend bool operator<(const EdgeKey& a, const EdgeKey& b) { return std::tie(a.weight, a.id) < std::tie(b.weight, b.id); }
};

/// Light side of a split: weight <= pivot weight, or key <= pivot key when
/// the weight alone cannot split.
struct Split {
  bool by_key = false;
  EdgeKey pivot{};
  bool light(const WeightedEdge& e) const {
    return by_key ? !(pivot < EdgeKey{e.weight, e.id}) : e.weight <= pivot.weight;
  }
};

class FilterBoruvka {
 public:
  FilterBoruvka(const FilterConfig& cfg, Communicator& comm, DistributedParentArray& parents, std::vector<EdgeId>& ids,
                FilterStats& stats)
      : cfg_(cfg), comm_(comm), P_(parents), ids_(ids), stats_(stats) {}

  /// Solves g completely.
  void run(DistributedGraph g) {
    auto left = rec(std::move(g), 0);
    while (comm_.allreduce(static_cast<std::uint64_t>(left.size()), ops::sum{}) > 0) {
      left = rec(filter(sorted_graph(std::move(left))), 1);
    }
  }

  /// Returns unprocessed edges when the filtered heavy part is too small to
  /// be worth its own recursion level.
  std::vector<WeightedEdge> rec(DistributedGraph g, std::uint64_t depth) {
    stats_.max_depth = std::max(stats_.max_depth, depth);
    const auto n = global_vertex_counts(g, comm_).total;
    if (is_sparse(g, n, cfg_, comm_)) {
      call_boruvka(std::move(g));
      return {};
    }
    std::optional<Split> split;
    {
      PhaseScope s(cfg_.clock, Phase::pivot_selection);
      split = choose_split(g);
    }
    if (!split) {
      ++stats_.fallbacks;
      call_boruvka(std::move(g));
      return {};
    }
    std::vector<WeightedEdge> light;
    std::vector<WeightedEdge> heavy;
    for (const auto& e : g.local_edges) (split->light(e) ? light : heavy).push_back(e);
    g = DistributedGraph{};
    auto left = rec(build_distributed_graph(detail::rebalance(std::move(light), comm_), comm_), depth + 1);

    DistributedGraph heavy_graph;
    if (comm_.allreduce(static_cast<std::uint64_t>(left.size()), ops::sum{}) > 0) {
      heavy.insert(heavy.end(), left.begin(), left.end());
      heavy_graph = sorted_graph(std::move(heavy));
    } else {
      heavy_graph = build_distributed_graph(detail::rebalance(std::move(heavy), comm_), comm_);
    }
    const std::uint64_t before = global_edge_count(heavy_graph, comm_);
    auto filtered = filter(heavy_graph);
    const std::uint64_t after = global_edge_count(filtered, comm_);
    if (depth > 0 && static_cast<double>(after) < cfg_.merge_back_fraction * static_cast<double>(before)) {
      ++stats_.merge_backs;
      return std::move(filtered.local_edges);
    }
    return rec(std::move(filtered), depth + 1);
  }

  /// Relabels heavy edges with the representatives in P and drops those
  /// that became self-loops, then removes parallels.
  DistributedGraph filter(const DistributedGraph& heavy) {
    PhaseScope s(cfg_.clock, Phase::filter);
    ++stats_.filter_steps;
    stats_.compress_rounds += compress_parents(P_, comm_);
    LabelMap labels;
    labels.vertices = local_vertices(heavy.local_edges);
    labels.labels = request_labels(labels.vertices, P_, comm_);
    exchange_labels(labels, heavy, comm_);
    std::vector<EdgeId> self_loops;
    std::vector<EdgeId> parallels;
    auto relabeled = relabel(labels, heavy.local_edges, cfg_.trace ? &self_loops : nullptr);
    const std::uint64_t relabeled_count = relabeled.size();
    auto out = redistribute(std::move(relabeled), comm_, cfg_.trace ? &parallels : nullptr);
    stats_.filtered_edges += comm_.allreduce(
        static_cast<std::uint64_t>(heavy.local_edges.size() - relabeled_count), ops::sum{});
    if (cfg_.trace) {
      FilterStep step;
      step.accumulated = comm_.allgatherv(ids_);
      step.self_loops = comm_.allgatherv(self_loops);
      step.parallels = comm_.allgatherv(parallels);
      stats_.trace.push_back(std::move(step));
    }
    return out;
  }

 private:
  DistributedGraph sorted_graph(std::vector<WeightedEdge> edges) {
    return build_distributed_graph(distributed_sort(std::move(edges), lex_less, comm_), comm_);
  }

  void call_boruvka(DistributedGraph g) {
    ++stats_.boruvka_calls;
    BoruvkaConfig bc;
    bc.base_case_threshold = cfg_.base_case_threshold;
    bc.preprocess = false;
    bc.redistribute_output = false;
    bc.parents = &P_;
    bc.clock = cfg_.clock;
    BoruvkaStats bs;
    boruvka_core(std::move(g), bc, comm_, ids_, bs);
    stats_.calls.push_back(std::move(bs));
  }

  // Median weight of a sample; if that leaves one side empty, the median of
  // full (weight, id) keys. Re-samples a bounded number of times.
  std::optional<Split> choose_split(const DistributedGraph& g) {
    const std::uint64_t total = global_edge_count(g, comm_);
    const auto light_count = [&](const Split& s) {
      std::uint64_t c = 0;
      for (const auto& e : g.local_edges) c += s.light(e) ? 1 : 0;
      return comm_.allreduce(c, ops::sum{});
    };
    std::vector<Weight> weights;
    std::vector<EdgeKey> keys;
    weights.reserve(g.local_edges.size());
    keys.reserve(g.local_edges.size());
    for (const auto& e : g.local_edges) {
      weights.push_back(e.weight);
      keys.push_back({e.weight, e.id});
    }
    for (int attempt = 0; attempt <= cfg_.max_pivot_retries; ++attempt) {
      if (attempt > 0) ++stats_.pivot_retries;
      Split s;
      s.pivot.weight = sampled_median(std::span<const Weight>(weights), cfg_.sample_rate, std::less<Weight>{}, comm_);
      std::uint64_t c = light_count(s);
      if (c > 0 && c < total) return s;
      s.by_key = true;
      s.pivot = sampled_median(std::span<const EdgeKey>(keys), cfg_.sample_rate, std::less<EdgeKey>{}, comm_);
      c = light_count(s);
      if (c > 0 && c < total) return s;
    }
    return std::nullopt;
  }

  const FilterConfig& cfg_;
  Communicator& comm_;
  DistributedParentArray& P_;
  std::vector<EdgeId>& ids_;
  FilterStats& stats_;
};

struct FilterResult {
  MsfResult msf;
  FilterStats stats;
};

/// Collective. MSF by Filter-Boruvka; same output contract as mst().
inline FilterResult filter_mst(const DistributedGraph& graph, const FilterConfig& cfg, Communicator& comm) {
  PhaseClock local_clock;
  FilterConfig c = cfg;
  if (!c.clock) c.clock = &local_clock;
  FilterResult out;
  auto& msf = out.msf;
  MstIndex index;
  {
    PhaseScope s(c.clock, Phase::mst_redistribution);
    if (c.redistribute_output) index = build_mst_index(graph, comm);
  }
  std::optional<DistributedGraph> prepared;
  if (c.preprocess) {
    PhaseScope s(c.clock, Phase::local_preprocessing);
    auto pre = local_preprocessing(graph, comm);
    msf.found_ids = std::move(pre.mst_edge_ids);
    msf.stats.preprocess = pre.stats;
    prepared = std::move(pre.graph);
  }
  const DistributedGraph& g = prepared ? *prepared : graph;
  VertexId max_label = 0;
  for (const auto& e : g.local_edges) max_label = std::max({max_label, e.src, e.dst});
  auto P = make_parent_array(max_label, comm);
  FilterBoruvka algo(c, comm, P, msf.found_ids, out.stats);
  algo.run(prepared ? std::move(*prepared) : graph);
  {
    PhaseScope s(c.clock, Phase::filter);
    out.stats.compress_rounds += compress_parents(P, comm);
  }
  {
    PhaseScope s(c.clock, Phase::mst_redistribution);
    if (c.redistribute_output) {
      msf.edges = redistribute_mst(msf.found_ids, index, comm);
      std::uint64_t w = 0;
      for (const auto& e : msf.edges) w += e.weight;
      msf.total_weight = comm.allreduce(w, ops::sum{});
    }
    msf.edge_count = comm.allreduce(static_cast<std::uint64_t>(msf.found_ids.size()), ops::sum{});
  }
  if (c.clock == &local_clock) msf.phase_times = local_clock.flush();
  return out;
}

}  // namespace dmst
