#include <random>

#include "test_util.hpp"

namespace dmst {
namespace {

using test::E;

DistributedGraph even_graph(const std::vector<WeightedEdge>& all, Communicator& c) {
  return build_distributed_graph(test::slice(all, test::even_cuts(all.size(), c.size()), c.rank()), c);
}

test::AlgoRun filter_on(const std::vector<WeightedEdge>& und, int p, const FilterConfig& cfg) {
  const auto all = test::directed(und);
  return test::run_algo(p, true, [&](Communicator& c) { return even_graph(all, c); }, std::nullopt, cfg);
}

// Discarded parallels are never MSF edges.
std::uint64_t parallel_violations(const std::vector<EdgeId>& msf, const FilterStats& st) {
  std::uint64_t bad = 0;
  for (const auto& step : st.trace) {
    for (auto id : step.parallels) bad += std::binary_search(msf.begin(), msf.end(), id) ? 1 : 0;
  }
  return bad;
}

TEST(IsSparse, Examples) {
  std::mt19937_64 rng(1);
  const auto all = test::directed(test::canonical_ids(test::random_undirected(rng, 100, 250)));
  ASSERT_EQ(all.size(), 500u);
  const auto res = run_spmd(1, [&](Communicator& c) {
    auto g = even_graph(all, c);
    FilterConfig by_degree;
    by_degree.min_edges_per_pe = 0;
    FilterConfig defaults;
    return std::make_tuple(is_sparse(g, 100, by_degree, c), is_sparse(g, 125, by_degree, c), is_sparse(g, 100, defaults, c));
  });
  const auto& [dense, borderline, small] = res[0];
  EXPECT_FALSE(dense);      // 500 > 4 * 100
  EXPECT_TRUE(borderline);  // 500 <= 4 * 125
  EXPECT_TRUE(small);       // fewer than 1000 edges per PE
  EXPECT_TRUE(run_spmd(2, [](Communicator& c) {
                FilterConfig cfg;
                cfg.min_edges_per_pe = 0;
                return is_sparse(build_distributed_graph({}, c), 0, cfg, c);
              })[0]);
}

TEST(FilterMst, SparseInputIsOneBoruvkaCall) {
  const auto und = generate_sequential(parse_spec("grid2d:rows=10,cols=10"));
  for (int p : {1, 3}) {
    auto cfg = test::small_filter(p);
    cfg.preprocess = false;
    const auto r = filter_on(und, p, cfg);
    EXPECT_EQ(r.ids, kruskal(und).ids);
    EXPECT_EQ(r.filter_stats.boruvka_calls, 1u);
    EXPECT_EQ(r.filter_stats.filter_steps, 0u);
  }
}

TEST(FilterMst, DenseGnmFilters) {
  const auto und = generate_sequential(parse_spec("gnm:n=256,m=4096,seed=5"));
  for (int p : {1, 2, 4}) {
    auto cfg = test::small_filter(p, true);
    cfg.preprocess = false;  // at p=1 preprocessing alone solves it
    const auto r = filter_on(und, p, cfg);
    ASSERT_EQ(r.ids, kruskal(und).ids) << p;
    EXPECT_GT(r.filter_stats.filter_steps, 0u);
    EXPECT_GT(r.filter_stats.filtered_edges, 0u);
    EXPECT_EQ(test::filter_violations(und, r.filter_stats), 0u);
    EXPECT_EQ(parallel_violations(r.ids, r.filter_stats), 0u);
  }
}

TEST(FilterMst, AllWeightsEqual) {
  const auto und = generate_sequential(parse_spec("gnm:n=200,m=3000,wmin=7,wmax=8"));
  for (int p : {1, 3, 4}) {
    const auto r = filter_on(und, p, test::small_filter(p, true));
    ASSERT_EQ(r.ids, kruskal(und).ids) << p;
    EXPECT_EQ(r.weight, 7u * 199u);
    EXPECT_EQ(test::filter_violations(und, r.filter_stats), 0u);
  }
}

TEST(FilterMst, DegeneratePivotFallsBack) {
  // a single undirected edge cannot be split
  FilterConfig cfg;
  cfg.sparsity_degree = 0;
  cfg.min_edges_per_pe = 0;
  cfg.max_pivot_retries = 1;
  const auto r = filter_on(test::canonical_ids({E(1, 2, 3)}), 2, cfg);
  EXPECT_EQ(r.ids, std::vector<EdgeId>{0});
  EXPECT_EQ(r.filter_stats.fallbacks, 1u);
  EXPECT_EQ(r.filter_stats.pivot_retries, 1u);
  EXPECT_EQ(r.filter_stats.boruvka_calls, 1u);
}

TEST(FilterMst, SpanningLightPartDropsHeavyEdges) {
  std::vector<WeightedEdge> und;
  for (VertexId v = 1; v < 400; ++v) und.push_back(E(v, v + 1, 1));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 60; ++i) {
    const VertexId a = 1 + rng() % 400, b = 1 + rng() % 400;
    if (a + 1 < b) und.push_back(E(a, b, 100));
  }
  und = test::canonical_ids(und);
  const std::uint64_t heavy = 2 * (und.size() - 399);
  FilterConfig cfg = test::small_filter(2, true);
  cfg.sparsity_degree = 2;
  cfg.preprocess = false;
  const auto r = filter_on(und, 2, cfg);
  EXPECT_EQ(r.weight, 399u);
  EXPECT_EQ(r.filter_stats.filtered_edges, heavy);
  EXPECT_EQ(test::filter_violations(und, r.filter_stats), 0u);
}

TEST(ParentArray, RequestLabels) {
  const auto res = run_spmd(3, [](Communicator& c) {
    auto P = make_parent_array(c.rank() == 2 ? 9 : 0, c);
    std::vector<ParentWrite> w;
    if (c.rank() == 0) w = {{4, 1}, {9, 1}};
    write_parents(P, w, c);
    return request_labels(std::vector<VertexId>{9, 4, 4, 0, 5}, P, c);
  });
  for (const auto& r : res) EXPECT_EQ(r, (std::vector<VertexId>{1, 1, 1, 0, 5}));
}

TEST(ParentArray, OutOfRange) {
  EXPECT_THROW(run_spmd(2,
                        [](Communicator& c) {
                          auto P = make_parent_array(3, c);
                          return request_labels(std::vector<VertexId>{4}, P, c).size();
                        }),
               Error);
}

TEST(ParentArray, CompressIdentityZeroRounds) {
  const auto res = run_spmd(2, [](Communicator& c) {
    auto P = make_parent_array(20, c);
    return compress_parents(P, c);
  });
  EXPECT_EQ(res[0], 0u);
}

TEST(ParentArray, CompressChain) {
  for (int p : {1, 2, 3}) {
    const auto res = run_spmd(p, [](Communicator& c) {
      auto P = make_parent_array(7, c);
      std::vector<ParentWrite> w;
      if (c.rank() == 0) {
        for (VertexId v = 1; v < 8; ++v) w.push_back({v, v - 1});
      }
      write_parents(P, w, c);
      const auto rounds = compress_parents(P, c);
      std::vector<VertexId> all(8);
      for (VertexId v = 0; v < 8; ++v) all[v] = v;
      return std::make_pair(rounds, request_labels(all, P, c));
    });
    EXPECT_LE(res[0].first, 3u);
    EXPECT_EQ(res[0].second, std::vector<VertexId>(8, 0));
  }
}

TEST(FilterMst, MatchesOracleAcrossFamilies) {
  for (const char* spec : {"gnm:n=300,m=6000,seed=3", "gnm:n=200,m=4000,wmax=4", "grid2d:rows=25,cols=20",
                           "rgg2d:n=600,deg=16", "rgg3d:n=400,deg=20,wmax=6", "rmat:scale=9,edges=6000"}) {
    const auto und = generate_sequential(parse_spec(spec));
    const auto oracle = kruskal(und);
    for (int p : {1, 2, 3, 4, 7, 8, 16}) {
      for (bool pre : {true, false}) {
        auto cfg = test::small_filter(p, true);
        cfg.preprocess = pre;
        const auto r = filter_on(und, p, cfg);
        ASSERT_EQ(r.ids, oracle.ids) << spec << " p=" << p << " pre=" << pre;
        EXPECT_EQ(r.weight, oracle.total_weight);
        EXPECT_EQ(r.count, oracle.ids.size());
        EXPECT_EQ(test::filter_violations(und, r.filter_stats), 0u) << spec;
        EXPECT_EQ(parallel_violations(r.ids, r.filter_stats), 0u) << spec;
        for (const auto& call : r.filter_stats.calls) test::expect_round_invariants(call);
      }
    }
  }
}

TEST(FilterMst, RandomCuts) {
  std::mt19937_64 rng(55);
  for (int t = 0; t < 20; ++t) {
    const int p = 1 + static_cast<int>(rng() % 8);
    const auto und = test::canonical_ids(test::random_undirected(rng, 30 + rng() % 100, 300 + rng() % 2000, 1, t % 3 ? 255 : 3));
    const auto all = test::directed(und);
    std::vector<std::size_t> cuts;
    for (int i = 1; i < p; ++i) cuts.push_back(rng() % (all.size() + 1));
    std::sort(cuts.begin(), cuts.end());
    auto cfg = test::small_filter(p, true);
    cfg.merge_back_fraction = (t % 2) ? 0.5 : 0.05;
    const auto r = test::run_algo(
        p, true, [&](Communicator& c) { return build_distributed_graph(test::slice(all, cuts, c.rank()), c); },
        std::nullopt, cfg);
    ASSERT_EQ(r.ids, kruskal(und).ids) << t;
    EXPECT_EQ(test::filter_violations(und, r.filter_stats), 0u);
  }
}

}  // namespace
}  // namespace dmst
