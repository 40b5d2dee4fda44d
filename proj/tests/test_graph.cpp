#include <random>

#include "test_util.hpp"

namespace dmst {
namespace {

using test::E;

TEST(Graph, SinglePeLexmin) {
  const auto res = run_spmd(1, [](Communicator& c) {
    return build_distributed_graph({E(1, 2, 5), E(2, 1, 5)}, c).lexmin;
  });
  ASSERT_EQ(res[0].size(), 1u);
  EXPECT_EQ(res[0][0], E(1, 2, 5));
}

TEST(Graph, TwoPeLexminReplicated) {
  const auto res = run_spmd(2, [](Communicator& c) {
    std::vector<WeightedEdge> mine = c.rank() == 0 ? std::vector{E(1, 2, 5), E(2, 1, 5)} : std::vector{E(2, 3, 1), E(3, 2, 1)};
    return build_distributed_graph(mine, c).lexmin;
  });
  for (const auto& lm : res) EXPECT_EQ(lm, (std::vector{E(1, 2, 5), E(2, 3, 1)}));
}

TEST(Graph, EmptyPeGetsSentinelAndNeverHome) {
  const auto res = run_spmd(2, [](Communicator& c) {
    std::vector<WeightedEdge> mine;
    if (c.rank() == 0) mine = {E(1, 2, 5), E(2, 1, 5)};
    auto g = build_distributed_graph(mine, c);
    std::vector<int> homes;
    for (VertexId s = 0; s < 5; ++s) {
      for (VertexId d = 0; d < 5; ++d) homes.push_back(home_pe(g, s, d));
    }
    return std::make_pair(is_empty_slice(g.lexmin[1]), homes);
  });
  for (const auto& [sentinel, homes] : res) {
    EXPECT_TRUE(sentinel);
    for (int h : homes) EXPECT_EQ(h, 0);
  }
}

TEST(Graph, UnsortedSliceRejected) {
  try {
    run_spmd(1, [](Communicator& c) { return build_distributed_graph({E(2, 1, 5), E(1, 2, 5)}, c).num_local_edges(); });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::local_order_violation);
  }
}

TEST(Graph, SlicesOutOfOrderRejected) {
  EXPECT_THROW(run_spmd(2,
                        [](Communicator& c) {
                          std::vector<WeightedEdge> mine{c.rank() == 0 ? E(5, 1, 1) : E(1, 5, 1)};
                          return build_distributed_graph(mine, c).num_local_edges();
                        }),
               Error);
}

TEST(HomePe, BinarySearchExamples) {
  const auto res = run_spmd(2, [](Communicator& c) {
    std::vector<WeightedEdge> mine = c.rank() == 0 ? std::vector{E(1, 2, 5), E(2, 1, 5)} : std::vector{E(2, 3, 1), E(3, 2, 1)};
    auto g = build_distributed_graph(mine, c);
    return std::make_pair(home_pe(g, 2, 5), home_pe(g, 1, 9));
  });
  for (const auto& [a, b] : res) {
    EXPECT_EQ(a, 1);
    EXPECT_EQ(b, 0);
  }
}

TEST(HomePe, SkipsEmptyMiddlePe) {
  const auto res = run_spmd(3, [](Communicator& c) {
    std::vector<WeightedEdge> mine;
    if (c.rank() == 0) mine = {E(1, 2, 1), E(3, 5, 1)};
    if (c.rank() == 2) mine = {E(4, 1, 1), E(5, 3, 1)};
    auto g = build_distributed_graph(mine, c);
    return std::make_tuple(is_empty_slice(g.lexmin[1]), home_pe(g, 3, 1), home_pe(g, 4, 1), home_pe(g, 9, 9));
  });
  for (const auto& [sentinel, a, b, c] : res) {
    EXPECT_TRUE(sentinel);
    EXPECT_EQ(a, 0);
    EXPECT_EQ(b, 2);
    EXPECT_EQ(c, 2);
  }
}

TEST(HomePe, EveryEdgeFindsItsPe) {
  std::mt19937_64 rng(5);
  for (int p : {2, 3, 5, 8}) {
    const auto und = test::canonical_ids(test::random_undirected(rng, 30, 120));
    const auto all = test::directed(und);
    const auto res = run_spmd(p, [&](Communicator& c) {
      auto g = build_distributed_graph(test::slice(all, test::even_cuts(all.size(), p), c.rank()), c);
      int bad = 0;
      for (const auto& e : g.local_edges) {
        const auto [lo, hi] = g.edge_pe_range(e.src, e.dst);
        if (c.rank() < lo || c.rank() > hi) ++bad;
        if (home_pe(g, e.src, e.dst) > c.rank()) ++bad;
        const auto [vlo, vhi] = g.vertex_pe_range(e.src);
        if (c.rank() < vlo || c.rank() > vhi) ++bad;
      }
      return bad;
    });
    for (int b : res) EXPECT_EQ(b, 0) << "p=" << p;
  }
}

TEST(Classify, SharedAcrossBoundary) {
  const auto res = run_spmd(2, [](Communicator& c) {
    std::vector<WeightedEdge> mine = c.rank() == 0 ? std::vector{E(1, 5, 1), E(5, 1, 1), E(5, 2, 3)}
                                                   : std::vector{E(5, 7, 2), E(7, 5, 2)};
    auto g = build_distributed_graph(mine, c);
    return std::make_pair(classify_vertex(5, g), g.is_shared_vertex(5));
  });
  EXPECT_EQ(res[0].first, VertexClass::SharedWithNext);
  EXPECT_EQ(res[1].first, VertexClass::SharedWithPrev);
  EXPECT_TRUE(res[0].second);
  EXPECT_TRUE(res[1].second);
}

TEST(Classify, SharedBothAndGhost) {
  const auto res = run_spmd(3, [](Communicator& c) {
    std::vector<WeightedEdge> mine;
    if (c.rank() == 0) mine = {E(1, 5, 1), E(5, 1, 1)};
    if (c.rank() == 1) mine = {E(5, 6, 1)};
    if (c.rank() == 2) mine = {E(5, 7, 1), E(6, 5, 1), E(7, 5, 1)};
    auto g = build_distributed_graph(mine, c);
    std::vector<VertexClass> out{classify_vertex(5, g)};
    if (c.rank() == 1) out.push_back(classify_vertex(6, g));
    return out;
  });
  EXPECT_EQ(res[1][0], VertexClass::SharedBoth);
  EXPECT_EQ(res[1][1], VertexClass::Ghost);
  EXPECT_EQ(res[2][0], VertexClass::SharedWithPrev);
}

TEST(Classify, SinglePeAllLocal) {
  const auto und = test::canonical_ids(std::vector{E(1, 2, 1), E(2, 3, 1), E(3, 1, 1)});
  const auto res = run_spmd(1, [&](Communicator& c) {
    auto g = build_distributed_graph(test::directed(und), c);
    std::vector<VertexClass> out;
    for (VertexId v : {1, 2, 3}) out.push_back(classify_vertex(v, g));
    return out;
  });
  for (auto k : res[0]) EXPECT_EQ(k, VertexClass::Local);
}

TEST(Classify, UnknownVertex) {
  EXPECT_THROW(run_spmd(1, [](Communicator& c) { return classify_vertex(9, build_distributed_graph({E(1, 2, 1), E(2, 1, 1)}, c)); }),
               Error);
}

TEST(MakeGraph, IdsBackEdgesAndDedup) {
  const auto res = run_spmd(3, [](Communicator& c) {
    std::vector<WeightedEdge> mine;
    if (c.rank() == 0) mine = {E(2, 1, 4), E(3, 3, 1), E(1, 2, 4)};  // duplicate and self-loop
    if (c.rank() == 2) mine = {E(3, 2, 1), E(1, 3, 9)};
    auto g = make_graph_from_undirected(mine, c);
    return gather_edges(g, c);
  });
  const auto& all = res[0];
  EXPECT_EQ(all, (std::vector{E(1, 2, 4, 0), E(1, 3, 9, 1), E(2, 1, 4, 0), E(2, 3, 1, 2), E(3, 1, 9, 1), E(3, 2, 1, 2)}));
}

TEST(MakeGraph, ParallelEdgesWithDifferentWeightsKept) {
  const auto res = run_spmd(2, [](Communicator& c) {
    std::vector<WeightedEdge> mine;
    if (c.rank() == 1) mine = {E(1, 2, 7), E(2, 1, 3)};
    return gather_edges(make_graph_from_undirected(mine, c), c).size();
  });
  EXPECT_EQ(res[0], 4u);
}

TEST(MakeGraph, InvariantsOnRandomGraphs) {
  std::mt19937_64 rng(8);
  for (int p : {1, 2, 4, 7}) {
    const auto und = test::random_undirected(rng, 50, 300);
    const auto res = run_spmd(p, [&](Communicator& c) {
      std::vector<WeightedEdge> mine;
      for (std::size_t i = static_cast<std::size_t>(c.rank()); i < und.size(); i += static_cast<std::size_t>(p)) mine.push_back(und[i]);
      auto g = make_graph_from_undirected(mine, c);
      return std::make_pair(g.local_edges.size(), gather_edges(g, c));
    });
    const auto& all = res[0].second;
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end(), lex_less));
    EXPECT_EQ(all, test::directed(test::canonical_ids(und)));
    const double avg = static_cast<double>(all.size()) / p;
    for (const auto& [n, _] : res) {
      EXPECT_LE(static_cast<double>(n), std::ceil(avg));
      EXPECT_GE(static_cast<double>(n), std::floor(avg));
    }
  }
}

TEST(VertexCounts, SharedCountedOnce) {
  const auto res = run_spmd(2, [](Communicator& c) {
    std::vector<WeightedEdge> mine = c.rank() == 0 ? std::vector{E(1, 5, 1), E(5, 1, 1), E(5, 2, 3)}
                                                   : std::vector{E(5, 7, 2), E(7, 5, 2)};
    return global_vertex_counts(build_distributed_graph(mine, c), c);
  });
  EXPECT_EQ(res[0].total, 3u);
  EXPECT_EQ(res[0].shared, 1u);
  EXPECT_EQ(res[0].non_shared, 2u);
}

}  // namespace
}  // namespace dmst
