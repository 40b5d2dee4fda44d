#include <map>
#include <random>

#include "test_util.hpp"

namespace dmst {
namespace {

TEST(RunSpmd, SingleRankReturnsRank) {
  const auto res = run_spmd(1, [](Communicator& c) { return c.rank(); });
  EXPECT_EQ(res, std::vector<int>{0});
}

TEST(RunSpmd, AllreduceCountsRanks) {
  const auto res = run_spmd(4, [](Communicator& c) { return c.allreduce(1, ops::sum{}); });
  EXPECT_EQ(res, (std::vector<int>{4, 4, 4, 4}));
}

TEST(RunSpmd, VoidPrograms) {
  int calls = 0;
  run_spmd(3, [&](Communicator& c) {
    c.barrier();
    ++calls;
  });
  EXPECT_EQ(calls, 3);
}

TEST(RunSpmd, RejectsZeroPes) { EXPECT_THROW(run_spmd(0, [](Communicator&) { return 0; }), Error); }

TEST(RunSpmd, RankStreamsDependOnSeedOnly) {
  auto draw = [](std::uint64_t seed) {
    return run_spmd(3, [](Communicator& c) { return c.rng()(); }, seed);
  };
  EXPECT_EQ(draw(5), draw(5));
  EXPECT_NE(draw(5), draw(6));
  const auto d = draw(5);
  EXPECT_NE(d[0], d[1]);
}

TEST(RunSpmd, SameSeedGivesIdenticalMsf) {
  const auto spec = parse_spec("gnm:n=500,m=3000,seed=4");
  auto once = [&] {
    return run_spmd(
        4,
        [&](Communicator& c) {
          auto g = generate(spec, c);
          auto r = filter_mst(g, test::small_filter(4), c);
          std::vector<EdgeId> ids;
          for (const auto& e : r.msf.edges) ids.push_back(e.id);
          return c.allgatherv(ids);
        },
        std::uint64_t{9});
  };
  EXPECT_EQ(once(), once());
}

TEST(RunSpmd, FailurePropagatesWithCode) {
  try {
    run_spmd(4, [](Communicator& c) {
      if (c.rank() == 2) throw Error(Errc::unknown_vertex, "boom");
      c.barrier();
      return 0;
    });
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_vertex);
  }
}

TEST(RunSpmd, LowestRankErrorWins) {
  try {
    run_spmd(3, [](Communicator& c) {
      if (c.rank() == 1) throw Error(Errc::io_error, "one");
      if (c.rank() == 2) throw Error(Errc::invalid_spec, "two");
      c.barrier();
      return 0;
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::io_error);
  }
}

TEST(RunSpmd, NonDmstExceptionsPropagate) {
  EXPECT_THROW(run_spmd(2,
                        [](Communicator& c) {
                          if (c.rank() == 1) throw std::logic_error("x");
                          c.barrier();
                          return 0;
                        }),
               std::logic_error);
}

TEST(RunSpmd, UnmatchedBarrierIsDeadlock) {
  try {
    run_spmd(2, [](Communicator& c) {
      if (c.rank() == 0) c.barrier();
      return 0;
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::deadlock_detected);
  }
}

TEST(RunSpmd, CollectiveKindMismatchDetected) {
  try {
    run_spmd(2, [](Communicator& c) {
      if (c.rank() == 0) c.barrier();
      else c.allreduce(1, ops::sum{});
      return 0;
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::deadlock_detected);
  }
}

TEST(RunSpmd, RecordSizeMismatchDetected) {
  try {
    run_spmd(2, [](Communicator& c) {
      if (c.rank() == 0) return static_cast<int>(c.allreduce(std::uint64_t{1}, ops::sum{}));
      return c.allreduce(1, ops::sum{});
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::record_size_mismatch);
  }
}

TEST(RunSpmd, AllreduceLengthMismatchDetected) {
  try {
    run_spmd(2, [](Communicator& c) {
      std::vector<int> v(static_cast<std::size_t>(c.rank() + 1), 1);
      return c.allreduce_vec(std::span<const int>(v), ops::sum{}).size();
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::length_mismatch);
  }
}

TEST(RunSpmd, BroadcastRootMismatchDetected) {
  try {
    run_spmd(3, [](Communicator& c) { return c.broadcast(c.rank(), c.rank() == 0 ? 0 : 1); });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::length_mismatch);
  }
  EXPECT_THROW(run_spmd(2, [](Communicator& c) { return c.broadcast(1, 5); }), Error);
}

TEST(Alltoallv, EmptyBatches) {
  const auto res = run_spmd(3, [](Communicator& c) {
    MessageBatch<int> send(3);
    auto recv = c.alltoallv(send);
    std::size_t total = 0;
    for (const auto& r : recv) total += r.size();
    return total;
  });
  EXPECT_EQ(res, (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Alltoallv, TwoPeSwap) {
  const auto res = run_spmd(2, [](Communicator& c) {
    MessageBatch<char> send(2);
    send[1 - c.rank()].push_back(c.rank() == 0 ? 'a' : 'b');
    return c.alltoallv(send)[1 - c.rank()];
  });
  EXPECT_EQ(res[0], std::vector<char>{'b'});
  EXPECT_EQ(res[1], std::vector<char>{'a'});
}

TEST(Alltoallv, WrongBatchSizeRejected) {
  EXPECT_THROW(run_spmd(2,
                        [](Communicator& c) {
                          MessageBatch<int> send(1);
                          return c.alltoallv(send).size();
                        }),
               Error);
}

TEST(Alltoallv, RandomBatchesPreserveMultiset) {
  struct Msg {
    std::int32_t from;
    std::int32_t to;
    std::uint64_t payload;
  };
  for (int p : {1, 2, 3, 5, 8}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::multiset<std::tuple<int, int, std::uint64_t>> sent;
      auto res = run_spmd(
          p,
          [&](Communicator& c) {
            std::uniform_int_distribution<int> count(0, 4);
            MessageBatch<Msg> send(p);
            for (int j = 0; j < p; ++j) {
              const int k = count(c.rng());
              for (int i = 0; i < k; ++i) send[j].push_back({c.rank(), j, c.rng()()});
            }
            auto recv = c.alltoallv(send);
            std::vector<Msg> flat;
            for (int i = 0; i < p; ++i) {
              for (const auto& m : recv[i]) {
                EXPECT_EQ(m.from, i);
                EXPECT_EQ(m.to, c.rank());
                flat.push_back(m);
              }
            }
            std::vector<Msg> mine;
            for (const auto& b : send) mine.insert(mine.end(), b.begin(), b.end());
            return std::make_pair(mine, flat);
          },
          seed);
      std::multiset<std::tuple<int, int, std::uint64_t>> got;
      for (const auto& [mine, flat] : res) {
        for (const auto& m : mine) sent.insert({m.from, m.to, m.payload});
        for (const auto& m : flat) got.insert({m.from, m.to, m.payload});
      }
      EXPECT_EQ(sent, got) << "p=" << p << " seed=" << seed;
    }
  }
}

TEST(Alltoallv, StatsCountRemoteMessages) {
  std::vector<CommStats> stats;
  SpmdOptions opts;
  opts.stats_out = &stats;
  run_spmd(
      3,
      [](Communicator& c) {
        MessageBatch<std::uint32_t> send(3);
        send[c.rank()].push_back(1);                  // self, not counted as a message
        send[(c.rank() + 1) % 3] = {1, 2, 3};         // 12 bytes
        c.alltoallv(send);
      },
      opts);
  ASSERT_EQ(stats.size(), 3u);
  for (const auto& s : stats) {
    EXPECT_EQ(s.messages_sent, 1u);
    EXPECT_EQ(s.bytes_sent, 12u);
    EXPECT_EQ(s.records_sent, 4u);
    EXPECT_EQ(s.records_received, 4u);
    EXPECT_EQ(s.max_distinct_destinations, 1u);
    EXPECT_EQ(s.collective_calls[static_cast<std::size_t>(CollectiveKind::alltoall)], 1u);
  }
}

TEST(Split, GroupsByColorOrderedByKey) {
  const auto res = run_spmd(6, [](Communicator& c) {
    auto sub = c.split(c.rank() % 2, -c.rank());
    const int sum = sub.allreduce(c.rank(), ops::sum{});
    return std::make_tuple(sub.size(), sub.rank(), sum);
  });
  // evens {0,2,4} sum 6, odds {1,3,5} sum 9; key -rank reverses the order
  EXPECT_EQ(res[0], std::make_tuple(3, 2, 6));
  EXPECT_EQ(res[4], std::make_tuple(3, 0, 6));
  EXPECT_EQ(res[5], std::make_tuple(3, 0, 9));
  EXPECT_EQ(res[1], std::make_tuple(3, 2, 9));
}

TEST(Split, SubCommunicatorsAreIndependent) {
  const auto res = run_spmd(4, [](Communicator& c) {
    auto sub = c.split(c.rank() / 2, c.rank());
    int acc = 0;
    // the two halves run different numbers of collectives
    for (int i = 0; i <= c.rank() / 2; ++i) acc += sub.allreduce(1, ops::sum{});
    c.barrier();
    return acc;
  });
  EXPECT_EQ(res, (std::vector<int>{2, 2, 4, 4}));
}

}  // namespace
}  // namespace dmst
