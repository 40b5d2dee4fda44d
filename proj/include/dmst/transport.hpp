#pragma once

// Deterministic in-process SPMD runtime. Each logical PE runs as a fiber on
// the calling thread; collectives are synchronization points where a fiber
// yields until every member of the communicator has arrived. Scheduling is
// round-robin in rank order, so runs with equal inputs and seed are
// reproducible bit for bit.

#include <algorithm>
#include <array>
#include <boost/context/fiber.hpp>
#include <boost/context/fixedsize_stack.hpp>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <exception>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "dmst/hash.hpp"
#include "dmst/types.hpp"

namespace dmst {

enum class CollectiveKind : std::uint8_t {
  barrier,
  broadcast,
  allreduce,
  allgather,
  alltoall,
  prefix_sum,
  split,
};
inline constexpr std::size_t kCollectiveKinds = 7;

inline const char* collective_name(CollectiveKind k) {
  constexpr const char* names[] = {"barrier", "broadcast", "allreduce", "allgather",
                                   "alltoall", "prefix_sum", "split"};
  return names[static_cast<std::size_t>(k)];
}

/// Per-PE communication counters (alpha/beta accounting, never simulated).
struct CommStats {
  std::uint64_t messages_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t records_sent = 0;
  std::uint64_t records_received = 0;
  std::uint64_t alltoall_exchanges = 0;
  // Largest number of distinct remote destinations in one alltoall exchange.
  std::uint64_t max_distinct_destinations = 0;
  std::array<std::uint64_t, kCollectiveKinds> collective_calls{};

  CommStats& operator+=(const CommStats& o) {
    messages_sent += o.messages_sent;
    bytes_sent += o.bytes_sent;
    records_sent += o.records_sent;
    records_received += o.records_received;
    alltoall_exchanges += o.alltoall_exchanges;
    max_distinct_destinations = std::max(max_distinct_destinations, o.max_distinct_destinations);
    for (std::size_t i = 0; i < kCollectiveKinds; ++i) collective_calls[i] += o.collective_calls[i];
    return *this;
  }
  friend bool operator==(const CommStats&, const CommStats&) = default;
};

enum class AlltoallMode { automatic, direct, grid };

struct SpmdOptions {
  std::uint64_t seed = 42;
  AlltoallMode alltoall = AlltoallMode::automatic;
  std::size_t stack_bytes = std::size_t{1} << 20;
  std::vector<CommStats>* stats_out = nullptr;
};

/// Per-destination (send side) or per-sender (receive side) record buffers.
template <typename T>
using MessageBatch = std::vector<std::vector<T>>;

template <typename T>
concept Record = std::is_trivially_copyable_v<T>;

namespace detail {

namespace ctx = boost::context;

struct RankContext {
  int global_rank = 0;
  ctx::fiber sink;
  CommStats stats;
  std::mt19937_64 rng;
};

class Runtime {
 public:
  explicit Runtime(int p, const SpmdOptions& opts) : ranks(static_cast<std::size_t>(p)), mode(opts.alltoall) {
    for (int r = 0; r < p; ++r) {
      ranks[r].global_rank = r;
      ranks[r].rng.seed(hash_combine(opts.seed, static_cast<std::uint64_t>(r)));
    }
  }

  template <typename Pred>
  void wait(RankContext& me, Pred&& ready) {
    while (true) {
      if (aborted) throw Error(Errc::pe_aborted, "another PE failed");
      if (ready()) return;
      me.sink = std::move(me.sink).resume();
    }
  }

  std::vector<RankContext> ranks;
  AlltoallMode mode;
  bool aborted = false;
  std::uint64_t progress = 0;
};

struct Post {
  CollectiveKind kind = CollectiveKind::barrier;
  std::size_t record_size = 0;
  std::size_t length = 0;
  std::vector<std::vector<std::byte>> buffers;
};

struct Group {
  Group(Runtime* runtime, std::vector<int> member_ranks)
      : rt(runtime), members(std::move(member_ranks)), epochs(members.size(), 0), caches(members.size()) {
    for (auto& slot : posts) slot.resize(members.size());
  }

  Runtime* rt;
  std::vector<int> members;  // global ranks, in local rank order
  std::uint64_t generation = 0;
  std::size_t arrived = 0;
  std::array<std::vector<Post>, 2> posts;
  std::vector<std::uint64_t> epochs;
  std::optional<Error> failure;
  std::uint64_t failure_epoch = 0;
  std::vector<std::shared_ptr<void>> caches;

  struct PendingSplit {
    std::shared_ptr<Group> group;
    std::size_t fetched = 0;
  };
  std::map<std::pair<std::uint64_t, int>, PendingSplit> pending;
};

template <typename T>
std::vector<std::byte> to_bytes(std::span<const T> values) {
  std::vector<std::byte> out(values.size_bytes());
  if (!values.empty()) std::memcpy(out.data(), values.data(), values.size_bytes());
  return out;
}

template <typename T>
std::vector<T> from_bytes(const std::vector<std::byte>& bytes) {
  std::vector<T> out(bytes.size() / sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), bytes.data(), out.size() * sizeof(T));
  return out;
}

}  // namespace detail

class Communicator {
 public:
  Communicator() = default;
  Communicator(std::shared_ptr<detail::Group> group, int local_rank)
      : group_(std::move(group)), rank_(local_rank) {}

  int rank() const { return rank_; }
  int size() const { return static_cast<int>(group_->members.size()); }
  int global_rank() const { return group_->members[rank_]; }
  /// Global rank of member `local`.
  int member(int local) const { return group_->members[local]; }

  CommStats& stats() { return context().stats; }
  const CommStats& stats() const { return group_->rt->ranks[global_rank()].stats; }
  std::mt19937_64& rng() { return context().rng; }
  AlltoallMode alltoall_mode() const { return group_->rt->mode; }

  /// Per-member scratch slot owned by higher layers (grid sub-communicators).
  std::shared_ptr<void>& cache() { return group_->caches[rank_]; }

  void barrier() {
    begin(CollectiveKind::barrier, 0, 0);
    sync();
  }

  template <Record T>
  T broadcast(const T& value, int root) {
    check_root(root);
    auto& post = begin(CollectiveKind::broadcast, sizeof(T), static_cast<std::size_t>(root));
    if (rank_ == root) post.buffers.push_back(detail::to_bytes(std::span<const T>(&value, 1)));
    const auto e = sync();
    return detail::from_bytes<T>(slot(e, root).buffers.at(0)).at(0);
  }

  template <Record T>
  std::vector<T> broadcast_vec(std::span<const T> values, int root) {
    check_root(root);
    auto& post = begin(CollectiveKind::broadcast, sizeof(T), static_cast<std::size_t>(root));
    if (rank_ == root) post.buffers.push_back(detail::to_bytes(values));
    const auto e = sync();
    return detail::from_bytes<T>(slot(e, root).buffers.at(0));
  }

  template <Record T, typename Op>
  T allreduce(const T& value, Op op) {
    if constexpr (std::is_same_v<T, bool>) {
      // vector<bool> has no contiguous storage
      const std::uint8_t byte = value;
      return allreduce_vec(std::span<const std::uint8_t>(&byte, 1),
                           [&op](std::uint8_t a, std::uint8_t b) -> std::uint8_t { return op(a != 0, b != 0); })
                 .at(0) != 0;
    } else {
      return allreduce_vec(std::span<const T>(&value, 1), op).at(0);
    }
  }

  /// Element-wise reduction over equally long vectors; identical on all ranks.
  template <Record T, typename Op>
  std::vector<T> allreduce_vec(std::span<const T> values, Op op) {
    auto& post = begin(CollectiveKind::allreduce, sizeof(T), values.size());
    post.buffers.push_back(detail::to_bytes(values));
    context().stats.bytes_sent += values.size_bytes();
    const auto e = sync();
    std::vector<T> acc = detail::from_bytes<T>(slot(e, 0).buffers[0]);
    std::vector<T> tmp(acc.size());
    for (int r = 1; r < size(); ++r) {
      const auto& bytes = slot(e, r).buffers[0];
      if (!tmp.empty()) std::memcpy(tmp.data(), bytes.data(), bytes.size());
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = op(acc[i], tmp[i]);
    }
    return acc;
  }

  /// Exclusive prefix sum over ranks.
  template <Record T>
  T prefix_sum(const T& value) {
    auto& post = begin(CollectiveKind::prefix_sum, sizeof(T), 1);
    post.buffers.push_back(detail::to_bytes(std::span<const T>(&value, 1)));
    const auto e = sync();
    T acc{};
    for (int r = 0; r < rank_; ++r) acc = acc + detail::from_bytes<T>(slot(e, r).buffers[0])[0];
    return acc;
  }

  template <Record T>
  std::vector<T> allgather(const T& value) {
    return allgatherv(std::span<const T>(&value, 1));
  }

  /// Concatenation of all contributions in rank order.
  template <Record T>
  std::vector<T> allgatherv(std::span<const T> values) {
    auto& post = begin(CollectiveKind::allgather, sizeof(T), 0);
    post.buffers.push_back(detail::to_bytes(values));
    context().stats.bytes_sent += values.size_bytes();
    const auto e = sync();
    std::vector<T> out;
    for (int r = 0; r < size(); ++r) {
      auto part = detail::from_bytes<T>(slot(e, r).buffers[0]);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }

  template <Record T>
  std::vector<T> allgatherv(const std::vector<T>& values) {
    return allgatherv(std::span<const T>(values));
  }

  /// Personalized all-to-all. send[j] goes to rank j; the result holds, per
  /// sender in ascending rank order, the records addressed to this rank.
  template <Record T>
  MessageBatch<T> alltoallv(const MessageBatch<T>& send) {
    if (send.size() != static_cast<std::size_t>(size())) {
      throw Error(Errc::index_out_of_range, "alltoallv batch must have one buffer per rank");
    }
    auto& post = begin(CollectiveKind::alltoall, sizeof(T), 0);
    auto& st = context().stats;
    std::uint64_t distinct = 0;
    post.buffers.reserve(send.size());
    for (int j = 0; j < size(); ++j) {
      const auto& buf = send[j];
      post.buffers.push_back(detail::to_bytes(std::span<const T>(buf)));
      st.records_sent += buf.size();
      if (j != rank_ && !buf.empty()) {
        ++st.messages_sent;
        ++distinct;
        st.bytes_sent += buf.size() * sizeof(T);
      }
    }
    ++st.alltoall_exchanges;
    st.max_distinct_destinations = std::max(st.max_distinct_destinations, distinct);
    const auto e = sync();
    MessageBatch<T> recv(send.size());
    for (int i = 0; i < size(); ++i) {
      recv[i] = detail::from_bytes<T>(slot(e, i).buffers[rank_]);
      st.records_received += recv[i].size();
    }
    return recv;
  }

  /// Collective split into sub-communicators; members of one color are ordered
  /// by (key, rank).
  Communicator split(int color, int key) {
    struct Entry {
      int color, key, rank;
    };
    const auto entries = allgather(Entry{color, key, rank_});
    // allgather consumed one epoch; the split itself is keyed by the next one
    auto& post = begin(CollectiveKind::split, 0, 0);
    (void)post;
    const std::uint64_t e = group_->epochs[rank_];
    std::vector<Entry> mine;
    for (const auto& en : entries) {
      if (en.color == color) mine.push_back(en);
    }
    std::sort(mine.begin(), mine.end(),
              [](const Entry& a, const Entry& b) { return std::tie(a.key, a.rank) < std::tie(b.key, b.rank); });
    auto& pending = group_->pending[{e, color}];
    if (!pending.group) {
      std::vector<int> globals;
      for (const auto& en : mine) globals.push_back(group_->members[en.rank]);
      pending.group = std::make_shared<detail::Group>(group_->rt, std::move(globals));
    }
    auto sub = pending.group;
    if (++pending.fetched == mine.size()) group_->pending.erase({e, color});
    int local = 0;
    while (mine[local].rank != rank_) ++local;
    sync();
    return Communicator(std::move(sub), local);
  }

 private:
  detail::RankContext& context() { return group_->rt->ranks[global_rank()]; }

  detail::Post& begin(CollectiveKind kind, std::size_t record_size, std::size_t length) {
    auto& post = group_->posts[group_->epochs[rank_] % 2][rank_];
    post.kind = kind;
    post.record_size = record_size;
    post.length = length;
    post.buffers.clear();
    ++context().stats.collective_calls[static_cast<std::size_t>(kind)];
    return post;
  }

  void check_root(int root) const {
    if (root < 0 || root >= size()) {
      throw Error(Errc::index_out_of_range, "broadcast root " + std::to_string(root) + " outside the communicator");
    }
  }

  const detail::Post& slot(std::uint64_t epoch, int r) const { return group_->posts[epoch % 2][r]; }

  void validate(std::uint64_t e) {
    auto& g = *group_;
    const auto& first = g.posts[e % 2][0];
    for (std::size_t r = 1; r < g.members.size(); ++r) {
      const auto& p = g.posts[e % 2][r];
      if (p.kind != first.kind) {
        g.failure = Error(Errc::deadlock_detected, std::string("collective mismatch: ") + collective_name(first.kind) +
                                                       " vs " + collective_name(p.kind));
      } else if (p.record_size != first.record_size && p.kind != CollectiveKind::broadcast) {
        g.failure = Error(Errc::record_size_mismatch, "record sizes differ between members");
      } else if (p.kind == CollectiveKind::allreduce && p.length != first.length) {
        g.failure = Error(Errc::length_mismatch, "allreduce vector lengths differ between members");
      } else if (p.kind == CollectiveKind::broadcast && p.length != first.length) {
        g.failure = Error(Errc::length_mismatch, "broadcast roots differ between members");
      }
      if (g.failure) {
        g.failure_epoch = e;
        return;
      }
    }
  }

  // Arrive at the current epoch and wait for all members. Returns the epoch.
  std::uint64_t sync() {
    auto& g = *group_;
    auto* rt = g.rt;
    const std::uint64_t e = g.epochs[rank_]++;
    ++rt->progress;
    if (++g.arrived == g.members.size()) {
      g.arrived = 0;
      validate(e);
      ++g.generation;
    } else {
      rt->wait(context(), [&g, e] { return g.generation > e; });
    }
    if (g.failure && g.failure_epoch == e) throw *g.failure;
    return e;
  }

  std::shared_ptr<detail::Group> group_;
  int rank_ = 0;
};

/// Element-wise reduction functors for allreduce_vec.
namespace ops {
struct sum {
  template <typename T>
  T operator()(const T& a, const T& b) const { return a + b; }
};
struct max {
  template <typename T>
  T operator()(const T& a, const T& b) const { return std::max(a, b); }
};
struct min {
  template <typename T>
  T operator()(const T& a, const T& b) const { return std::min(a, b); }
};
struct logical_or {
  bool operator()(bool a, bool b) const { return a || b; }
};
/// Lightest edge record by key_less.
struct min_by_key {
  WeightedEdge operator()(const WeightedEdge& a, const WeightedEdge& b) const { return key_less(b, a) ? b : a; }
};
}  // namespace ops

template <typename Result, typename Program>
std::vector<Result> run_spmd_impl(int p, Program& program, const SpmdOptions& opts) {
  namespace ctx = boost::context;
  if (p < 1) throw Error(Errc::index_out_of_range, "run_spmd needs p >= 1");
  detail::Runtime rt(p, opts);
  std::vector<int> world(static_cast<std::size_t>(p));
  for (int r = 0; r < p; ++r) world[r] = r;
  auto group = std::make_shared<detail::Group>(&rt, world);

  std::vector<std::optional<Result>> results(p);
  std::vector<std::exception_ptr> errors(p);
  std::vector<bool> finished(p, false);
  std::vector<ctx::fiber> fibers;
  fibers.reserve(p);
  for (int r = 0; r < p; ++r) {
    fibers.emplace_back(std::allocator_arg, ctx::fixedsize_stack(opts.stack_bytes), [&, r](ctx::fiber&& sink) {
      auto& me = rt.ranks[r];
      me.sink = std::move(sink);
      try {
        Communicator comm(group, r);
        results[r].emplace(program(comm));
      } catch (const ctx::detail::forced_unwind&) {
        throw;
      } catch (...) {
        errors[r] = std::current_exception();
        rt.aborted = true;
      }
      finished[r] = true;
      ++rt.progress;
      return std::move(me.sink);
    });
  }

  bool deadlock = false;
  std::size_t remaining = static_cast<std::size_t>(p);
  while (remaining > 0) {
    const auto before = rt.progress;
    for (int r = 0; r < p; ++r) {
      if (finished[r]) continue;
      fibers[r] = std::move(fibers[r]).resume();
      if (finished[r]) --remaining;
    }
    if (remaining > 0 && rt.progress == before) {
      // every live PE waits on a collective that can never complete
      deadlock = true;
      rt.aborted = true;
    }
  }

  if (opts.stats_out) {
    opts.stats_out->clear();
    for (const auto& r : rt.ranks) opts.stats_out->push_back(r.stats);
  }
  for (int r = 0; r < p; ++r) {
    if (!errors[r]) continue;
    try {
      std::rethrow_exception(errors[r]);
    } catch (const Error& e) {
      if (e.code() == Errc::pe_aborted) continue;
      throw;
    }
  }
  if (deadlock) throw Error(Errc::deadlock_detected, "PEs blocked in unmatched collectives");
  for (int r = 0; r < p; ++r) {
    if (errors[r]) std::rethrow_exception(errors[r]);
  }
  std::vector<Result> out;
  out.reserve(p);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

/// Runs `program(Communicator&)` on p logical PEs and returns each rank's
/// result. Rethrows the lowest-ranked PE failure.
template <typename Program>
auto run_spmd(int p, Program&& program, const SpmdOptions& opts = {}) {
  using R = std::invoke_result_t<Program&, Communicator&>;
  if constexpr (std::is_void_v<R>) {
    auto wrapped = [&](Communicator& c) {
      program(c);
      return std::monostate{};
    };
    return run_spmd_impl<std::monostate>(p, wrapped, opts);
  } else {
    return run_spmd_impl<R>(p, program, opts);
  }
}

template <typename Program>
auto run_spmd(int p, Program&& program, std::uint64_t seed) {
  SpmdOptions opts;
  opts.seed = seed;
  return run_spmd(p, std::forward<Program>(program), opts);
}

}  // namespace dmst
