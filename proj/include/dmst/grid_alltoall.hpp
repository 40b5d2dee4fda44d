#pragma once

// Two-level (grid) all-to-all. PEs form a virtual grid with
// cols = floor(sqrt(p)) columns and rows = ceil(p / cols) rows. A message
// from i to j first travels inside the column of i to the intermediate PE in
// that column and the row of j, then inside that row to j. Each PE therefore
// talks to O(sqrt(p)) partners per phase instead of up to p.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <vector>

#include "dmst/transport.hpp"

namespace dmst {

inline int integer_sqrt(int p) {
  int c = 0;
  while ((c + 1) * (c + 1) <= p) ++c;
  return c;
}

struct GridCoords {
  int p = 1;
  int cols = 1;
  int rows = 1;

  explicit GridCoords(int num_pes) : p(num_pes), cols(std::max(1, integer_sqrt(num_pes))) {
    rows = (p + cols - 1) / cols;
  }

  int column(int i) const { return i % cols; }
  int row(int i) const { return i / cols; }
  bool complete() const { return p == cols * rows; }
  bool in_incomplete_row(int i) const { return !complete() && row(i) == rows - 1; }
  // Members of the last, incomplete row are virtually appended to row column(i).
  int row_group(int i) const { return in_incomplete_row(i) ? column(i) : row(i); }
  int index_in_row_group(int i) const { return in_incomplete_row(i) ? cols : column(i); }
  int index_in_column(int i) const { return row(i); }
};

/// Intermediate PE for a message from i to j.
inline int grid_intermediate(int i, int j, int p) {
  const GridCoords g(p);
  const int r = g.in_incomplete_row(j) ? g.column(j) : g.row(j);
  return r * g.cols + g.column(i);
}

enum class AlltoallStrategy { direct, two_level_grid };

inline constexpr std::uint64_t kGridByteThreshold = 500;

/// Grid is chosen when the average message is small and the grid is not
/// degenerate.
inline AlltoallStrategy choose_alltoall_strategy(std::uint64_t total_bytes, std::uint64_t total_messages, int p) {
  if (p < 4 || total_messages == 0) return AlltoallStrategy::direct;
  return total_bytes < kGridByteThreshold * total_messages ? AlltoallStrategy::two_level_grid
                                                           : AlltoallStrategy::direct;
}

namespace detail {

struct GridComms {
  GridCoords coords;
  Communicator column;
  Communicator row;
};

inline GridComms& grid_comms(Communicator& comm) {
  auto& slot = comm.cache();
  if (!slot) {
    GridCoords g(comm.size());
    const int i = comm.rank();
    auto column = comm.split(g.column(i), i);
    auto row = comm.split(g.row_group(i), i);
    slot = std::make_shared<GridComms>(GridComms{g, std::move(column), std::move(row)});
  }
  return *std::static_pointer_cast<GridComms>(slot);
}

template <typename T>
struct Routed {
  std::int32_t src;
  std::int32_t dst;
  T payload;
};

}  // namespace detail

template <Record T>
MessageBatch<T> two_level_alltoall(const MessageBatch<T>& send, Communicator& comm) {
  const int p = comm.size();
  if (p == 1) return send;
  auto& grid = detail::grid_comms(comm);
  const auto& g = grid.coords;
  const int me = comm.rank();

  MessageBatch<detail::Routed<T>> phase1(grid.column.size());
  for (int j = 0; j < p; ++j) {
    if (send[j].empty()) continue;
    auto& out = phase1[g.index_in_column(grid_intermediate(me, j, p))];
    for (const auto& rec : send[j]) out.push_back({me, j, rec});
  }
  auto mid = grid.column.alltoallv(phase1);

  MessageBatch<detail::Routed<T>> phase2(grid.row.size());
  for (const auto& from : mid) {
    for (const auto& rec : from) phase2[g.index_in_row_group(rec.dst)].push_back(rec);
  }
  auto arrived = grid.row.alltoallv(phase2);

  std::vector<detail::Routed<T>> all;
  for (auto& part : arrived) all.insert(all.end(), part.begin(), part.end());
  // every message of one sender used the same path, so a stable sort by
  // sender restores the direct delivery order
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.src < b.src; });
  MessageBatch<T> recv(p);
  for (const auto& rec : all) recv[rec.src].push_back(rec.payload);
  return recv;
}

/// All-to-all that picks direct or grid delivery from the global average
/// message size, unless the runtime pins a mode.
template <Record T>
MessageBatch<T> smart_alltoall(const MessageBatch<T>& send, Communicator& comm) {
  AlltoallStrategy strategy = AlltoallStrategy::direct;
  switch (comm.alltoall_mode()) {
    case AlltoallMode::direct: strategy = AlltoallStrategy::direct; break;
    case AlltoallMode::grid: strategy = AlltoallStrategy::two_level_grid; break;
    case AlltoallMode::automatic: {
      struct Volume {
        std::uint64_t bytes = 0;
        std::uint64_t messages = 0;
        Volume operator+(const Volume& o) const { return {bytes + o.bytes, messages + o.messages}; }
      } local;
      for (int j = 0; j < comm.size(); ++j) {
        if (j == comm.rank() || send[j].empty()) continue;
        local.bytes += send[j].size() * sizeof(T);
        ++local.messages;
      }
      const auto total = comm.allreduce(local, ops::sum{});
      strategy = choose_alltoall_strategy(total.bytes, total.messages, comm.size());
      break;
    }
  }
  return strategy == AlltoallStrategy::two_level_grid ? two_level_alltoall(send, comm) : comm.alltoallv(send);
}

template <typename T>
std::vector<T> flatten(MessageBatch<T>&& batch) {
  std::size_t total = 0;
  for (const auto& b : batch) total += b.size();
  std::vector<T> out;
  out.reserve(total);
  for (auto& b : batch) out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace dmst
