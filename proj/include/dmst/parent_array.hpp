#pragma once

// Distributed array P over vertex labels 0..n-1. PE i owns the block
// [i*n/p, (i+1)*n/p). P[v] points towards the representative of v's
// component; compress_parents turns it into a star forest.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dmst/grid_alltoall.hpp"
#include "dmst/sorting.hpp"

namespace dmst {

struct DistributedParentArray {
  std::uint64_t n = 0;
  int num_pes = 1;
  int rank = 0;
  std::vector<VertexId> local;  // P[begin() + i]

  DistributedParentArray() = default;
  DistributedParentArray(std::uint64_t size, int p, int r) : n(size), num_pes(p), rank(r) {
    local.resize(block_begin(r + 1) - block_begin(r));
    for (std::size_t i = 0; i < local.size(); ++i) local[i] = begin() + i;
  }

  std::uint64_t block_begin(int r) const { return detail::block_begin(n, num_pes, r); }
  std::uint64_t begin() const { return block_begin(rank); }
  std::uint64_t end() const { return block_begin(rank + 1); }
  bool owns(std::uint64_t v) const { return v >= begin() && v < end(); }

  int owner(std::uint64_t v) const {
    if (v >= n) throw Error(Errc::index_out_of_range, "index " + std::to_string(v) + " outside P of size " + std::to_string(n));
    // blocks are nearly equal, so start from the proportional guess
    int r = static_cast<int>((static_cast<unsigned __int128>(v) * num_pes) / n);
    while (r > 0 && block_begin(r) > v) --r;
    while (r + 1 < num_pes && block_begin(r + 1) <= v) ++r;
    return r;
  }

  VertexId& at(std::uint64_t v) {
    if (!owns(v)) throw Error(Errc::index_out_of_range, "index " + std::to_string(v) + " not owned by PE " + std::to_string(rank));
    return local[v - begin()];
  }
};

/// Collective. Creates P with P[v] = v; n is one more than the largest label
/// any PE passes.
inline DistributedParentArray make_parent_array(VertexId local_max_label, Communicator& comm) {
  const VertexId max_label = comm.allreduce(local_max_label, ops::max{});
  return DistributedParentArray(max_label + 1, comm.size(), comm.rank());
}

struct ParentWrite {
  VertexId index;
  VertexId value;
};

/// Collective. Applies P[index] = value for all given pairs.
inline void write_parents(DistributedParentArray& P, std::span<const ParentWrite> writes, Communicator& comm) {
  MessageBatch<ParentWrite> send(comm.size());
  for (const auto& w : writes) send[P.owner(w.index)].push_back(w);
  const auto recv = smart_alltoall(send, comm);
  for (const auto& from : recv) {
    for (const auto& w : from) P.at(w.index) = w.value;
  }
}

/// Collective. Returns P[v] for every requested v, in request order.
/// Duplicate requests are sent once.
inline std::vector<VertexId> request_labels(std::span<const VertexId> vertices, const DistributedParentArray& P,
                                            Communicator& comm) {
  const int p = comm.size();
  std::vector<VertexId> unique(vertices.begin(), vertices.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  MessageBatch<VertexId> send(p);
  for (auto v : unique) send[P.owner(v)].push_back(v);
  const auto requests = smart_alltoall(send, comm);
  MessageBatch<VertexId> replies(p);
  for (int q = 0; q < p; ++q) {
    replies[q].reserve(requests[q].size());
    for (auto v : requests[q]) replies[q].push_back(P.local[v - P.begin()]);
  }
  const auto answers = smart_alltoall(replies, comm);
  // unique is sorted and owners are monotone in v, so the answers arrive in
  // the order of unique
  std::vector<VertexId> flat;
  flat.reserve(unique.size());
  for (const auto& a : answers) flat.insert(flat.end(), a.begin(), a.end());
  std::vector<VertexId> out;
  out.reserve(vertices.size());
  for (auto v : vertices) {
    out.push_back(flat[static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), v) - unique.begin())]);
  }
  return out;
}

/// Collective. Pointer doubling until P[P[v]] = P[v] everywhere. Returns the
/// number of rounds that changed an entry.
inline std::uint64_t compress_parents(DistributedParentArray& P, Communicator& comm) {
  const std::uint64_t limit = static_cast<std::uint64_t>(std::bit_width(std::max<std::uint64_t>(P.n, 1) - 1)) + 1;
  std::uint64_t changing_rounds = 0;
  while (true) {
    std::vector<VertexId> targets;
    for (std::size_t i = 0; i < P.local.size(); ++i) {
      if (P.local[i] != P.begin() + i) targets.push_back(P.local[i]);
    }
    const auto grand = request_labels(targets, P, comm);
    bool changed = false;
    std::size_t k = 0;
    for (std::size_t i = 0; i < P.local.size(); ++i) {
      if (P.local[i] == P.begin() + i) continue;
      if (grand[k] != P.local[i]) {
        P.local[i] = grand[k];
        changed = true;
      }
      ++k;
    }
    if (!comm.allreduce(changed, ops::logical_or{})) return changing_rounds;
    if (++changing_rounds > limit) throw Error(Errc::cycle_detected, "pointer doubling on P does not converge");
  }
}

}  // namespace dmst
