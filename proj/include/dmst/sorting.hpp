#pragma once

// Distributed sorting: hypercube quicksort for small inputs, single-level
// sample sort with regular sampling otherwise. Both finish with an exact
// block rebalance, so every PE ends up with floor/ceil(N/p) elements.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dmst/grid_alltoall.hpp"
#include "dmst/transport.hpp"

namespace dmst {

inline constexpr std::uint64_t kHypercubeSortLimit = 512;  // average elements per PE
inline constexpr std::size_t kSamplesPerPe = 16;

namespace detail {

// Equal keys are ordered by origin, which keeps the sort deterministic and
// lets duplicates split across PEs.
template <typename T>
struct Tagged {
  T value;
  std::uint32_t rank;
  std::uint32_t index;
};

template <typename T, typename Less>
struct TaggedLess {
  Less less;
  bool operator()(const Tagged<T>& a, const Tagged<T>& b) const {
    if (less(a.value, b.value)) return true;
    if (less(b.value, a.value)) return false;
    return std::tie(a.rank, a.index) < std::tie(b.rank, b.index);
  }
};

inline std::uint64_t block_begin(std::uint64_t total, int p, int r) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(total) * r) / p);
}

/// Moves elements so rank r holds global positions [r*N/p, (r+1)*N/p).
template <Record T>
std::vector<T> rebalance(std::vector<T> local, Communicator& comm) {
  const int p = comm.size();
  if (p == 1) return local;
  const std::uint64_t n = local.size();
  const std::uint64_t total = comm.allreduce(n, ops::sum{});
  const std::uint64_t offset = comm.prefix_sum(n);
  MessageBatch<T> send(p);
  std::uint64_t pos = 0;
  int target = 0;
  while (pos < n) {
    const std::uint64_t g = offset + pos;
    while (block_begin(total, p, target + 1) <= g) ++target;
    const std::uint64_t end = std::min(n, block_begin(total, p, target + 1) - offset);
    send[target].assign(local.begin() + static_cast<std::ptrdiff_t>(pos), local.begin() + static_cast<std::ptrdiff_t>(end));
    pos = end;
  }
  return flatten(comm.alltoallv(send));
}

template <typename T, typename TLess>
std::vector<T> merge_sorted(std::vector<T> a, const std::vector<T>& b, TLess less) {
  std::vector<T> out(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), out.begin(), less);
  return out;
}

/// Hypercube quicksort on the largest power-of-two subset of PEs. Output is
/// globally sorted in rank order but not balanced.
template <Record T, typename TLess>
std::vector<T> hypercube_quicksort(std::vector<T> data, TLess less, Communicator& comm) {
  const int p = comm.size();
  const int me = comm.rank();
  std::sort(data.begin(), data.end(), less);
  if (p == 1) return data;
  const int cube = static_cast<int>(std::bit_floor(static_cast<unsigned>(p)));
  if (cube < p) {
    MessageBatch<T> send(p);
    if (me >= cube) send[me - cube] = std::move(data);
    auto recv = comm.alltoallv(send);
    if (me >= cube) data.clear();
    for (auto& part : recv) data = merge_sorted(std::move(data), part, less);
  }
  struct Median {
    std::uint8_t has;
    T value;
  };
  for (int d = std::countr_zero(static_cast<unsigned>(cube)) - 1; d >= 0; --d) {
    Median mine{0, T{}};
    if (me < cube && !data.empty()) mine = {1, data[data.size() / 2]};
    const auto medians = comm.allgather(mine);
    MessageBatch<T> send(p);
    if (me < cube) {
      const int base = me & ~((2 << d) - 1);
      std::vector<T> candidates;
      for (int r = base; r < base + (2 << d); ++r) {
        if (medians[r].has) candidates.push_back(medians[r].value);
      }
      if (!candidates.empty()) {
        std::sort(candidates.begin(), candidates.end(), less);
        const T pivot = candidates[(candidates.size() - 1) / 2];
        const auto split = std::upper_bound(data.begin(), data.end(), pivot, less);
        const int partner = me ^ (1 << d);
        if ((me & (1 << d)) == 0) {
          send[partner].assign(split, data.end());
          data.erase(split, data.end());
        } else {
          send[partner].assign(data.begin(), split);
          data.erase(data.begin(), split);
        }
      }
    }
    auto recv = comm.alltoallv(send);
    for (auto& part : recv) {
      if (!part.empty()) data = merge_sorted(std::move(data), part, less);
    }
  }
  return data;
}

template <Record T, typename TLess>
std::vector<T> sample_sort(std::vector<T> data, TLess less, Communicator& comm) {
  const int p = comm.size();
  std::sort(data.begin(), data.end(), less);
  std::vector<T> samples;
  if (!data.empty()) {
    for (std::size_t i = 0; i < kSamplesPerPe; ++i) {
      samples.push_back(data[(i + 1) * data.size() / (kSamplesPerPe + 1)]);
    }
  }
  samples = hypercube_quicksort(std::move(samples), less, comm);
  const std::uint64_t count = samples.size();
  const std::uint64_t total = comm.allreduce(count, ops::sum{});
  const std::uint64_t offset = comm.prefix_sum(count);
  std::vector<T> picked;
  for (int j = 1; j < p; ++j) {
    const std::uint64_t pos = block_begin(total, p, j);
    if (pos >= offset && pos < offset + count) picked.push_back(samples[pos - offset]);
  }
  const auto splitters = comm.allgatherv(picked);
  MessageBatch<T> send(p);
  auto it = data.begin();
  for (std::size_t j = 0; j < splitters.size(); ++j) {
    const auto end = std::upper_bound(it, data.end(), splitters[j], less);
    send[j].assign(it, end);
    it = end;
  }
  send[splitters.size()].assign(it, data.end());
  auto recv = comm.alltoallv(send);
  std::vector<T> out = flatten(std::move(recv));
  std::sort(out.begin(), out.end(), less);
  return out;
}

}  // namespace detail

/// Globally sorts by `less`; the concatenation over ranks is sorted and every
/// PE holds floor or ceil of the average. Equal keys keep their input order
/// (origin rank, then origin index).
template <Record T, typename Less>
std::vector<T> distributed_sort(std::vector<T> local, Less less, Communicator& comm) {
  if (comm.size() == 1) {
    std::stable_sort(local.begin(), local.end(), less);
    return local;
  }
  using Tg = detail::Tagged<T>;
  std::vector<Tg> tagged;
  tagged.reserve(local.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    tagged.push_back({local[i], static_cast<std::uint32_t>(comm.rank()), static_cast<std::uint32_t>(i)});
  }
  local.clear();
  local.shrink_to_fit();
  const detail::TaggedLess<T, Less> tless{less};
  const std::uint64_t total = comm.allreduce(static_cast<std::uint64_t>(tagged.size()), ops::sum{});
  if (total < kHypercubeSortLimit * static_cast<std::uint64_t>(comm.size())) {
    tagged = detail::hypercube_quicksort(std::move(tagged), tless, comm);
  } else {
    tagged = detail::sample_sort(std::move(tagged), tless, comm);
  }
  tagged = detail::rebalance(std::move(tagged), comm);
  std::vector<T> out;
  out.reserve(tagged.size());
  for (const auto& t : tagged) out.push_back(t.value);
  return out;
}

/// Median (element at floor(S/2) of the globally sorted samples), broadcast
/// from the PE that holds it.
template <Record T, typename Less>
T distributed_median(std::vector<T> samples, Less less, Communicator& comm) {
  const std::uint64_t total = comm.allreduce(static_cast<std::uint64_t>(samples.size()), ops::sum{});
  if (total == 0) throw Error(Errc::empty_global_input, "no samples on any PE");
  auto sorted = distributed_sort(std::move(samples), less, comm);
  const auto counts = comm.allgather(static_cast<std::uint64_t>(sorted.size()));
  const std::uint64_t target = total / 2;
  std::uint64_t offset = 0;
  int owner = 0;
  while (offset + counts[owner] <= target) offset += counts[owner++];
  T value{};
  if (comm.rank() == owner) value = sorted[target - offset];
  return comm.broadcast(value, owner);
}

/// Samples max(1, ceil(rate * n)) local values with replacement per
/// nonempty PE and returns the median of all samples.
template <Record T, typename Less>
T sampled_median(std::span<const T> values, double rate, Less less, Communicator& comm) {
  std::vector<T> samples;
  if (!values.empty()) {
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(rate * static_cast<double>(values.size()))));
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    samples.reserve(k);
    for (std::size_t i = 0; i < k; ++i) samples.push_back(values[pick(comm.rng())]);
  }
  return distributed_median(std::move(samples), less, comm);
}

}  // namespace dmst
