#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dmst/types.hpp"

namespace dmst {

// LEB128: little-endian base-128, MSB is the continuation bit.
inline void put_varint(std::vector<std::uint8_t>& out, std::uint64_t value) {
  while (value >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(value) | 0x80);
    value >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(value));
}

inline std::uint64_t zigzag(std::int64_t x) {
  return (static_cast<std::uint64_t>(x) << 1) ^ static_cast<std::uint64_t>(x >> 63);
}

inline std::int64_t unzigzag(std::uint64_t x) {
  return static_cast<std::int64_t>(x >> 1) ^ -static_cast<std::int64_t>(x & 1);
}

class VarintReader {
 public:
  explicit VarintReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::uint64_t next() {
    std::uint64_t value = 0;
    for (int i = 0; i < 10; ++i) {
      if (pos_ == bytes_.size()) throw Error(Errc::truncated_stream, "stream ends inside a varint");
      const std::uint8_t byte = bytes_[pos_++];
      value |= static_cast<std::uint64_t>(byte & 0x7f) << (7 * i);
      if ((byte & 0x80) == 0) return value;
    }
    throw Error(Errc::continuation_overflow, "varint longer than 10 bytes");
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

/// Compressed edge list. Per edge: varint(src - prev_src), zigzag(dst - src),
/// varint(weight), zigzag(id - prev_id). prev_src and prev_id start at 0.
inline std::vector<std::uint8_t> encode_edges(std::span<const WeightedEdge> edges) {
  std::vector<std::uint8_t> out;
  out.reserve(edges.size() * 6);
  VertexId prev_src = 0;
  EdgeId prev_id = 0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (i > 0) {
      const auto& p = edges[i - 1];
      if (std::tie(e.src, e.dst, e.weight) < std::tie(p.src, p.dst, p.weight)) {
        throw Error(Errc::unsorted_input, "edge " + std::to_string(i) + " breaks (src,dst,weight) order");
      }
    }
    put_varint(out, e.src - prev_src);
    put_varint(out, zigzag(static_cast<std::int64_t>(e.dst - e.src)));
    put_varint(out, e.weight);
    put_varint(out, zigzag(static_cast<std::int64_t>(e.id - prev_id)));
    prev_src = e.src;
    prev_id = e.id;
  }
  return out;
}

inline std::vector<WeightedEdge> decode_edges(std::span<const std::uint8_t> bytes) {
  std::vector<WeightedEdge> edges;
  VarintReader in(bytes);
  VertexId prev_src = 0;
  EdgeId prev_id = 0;
  while (!in.done()) {
    WeightedEdge e;
    e.src = prev_src + in.next();
    e.dst = e.src + static_cast<std::uint64_t>(unzigzag(in.next()));
    const std::uint64_t w = in.next();
    if (w > kMaxWeight) throw Error(Errc::truncated_stream, "weight field out of range");
    e.weight = static_cast<Weight>(w);
    e.id = prev_id + static_cast<std::uint64_t>(unzigzag(in.next()));
    prev_src = e.src;
    prev_id = e.id;
    edges.push_back(e);
  }
  return edges;
}

}  // namespace dmst
