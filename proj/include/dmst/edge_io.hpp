#pragma once

// Edge list files. Binary: 16-byte header ("MSTF", u16 version, u16 flags,
// u64 n) followed by the varint payload of the sorted directed edge list.
// Text: one undirected edge "u v w" per line; '#' starts a comment.

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "dmst/types.hpp"
#include "dmst/varint.hpp"

namespace dmst {

inline constexpr std::array<char, 4> kFileMagic{'M', 'S', 'T', 'F'};
inline constexpr std::uint16_t kFileVersion = 1;
inline constexpr std::size_t kHeaderBytes = 16;

struct EdgeFile {
  std::uint64_t n = 0;  // number of vertices (max label)
  std::uint16_t flags = 0;
  std::vector<WeightedEdge> edges;  // sorted directed edges
};

inline std::vector<std::uint8_t> serialize_edge_file(const EdgeFile& f) {
  std::vector<std::uint8_t> out(kHeaderBytes);
  std::memcpy(out.data(), kFileMagic.data(), 4);
  for (int i = 0; i < 2; ++i) out[4 + i] = static_cast<std::uint8_t>(kFileVersion >> (8 * i));
  for (int i = 0; i < 2; ++i) out[6 + i] = static_cast<std::uint8_t>(f.flags >> (8 * i));
  for (int i = 0; i < 8; ++i) out[8 + i] = static_cast<std::uint8_t>(f.n >> (8 * i));
  const auto payload = encode_edges(f.edges);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline EdgeFile parse_edge_file(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw Error(Errc::truncated_stream, "file shorter than the 16-byte header");
  if (std::memcmp(bytes.data(), kFileMagic.data(), 4) != 0) throw Error(Errc::io_error, "bad magic, expected MSTF");
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kFileVersion) throw Error(Errc::io_error, "unsupported version " + std::to_string(version));
  EdgeFile f;
  f.flags = static_cast<std::uint16_t>(bytes[6] | (bytes[7] << 8));
  for (int i = 0; i < 8; ++i) f.n |= static_cast<std::uint64_t>(bytes[8 + i]) << (8 * i);
  f.edges = decode_edges(bytes.subspan(kHeaderBytes));
  return f;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_error, "write failed for " + path);
}

/// Parses "u v w" lines into undirected edges (ids left 0).
inline std::vector<WeightedEdge> parse_text_edges(std::istream& in) {
  std::vector<WeightedEdge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::uint64_t u = 0, v = 0, w = 0;
    if (!(ls >> u)) continue;
    if (!(ls >> v >> w) || w > kMaxWeight) {
      throw Error(Errc::io_error, "line " + std::to_string(lineno) + ": expected 'u v w'");
    }
    edges.push_back({u, v, static_cast<Weight>(w), 0});
  }
  return edges;
}

/// Writes each undirected edge once (src < dst).
inline void write_text_edges(std::ostream& out, std::span<const WeightedEdge> edges) {
  for (const auto& e : edges) {
    if (e.src < e.dst) out << e.src << ' ' << e.dst << ' ' << e.weight << '\n';
  }
}

}  // namespace dmst
