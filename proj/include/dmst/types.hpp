#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace dmst {

using VertexId = std::uint64_t;
using Weight = std::uint32_t;
using EdgeId = std::uint64_t;

inline constexpr VertexId kMaxVertex = std::numeric_limits<VertexId>::max();
inline constexpr Weight kMaxWeight = std::numeric_limits<Weight>::max();
inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

enum class Errc {
  local_order_violation,
  unknown_vertex,
  unsorted_input,
  truncated_stream,
  continuation_overflow,
  pe_failure,
  pe_aborted,
  deadlock_detected,
  record_size_mismatch,
  length_mismatch,
  empty_global_input,
  invalid_spec,
  unknown_edge_id,
  vertex_count_over_threshold,
  missing_ghost_label,
  unlabeled_vertex,
  index_out_of_range,
  cycle_detected,
  unknown_id,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::local_order_violation: return "LocalOrderViolation";
    case Errc::unknown_vertex: return "UnknownVertex";
    case Errc::unsorted_input: return "UnsortedInput";
    case Errc::truncated_stream: return "TruncatedStream";
    case Errc::continuation_overflow: return "ContinuationOverflow";
    case Errc::pe_failure: return "PeFailure";
    case Errc::pe_aborted: return "PeAborted";
    case Errc::deadlock_detected: return "DeadlockDetected";
    case Errc::record_size_mismatch: return "RecordSizeMismatch";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_global_input: return "EmptyGlobalInput";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::unknown_edge_id: return "UnknownEdgeId";
    case Errc::vertex_count_over_threshold: return "VertexCountOverThreshold";
    case Errc::missing_ghost_label: return "MissingGhostLabel";
    case Errc::unlabeled_vertex: return "UnlabeledVertex";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::cycle_detected: return "CycleDetected";
    case Errc::unknown_id: return "UnknownId";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Directed weighted edge. An edge and its back edge carry the same id.
struct WeightedEdge {
  VertexId src = 0;
  VertexId dst = 0;
  Weight weight = 0;
  EdgeId id = 0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const WeightedEdge& e) {
  return os << "(" << e.src << "," << e.dst << "," << e.weight << ",#" << e.id << ")";
}

/// Lexicographic order of the 1D partition: (src, dst, weight), id last.
inline bool lex_less(const WeightedEdge& a, const WeightedEdge& b) {
  return std::tie(a.src, a.dst, a.weight, a.id) < std::tie(b.src, b.dst, b.weight, b.id);
}

inline bool same_endpoints(const WeightedEdge& a, const WeightedEdge& b) {
  return a.src == b.src && a.dst == b.dst;
}

/// Tie-broken total order over undirected edges: weight, then min endpoint,
/// then max endpoint. Used by the sequential oracles on original labels.
struct TotalOrderKey {
  Weight weight = 0;
  VertexId lo = 0;
  VertexId hi = 0;

  friend auto operator<=>(const TotalOrderKey&, const TotalOrderKey&) = default;
};

inline TotalOrderKey total_order_key(const WeightedEdge& e) {
  return {e.weight, std::min(e.src, e.dst), std::max(e.src, e.dst)};
}

inline bool total_order_less(const WeightedEdge& a, const WeightedEdge& b) {
  const auto ka = total_order_key(a);
  const auto kb = total_order_key(b);
  if (ka != kb) return ka < kb;
  return a.id < b.id;
}

/// Order used inside the distributed algorithms, where endpoints are
/// component labels rather than original vertices. Edge ids are ranks of the
/// undirected edges in (min, max, weight) order, so comparing (weight, id)
/// on contracted edges reproduces total_order_less on the original edges.
inline bool key_less(const WeightedEdge& a, const WeightedEdge& b) {
  return std::tie(a.weight, a.id) < std::tie(b.weight, b.id);
}

inline WeightedEdge reversed(const WeightedEdge& e) { return {e.dst, e.src, e.weight, e.id}; }

/// Placeholder that loses every key_less comparison.
inline constexpr WeightedEdge kNoCandidate{kMaxVertex, kMaxVertex, kMaxWeight, kNoEdge};

inline bool is_candidate(const WeightedEdge& e) { return e.id != kNoEdge || e.weight != kMaxWeight; }

}  // namespace dmst
