#pragma once

// Seeded graph generators. Every family produces the same global edge list
// for any number of PEs: candidate edges come from counter-based streams and
// weights are a hash of (seed, min endpoint, max endpoint).

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dmst/graph.hpp"
#include "dmst/hash.hpp"

namespace dmst {

enum class Family { gnm, grid2d, rgg2d, rgg3d, rmat };

struct GeneratorSpec {
  Family family = Family::gnm;
  std::uint64_t n = 0;      // gnm, rgg
  std::uint64_t m = 0;      // gnm: undirected edges; rmat: target undirected edges
  std::uint64_t rows = 0;   // grid2d
  std::uint64_t cols = 0;   // grid2d
  std::uint64_t scale = 0;  // rmat: 2^scale vertices
  double d = 0.0;           // rgg radius
  std::uint64_t seed = 42;
  Weight wmin = 1;
  Weight wmax = 255;  // exclusive
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::gnm: return "gnm";
    case Family::grid2d: return "grid2d";
    case Family::rgg2d: return "rgg2d";
    case Family::rgg3d: return "rgg3d";
    case Family::rmat: return "rmat";
  }
  return "?";
}

/// Radius for an expected average degree, ignoring boundary effects.
inline double rgg_radius_for_degree(std::uint64_t n, double degree, int dim) {
  if (n < 2) return 0.0;
  const double per_point = degree / static_cast<double>(n - 1);
  if (dim == 2) return std::sqrt(per_point / std::numbers::pi);
  return std::cbrt(per_point * 3.0 / (4.0 * std::numbers::pi));
}

namespace detail {

inline std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw Error(Errc::invalid_spec, "bad integer for " + std::string(key) + ": '" + std::string(v) + "'");
  }
  return out;
}

inline double parse_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(std::string(v), &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw Error(Errc::invalid_spec, "bad number for " + std::string(key) + ": '" + std::string(v) + "'");
  }
}

}  // namespace detail

/// Parses "family:key=value,...", e.g. "gnm:n=4096,m=32768,seed=1".
inline GeneratorSpec parse_spec(std::string_view text) {
  GeneratorSpec s;
  const auto colon = text.find(':');
  const std::string_view fam = text.substr(0, colon);
  if (fam == "gnm") s.family = Family::gnm;
  else if (fam == "grid2d") s.family = Family::grid2d;
  else if (fam == "rgg2d") s.family = Family::rgg2d;
  else if (fam == "rgg3d") s.family = Family::rgg3d;
  else if (fam == "rmat") s.family = Family::rmat;
  else throw Error(Errc::invalid_spec, "unknown family '" + std::string(fam) + "'");

  std::map<std::string, std::string, std::less<>> kv;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw Error(Errc::invalid_spec, "expected key=value, got '" + std::string(item) + "'");
      kv[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  const auto take = [&](std::string_view key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  const auto need_uint = [&](std::string_view key) {
    auto v = take(key);
    if (!v) throw Error(Errc::invalid_spec, std::string(family_name(s.family)) + " needs " + std::string(key));
    return detail::parse_uint(key, *v);
  };
  if (auto v = take("seed")) s.seed = detail::parse_uint("seed", *v);
  if (auto v = take("wmin")) s.wmin = static_cast<Weight>(detail::parse_uint("wmin", *v));
  if (auto v = take("wmax")) s.wmax = static_cast<Weight>(detail::parse_uint("wmax", *v));
  switch (s.family) {
    case Family::gnm:
      s.n = need_uint("n");
      s.m = need_uint("m");
      break;
    case Family::grid2d:
      s.rows = need_uint("rows");
      s.cols = need_uint("cols");
      break;
    case Family::rgg2d:
    case Family::rgg3d: {
      s.n = need_uint("n");
      const int dim = s.family == Family::rgg2d ? 2 : 3;
      if (auto v = take("d")) s.d = detail::parse_double("d", *v);
      else if (auto deg = take("deg")) s.d = rgg_radius_for_degree(s.n, detail::parse_double("deg", *deg), dim);
      else throw Error(Errc::invalid_spec, "rgg needs d or deg");
      break;
    }
    case Family::rmat:
      s.scale = need_uint("scale");
      s.m = need_uint("edges");
      break;
  }
  if (!kv.empty()) throw Error(Errc::invalid_spec, "unknown key '" + kv.begin()->first + "'");
  return s;
}

inline std::string to_string(const GeneratorSpec& s) {
  std::string out = family_name(s.family);
  out += ':';
  switch (s.family) {
    case Family::gnm: out += "n=" + std::to_string(s.n) + ",m=" + std::to_string(s.m); break;
    case Family::grid2d: out += "rows=" + std::to_string(s.rows) + ",cols=" + std::to_string(s.cols); break;
    case Family::rgg2d:
    case Family::rgg3d: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", s.d);
      out += "n=" + std::to_string(s.n) + ",d=" + buf;
      break;
    }
    case Family::rmat: out += "scale=" + std::to_string(s.scale) + ",edges=" + std::to_string(s.m); break;
  }
  out += ",seed=" + std::to_string(s.seed);
  if (s.wmin != 1 || s.wmax != 255) out += ",wmin=" + std::to_string(s.wmin) + ",wmax=" + std::to_string(s.wmax);
  return out;
}

inline Weight edge_weight(const GeneratorSpec& s, VertexId u, VertexId v) {
  const std::uint64_t span = s.wmax > s.wmin ? s.wmax - s.wmin : 1;
  return static_cast<Weight>(s.wmin + hash_combine(s.seed, std::min(u, v), std::max(u, v)) % span);
}

inline void validate(const GeneratorSpec& s) {
  if (s.wmin < 1 || s.wmax <= s.wmin) throw Error(Errc::invalid_spec, "weight range must satisfy 1 <= wmin < wmax");
  switch (s.family) {
    case Family::gnm: {
      if (s.n < 1) throw Error(Errc::invalid_spec, "gnm needs n >= 1");
      const unsigned __int128 pairs = static_cast<unsigned __int128>(s.n) * (s.n - 1) / 2;
      if (s.m > pairs) throw Error(Errc::invalid_spec, "gnm: m exceeds n(n-1)/2");
      break;
    }
    case Family::grid2d:
      if (s.rows < 1 || s.cols < 1) throw Error(Errc::invalid_spec, "grid2d needs rows, cols >= 1");
      break;
    case Family::rgg2d:
    case Family::rgg3d:
      if (s.n < 1 || !(s.d >= 0.0)) throw Error(Errc::invalid_spec, "rgg needs n >= 1 and d >= 0");
      break;
    case Family::rmat:
      if (s.scale < 1 || s.scale > 40) throw Error(Errc::invalid_spec, "rmat scale must be in 1..40");
      break;
  }
}

namespace detail {

inline constexpr int kGnmChunks = 64;

// Number of sampled pairs per chunk: recursive binomial splitting over a
// fixed binary tree of chunks, identical on every PE.
inline void split_counts(std::uint64_t seed, std::uint64_t node, std::uint64_t count, std::uint64_t lo, std::uint64_t hi,
                         int first, int last, std::uint64_t pairs, std::vector<std::uint64_t>& out) {
  if (last - first == 1) {
    out[first] = count;
    return;
  }
  const int mid = (first + last) / 2;
  const auto chunk_begin = [&](int c) { return block_begin(pairs, kGnmChunks, c); };
  const std::uint64_t left_size = chunk_begin(mid) - lo;
  const std::uint64_t right_size = hi - chunk_begin(mid);
  std::uint64_t left = 0;
  if (count > 0 && left_size > 0) {
    std::mt19937_64 rng(hash_combine(seed, 0x676e6dULL, node));
    std::binomial_distribution<std::uint64_t> binom(count, static_cast<double>(left_size) / static_cast<double>(left_size + right_size));
    left = binom(rng);
  }
  left = std::clamp<std::uint64_t>(left, count > right_size ? count - right_size : 0, std::min(count, left_size));
  split_counts(seed, 2 * node, left, lo, chunk_begin(mid), first, mid, pairs, out);
  split_counts(seed, 2 * node + 1, count - left, chunk_begin(mid), hi, mid, last, pairs, out);
}

// k-th pair (i < j, 0-based) in lexicographic order of an n-vertex clique.
inline std::pair<std::uint64_t, std::uint64_t> pair_at(std::uint64_t n, std::uint64_t k) {
  const auto offset = [n](std::uint64_t i) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(i) * (2 * n - i - 1) / 2);
  };
  std::uint64_t lo = 0, hi = n - 1;  // largest i with offset(i) <= k
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (offset(mid) <= k) lo = mid;
    else hi = mid - 1;
  }
  return {lo, k - offset(lo) + lo + 1};
}

inline std::vector<WeightedEdge> gnm_local(const GeneratorSpec& s, int rank, int p) {
  const std::uint64_t pairs = s.n * (s.n - 1) / 2;
  std::vector<std::uint64_t> counts(kGnmChunks);
  split_counts(s.seed, 1, s.m, 0, pairs, 0, kGnmChunks, pairs, counts);
  std::vector<WeightedEdge> out;
  for (int c = rank; c < kGnmChunks; c += p) {
    const std::uint64_t begin = block_begin(pairs, kGnmChunks, c);
    const std::uint64_t size = block_begin(pairs, kGnmChunks, c + 1) - begin;
    const std::uint64_t k = counts[c];
    // Floyd's sampling of k distinct offsets in [0, size)
    std::mt19937_64 rng(hash_combine(s.seed, 0x63686bULL, static_cast<std::uint64_t>(c)));
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(k);
    for (std::uint64_t j = size - k; j < size; ++j) {
      const std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
      chosen.insert(chosen.contains(t) ? j : t);
    }
    std::vector<std::uint64_t> sorted(chosen.begin(), chosen.end());
    std::sort(sorted.begin(), sorted.end());
    for (auto off : sorted) {
      auto [i, j] = pair_at(s.n, begin + off);
      out.push_back({i + 1, j + 1, edge_weight(s, i + 1, j + 1), 0});
    }
  }
  return out;
}

inline std::vector<WeightedEdge> grid_local(const GeneratorSpec& s, int rank, int p) {
  std::vector<WeightedEdge> out;
  const auto id = [&](std::uint64_t r, std::uint64_t c) { return r * s.cols + c + 1; };
  for (std::uint64_t r = block_begin(s.rows, p, rank); r < block_begin(s.rows, p, rank + 1); ++r) {
    for (std::uint64_t c = 0; c < s.cols; ++c) {
      if (c + 1 < s.cols) out.push_back({id(r, c), id(r, c + 1), edge_weight(s, id(r, c), id(r, c + 1)), 0});
      if (r + 1 < s.rows) out.push_back({id(r, c), id(r + 1, c), edge_weight(s, id(r, c), id(r + 1, c)), 0});
    }
  }
  return out;
}

inline std::vector<WeightedEdge> rgg_local(const GeneratorSpec& s, int rank, int p) {
  const int dim = s.family == Family::rgg2d ? 2 : 3;
  const std::uint64_t n = s.n;
  // cells of side >= d; at most about n cells in total
  std::uint64_t per_dim = s.d > 0 ? static_cast<std::uint64_t>(std::floor(1.0 / s.d)) : 1;
  const auto max_per_dim = static_cast<std::uint64_t>(std::max(1.0, std::floor(std::pow(static_cast<double>(n), 1.0 / dim))));
  per_dim = std::clamp<std::uint64_t>(per_dim, 1, max_per_dim);
  struct Point {
    std::array<double, 3> x;
    std::uint64_t cell;
    std::uint64_t index;
  };
  std::vector<Point> pts(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    auto& pt = pts[i];
    pt.index = i;
    pt.x = {0, 0, 0};
    std::uint64_t cell = 0;
    for (int k = 0; k < dim; ++k) {
      pt.x[k] = unit_interval(hash_combine(s.seed, 0x726767ULL, i, static_cast<std::uint64_t>(k)));
      const auto ck = std::min<std::uint64_t>(per_dim - 1, static_cast<std::uint64_t>(pt.x[k] * static_cast<double>(per_dim)));
      cell = cell * per_dim + ck;
    }
    pt.cell = cell;
  }
  // relabel by cell so that neighbors get nearby ids
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return std::tie(a.cell, a.index) < std::tie(b.cell, b.index);
  });
  const std::uint64_t cells = static_cast<std::uint64_t>(std::pow(static_cast<double>(per_dim), dim) + 0.5);
  std::vector<std::uint64_t> cell_start(cells + 1, 0);
  for (const auto& pt : pts) ++cell_start[pt.cell + 1];
  for (std::uint64_t c = 0; c < cells; ++c) cell_start[c + 1] += cell_start[c];

  const double d2 = s.d * s.d;
  std::vector<WeightedEdge> out;
  for (std::uint64_t a = block_begin(n, p, rank); a < block_begin(n, p, rank + 1); ++a) {
    const auto& pa = pts[a];
    std::array<std::int64_t, 3> coord{0, 0, 0};
    std::uint64_t rest = pa.cell;
    for (int k = dim - 1; k >= 0; --k) {
      coord[k] = static_cast<std::int64_t>(rest % per_dim);
      rest /= per_dim;
    }
    const int span = dim == 3 ? 1 : 0;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -span; dz <= span; ++dz) {
          const std::array<std::int64_t, 3> nc{coord[0] + dx, coord[1] + dy, coord[2] + dz};
          bool inside = true;
          std::uint64_t cell = 0;
          for (int k = 0; k < dim; ++k) {
            if (nc[k] < 0 || nc[k] >= static_cast<std::int64_t>(per_dim)) inside = false;
            cell = cell * per_dim + static_cast<std::uint64_t>(std::max<std::int64_t>(nc[k], 0));
          }
          if (!inside) continue;
          for (std::uint64_t b = cell_start[cell]; b < cell_start[cell + 1]; ++b) {
            if (b <= a) continue;
            double dist = 0;
            for (int k = 0; k < dim; ++k) dist += (pa.x[k] - pts[b].x[k]) * (pa.x[k] - pts[b].x[k]);
            if (dist <= d2) out.push_back({a + 1, b + 1, edge_weight(s, a + 1, b + 1), 0});
          }
        }
      }
    }
  }
  return out;
}

inline std::vector<WeightedEdge> rmat_local(const GeneratorSpec& s, int rank, int p) {
  constexpr double a = 0.57, b = 0.19, c = 0.19;
  const std::uint64_t nv = std::uint64_t{1} << s.scale;
  const std::uint64_t max_pairs = nv * (nv - 1) / 2;
  const std::uint64_t target = std::min(s.m, max_pairs);
  std::mt19937_64 rng(hash_combine(s.seed, 0x726d6174ULL));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::set<std::pair<std::uint64_t, std::uint64_t>> edges;
  const std::uint64_t cap = 10 * std::max<std::uint64_t>(target, 1);
  for (std::uint64_t attempt = 0; attempt < cap && edges.size() < target; ++attempt) {
    std::uint64_t u = 0, v = 0;
    for (std::uint64_t level = 0; level < s.scale; ++level) {
      const double r = coin(rng);
      u <<= 1;
      v <<= 1;
      if (r < a) {
      } else if (r < a + b) {
        v |= 1;
      } else if (r < a + b + c) {
        u |= 1;
      } else {
        u |= 1;
        v |= 1;
      }
    }
    if (u == v) continue;
    edges.insert({std::min(u, v) + 1, std::max(u, v) + 1});
  }
  std::vector<WeightedEdge> out;
  const std::uint64_t total = edges.size();
  std::uint64_t k = 0;
  const std::uint64_t lo = block_begin(total, p, rank);
  const std::uint64_t hi = block_begin(total, p, rank + 1);
  for (const auto& [u, v] : edges) {
    if (k >= lo && k < hi) out.push_back({u, v, edge_weight(s, u, v), 0});
    ++k;
  }
  return out;
}

}  // namespace detail

/// This PE's share of the undirected edge list (one direction, ids unset).
inline std::vector<WeightedEdge> generate_local_edges(const GeneratorSpec& s, int rank, int p) {
  validate(s);
  switch (s.family) {
    case Family::gnm: return detail::gnm_local(s, rank, p);
    case Family::grid2d: return detail::grid_local(s, rank, p);
    case Family::rgg2d:
    case Family::rgg3d: return detail::rgg_local(s, rank, p);
    case Family::rmat: return detail::rmat_local(s, rank, p);
  }
  return {};
}

/// Collective. Globally sorted, balanced, back-edge complete graph.
inline DistributedGraph generate(const GeneratorSpec& s, Communicator& comm) {
  return make_graph_from_undirected(generate_local_edges(s, comm.rank(), comm.size()), comm);
}

/// Whole undirected edge list with the ids generate() assigns, computed
/// sequentially. Useful as oracle input.
inline std::vector<WeightedEdge> generate_sequential(const GeneratorSpec& s) {
  auto edges = generate_local_edges(s, 0, 1);
  for (auto& e : edges) {
    if (e.src > e.dst) std::swap(e.src, e.dst);
  }
  std::erase_if(edges, [](const WeightedEdge& e) { return e.src == e.dst; });
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return std::tie(a.src, a.dst, a.weight) < std::tie(b.src, b.dst, b.weight);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const WeightedEdge& a, const WeightedEdge& b) {
                            return a.src == b.src && a.dst == b.dst && a.weight == b.weight;
                          }),
              edges.end());
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i].id = i;
  return edges;
}

/// True iff generating under p1 and p2 PEs yields the same
/// global edge sequence. Runs its own SPMD sessions.
inline bool partition_independence_check(const GeneratorSpec& s, int p1, int p2) {
  const auto gather = [&](int p) {
    auto res = run_spmd(p, [&](Communicator& comm) {
      auto g = generate(s, comm);
      return gather_edges(g, comm);
    });
    return res.front();
  };
  return gather(p1) == gather(p2);
}

}  // namespace dmst
