#pragma once

// Driver behind the dmst command line tool: single runs with a JSON report,
// and benchmark matrices with one CSV row per cell.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmst/boruvka.hpp"
#include "dmst/edge_io.hpp"
#include "dmst/filter_boruvka.hpp"
#include "dmst/generators.hpp"
#include "dmst/oracle.hpp"

namespace dmst {

enum class Algorithm { boruvka, filter, kruskal };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::boruvka: return "boruvka";
    case Algorithm::filter: return "filter";
    case Algorithm::kruskal: return "kruskal";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "boruvka") return Algorithm::boruvka;
  if (s == "filter" || s == "filterBoruvka") return Algorithm::filter;
  if (s == "kruskal") return Algorithm::kruskal;
  throw Error(Errc::invalid_spec, "unknown algorithm '" + std::string(s) + "'");
}

inline const char* alltoall_name(AlltoallMode m) {
  switch (m) {
    case AlltoallMode::automatic: return "auto";
    case AlltoallMode::direct: return "direct";
    case AlltoallMode::grid: return "grid";
  }
  return "?";
}

inline AlltoallMode parse_alltoall(std::string_view s) {
  if (s == "auto") return AlltoallMode::automatic;
  if (s == "direct") return AlltoallMode::direct;
  if (s == "grid") return AlltoallMode::grid;
  throw Error(Errc::invalid_spec, "unknown alltoall mode '" + std::string(s) + "'");
}

struct RunOptions {
  std::string source;  // generator spec or edge file path
  Algorithm algo = Algorithm::boruvka;
  int p = 1;
  std::uint64_t seed = 42;
  bool verify = false;
  bool preprocess = true;
  AlltoallMode alltoall = AlltoallMode::automatic;
  std::uint64_t base_case_threshold = 0;  // 0: library default
};

struct RunReport {
  std::string algorithm;
  int p = 1;
  std::string graph;
  std::uint64_t seed = 42;
  std::string alltoall;
  bool preprocess = true;
  std::uint64_t vertices = 0;
  std::uint64_t directed_edges = 0;
  std::uint64_t msf_total_weight = 0;
  std::uint64_t msf_edge_count = 0;
  std::optional<bool> verified;
  std::string verdict;  // empty when not verified
  CommStats comm;
  std::uint64_t boruvka_rounds = 0;
  std::uint64_t base_case_vertices = 0;
  std::uint64_t boruvka_calls = 0;
  std::uint64_t preprocess_vertices_removed = 0;
  PhaseTimes phases{};
  double total_seconds = 0;
  double throughput = 0;  // directed input edges per second
};

/// Text edge lists end in .txt; everything else with an existing path is read
/// as the binary format; otherwise the source is a generator spec.
inline bool source_is_file(const std::string& source) { return std::filesystem::is_regular_file(source); }

/// Generated graph as an edge file: all directed edges in global order.
/// The result does not depend on p.
inline EdgeFile generate_edge_file(const std::string& spec_text, int p = 1) {
  const auto spec = parse_spec(spec_text);
  validate(spec);
  auto parts = run_spmd(p, [&](Communicator& comm) { return generate(spec, comm).local_edges; });
  EdgeFile f;
  for (auto& part : parts) f.edges.insert(f.edges.end(), part.begin(), part.end());
  for (const auto& e : f.edges) f.n = std::max({f.n, e.src, e.dst});
  return f;
}

namespace detail {

struct LoadedInput {
  std::optional<GeneratorSpec> spec;
  EdgeFile file;
  bool text = false;
};

inline LoadedInput load_input(const RunOptions& o) {
  LoadedInput in;
  if (source_is_file(o.source)) {
    if (o.source.size() >= 4 && o.source.ends_with(".txt")) {
      std::ifstream f(o.source);
      in.file.edges = parse_text_edges(f);
      in.text = true;
    } else {
      in.file = parse_edge_file(read_file_bytes(o.source));
    }
  } else {
    in.spec = parse_spec(o.source);
    validate(*in.spec);
  }
  return in;
}

inline DistributedGraph distribute_input(const LoadedInput& in, Communicator& comm) {
  if (in.spec) return generate(*in.spec, comm);
  if (in.text) {
    std::vector<WeightedEdge> mine;
    if (comm.rank() == 0) mine = in.file.edges;
    return make_graph_from_undirected(std::move(mine), comm);
  }
  const auto& all = in.file.edges;
  const auto b = block_begin(all.size(), comm.size(), comm.rank());
  const auto e = block_begin(all.size(), comm.size(), comm.rank() + 1);
  std::vector<WeightedEdge> mine(all.begin() + static_cast<std::ptrdiff_t>(b), all.begin() + static_cast<std::ptrdiff_t>(e));
  return build_distributed_graph(std::move(mine), comm);
}

struct PeOutcome {
  std::uint64_t vertices = 0;
  std::uint64_t edges = 0;
  std::uint64_t weight = 0;
  std::uint64_t count = 0;
  std::string verdict;
  BoruvkaStats bstats;
  std::uint64_t boruvka_calls = 0;
  PhaseTimes phases{};
  double seconds = 0;
};

}  // namespace detail

/// Runs one configuration. Verification happens after the timed region.
inline RunReport run_once(const RunOptions& o) {
  if (o.p < 1) throw Error(Errc::invalid_spec, "p must be at least 1");
  const auto input = detail::load_input(o);
  SpmdOptions so;
  so.seed = o.seed;
  so.alltoall = o.alltoall;
  std::vector<CommStats> stats;
  so.stats_out = &stats;
  auto outcomes = run_spmd(
      o.p,
      [&](Communicator& comm) {
        detail::PeOutcome out;
        const auto g = detail::distribute_input(input, comm);
        out.vertices = global_vertex_counts(g, comm).total;
        out.edges = global_edge_count(g, comm);
        std::vector<EdgeId> ids;
        comm.barrier();
        const auto t0 = std::chrono::steady_clock::now();
        PhaseClock clock;
        switch (o.algo) {
          case Algorithm::boruvka: {
            BoruvkaConfig cfg;
            cfg.preprocess = o.preprocess;
            cfg.base_case_threshold = o.base_case_threshold;
            cfg.clock = &clock;
            auto r = mst(g, cfg, comm);
            out.weight = r.total_weight;
            out.count = r.edge_count;
            out.bstats = std::move(r.stats);
            out.boruvka_calls = 1;
            ids = std::move(r.found_ids);
            break;
          }
          case Algorithm::filter: {
            FilterConfig cfg;
            cfg.preprocess = o.preprocess;
            cfg.base_case_threshold = o.base_case_threshold;
            cfg.clock = &clock;
            auto r = filter_mst(g, cfg, comm);
            out.weight = r.msf.total_weight;
            out.count = r.msf.edge_count;
            out.bstats = std::move(r.msf.stats);
            out.boruvka_calls = r.stats.boruvka_calls;
            for (const auto& c : r.stats.calls) {
              out.bstats.rounds.insert(out.bstats.rounds.end(), c.rounds.begin(), c.rounds.end());
              out.bstats.base_case_vertices = std::max(out.bstats.base_case_vertices, c.base_case_vertices);
            }
            ids = std::move(r.msf.found_ids);
            break;
          }
          case Algorithm::kruskal: {
            PhaseScope s(&clock, Phase::base_case);
            const auto all = gather_edges(g, comm);
            if (comm.rank() == 0) {
              auto r = kruskal(all);
              ids = std::move(r.ids);
            }
            break;
          }
        }
        comm.barrier();
        out.phases = clock.flush();
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (o.algo == Algorithm::kruskal || o.verify) {
          const auto all = gather_edges(g, comm);
          const auto msf = comm.allgatherv(ids);
          if (o.algo == Algorithm::kruskal) {
            std::map<EdgeId, Weight> w;
            for (const auto& e : all) w.emplace(e.id, e.weight);
            out.weight = 0;
            for (const auto id : msf) out.weight += w.at(id);
            out.count = msf.size();
          }
          if (o.verify && comm.rank() == 0) out.verdict = verdict_name(verify_msf(all, msf));
        }
        return out;
      },
      so);
  const auto& r0 = outcomes.at(0);
  RunReport rep;
  rep.algorithm = algorithm_name(o.algo);
  rep.p = o.p;
  rep.graph = input.spec ? to_string(*input.spec) : std::filesystem::path(o.source).filename().string();
  rep.seed = o.seed;
  rep.alltoall = alltoall_name(o.alltoall);
  rep.preprocess = o.preprocess;
  rep.vertices = r0.vertices;
  rep.directed_edges = r0.edges;
  rep.msf_total_weight = r0.weight;
  rep.msf_edge_count = r0.count;
  if (o.verify) {
    rep.verdict = r0.verdict;
    rep.verified = r0.verdict == "ok";
  }
  for (const auto& s : stats) rep.comm += s;
  rep.boruvka_rounds = r0.bstats.rounds.size();
  rep.base_case_vertices = r0.bstats.base_case_vertices;
  rep.boruvka_calls = r0.boruvka_calls;
  const auto& pre = r0.bstats.preprocess;
  rep.preprocess_vertices_removed = pre.applied ? pre.vertices_before.total - pre.vertices_after.total : 0;
  rep.phases = r0.phases;
  rep.total_seconds = r0.seconds;
  rep.throughput = rep.total_seconds > 0 ? static_cast<double>(rep.directed_edges) / rep.total_seconds : 0.0;
  return rep;
}

/// JSON report. Everything outside "timings" is a deterministic function of
/// the command line.
inline nlohmann::ordered_json report_json(const RunReport& r, bool with_timings = true) {
  nlohmann::ordered_json j;
  j["schema"] = "dmst.run_report.v1";
  j["algorithm"] = r.algorithm;
  j["p"] = r.p;
  j["graph"] = r.graph;
  j["seed"] = r.seed;
  j["alltoall"] = r.alltoall;
  j["preprocess"] = r.preprocess;
  j["vertices"] = r.vertices;
  j["directed_edges"] = r.directed_edges;
  j["msf_total_weight"] = r.msf_total_weight;
  j["msf_edge_count"] = r.msf_edge_count;
  j["verified"] = r.verified ? nlohmann::ordered_json(*r.verified) : nlohmann::ordered_json(nullptr);
  j["verdict"] = r.verified ? nlohmann::ordered_json(r.verdict) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json algo;
  algo["boruvka_rounds"] = r.boruvka_rounds;
  algo["base_case_vertices"] = r.base_case_vertices;
  algo["boruvka_calls"] = r.boruvka_calls;
  algo["preprocess_vertices_removed"] = r.preprocess_vertices_removed;
  j["algorithm_stats"] = algo;
  nlohmann::ordered_json c;
  c["messages_sent"] = r.comm.messages_sent;
  c["bytes_sent"] = r.comm.bytes_sent;
  c["records_sent"] = r.comm.records_sent;
  c["records_received"] = r.comm.records_received;
  c["alltoall_exchanges"] = r.comm.alltoall_exchanges;
  c["max_distinct_destinations"] = r.comm.max_distinct_destinations;
  nlohmann::ordered_json calls;
  for (std::size_t k = 0; k < kCollectiveKinds; ++k) {
    calls[collective_name(static_cast<CollectiveKind>(k))] = r.comm.collective_calls[k];
  }
  c["collective_calls"] = calls;
  j["comm"] = c;
  if (with_timings) {
    nlohmann::ordered_json t;
    t["total_seconds"] = r.total_seconds;
    t["throughput_edges_per_second"] = r.throughput;
    nlohmann::ordered_json ph;
    for (std::size_t k = 0; k < kPhaseCount; ++k) ph[std::string(kPhaseNames[k])] = r.phases[k];
    t["phases"] = ph;
    j["timings"] = t;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Benchmark matrices

struct BenchMatrix {
  std::string name = "default";
  std::vector<Algorithm> algos{Algorithm::boruvka};
  std::vector<int> ps{1};
  std::vector<std::string> graphs;
  std::vector<std::uint64_t> seeds{42};
  int reps = 3;
  int warmup = 1;
  bool verify = false;
  bool preprocess = true;
  AlltoallMode alltoall = AlltoallMode::automatic;
  std::uint64_t base_case_threshold = 0;
  // Weak scaling: one graph per family whose size grows with p.
  std::uint64_t weak_edges_per_pe = 0;
  std::vector<std::string> weak_families;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto next = std::min(s.find(sep, pos), s.size());
    auto item = trim(s.substr(pos, next - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = next + 1;
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(Errc::invalid_spec, key + ": expected a boolean, got '" + v + "'");
}

/// Line-oriented config: "[name]" starts a matrix, "key = value" sets a field,
/// '#' comments. `graph` may repeat; list keys take comma-separated values.
inline std::vector<BenchMatrix> parse_bench_config(std::istream& in) {
  std::vector<BenchMatrix> out;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(Errc::invalid_spec, "config line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail("unterminated section header");
      out.emplace_back();
      out.back().name = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    if (out.empty()) out.emplace_back();
    auto& m = out.back();
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto value = trim(std::string_view(t).substr(eq + 1));
    try {
      if (key == "algo" || key == "algos") {
        m.algos.clear();
        for (const auto& a : split_list(value)) m.algos.push_back(parse_algorithm(a));
      } else if (key == "p") {
        m.ps.clear();
        for (const auto& x : split_list(value)) m.ps.push_back(static_cast<int>(detail::parse_uint("p", x)));
      } else if (key == "graph") {
        m.graphs.push_back(value);
      } else if (key == "seed" || key == "seeds") {
        m.seeds.clear();
        for (const auto& x : split_list(value)) m.seeds.push_back(detail::parse_uint("seed", x));
      } else if (key == "reps") {
        m.reps = static_cast<int>(detail::parse_uint(key, value));
      } else if (key == "warmup") {
        m.warmup = static_cast<int>(detail::parse_uint(key, value));
      } else if (key == "verify") {
        m.verify = parse_bool(key, value);
      } else if (key == "preprocess") {
        m.preprocess = parse_bool(key, value);
      } else if (key == "alltoall") {
        m.alltoall = parse_alltoall(value);
      } else if (key == "base_case_threshold") {
        m.base_case_threshold = detail::parse_uint(key, value);
      } else if (key == "weak_edges_per_pe") {
        m.weak_edges_per_pe = detail::parse_uint(key, value);
      } else if (key == "weak_family" || key == "weak_families") {
        m.weak_families = split_list(value);
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      if (e.code() != Errc::invalid_spec || std::string_view(e.what()).starts_with("config line")) throw;
      fail(e.what());
    }
  }
  for (const auto& m : out) {
    if (m.reps < 1) throw Error(Errc::invalid_spec, "matrix " + m.name + ": reps must be at least 1");
    if (m.ps.empty() || m.algos.empty() || m.seeds.empty()) {
      throw Error(Errc::invalid_spec, "matrix " + m.name + ": algo, p and seed lists must be nonempty");
    }
    if (m.graphs.empty() && m.weak_edges_per_pe == 0) {
      throw Error(Errc::invalid_spec, "matrix " + m.name + ": no graph and no weak_edges_per_pe");
    }
  }
  return out;
}

/// Weak-scaling preset: 2^14 directed edges per PE, p = 1..16.
inline constexpr const char* kWeakScalingPreset = R"(# weak scaling, 2^14 directed edges per PE
[weak_scaling]
algo = boruvka, filter
p = 1, 2, 4, 8, 16
weak_edges_per_pe = 16384
weak_family = gnm
seed = 42
reps = 3
warmup = 1
verify = true
)";

/// Spec string of a weak-scaling instance with `edges_per_pe * p` directed
/// edges and average degree 8.
inline std::string weak_graph(const std::string& family, std::uint64_t edges_per_pe, int p, std::uint64_t seed) {
  const std::uint64_t directed = edges_per_pe * static_cast<std::uint64_t>(p);
  const std::uint64_t undirected = directed / 2;
  const std::uint64_t n = std::max<std::uint64_t>(2, directed / 8);
  const std::string s = ",seed=" + std::to_string(seed);
  if (family == "gnm") return "gnm:n=" + std::to_string(n) + ",m=" + std::to_string(undirected) + s;
  if (family == "rgg2d") return "rgg2d:n=" + std::to_string(n) + ",deg=8" + s;
  if (family == "rgg3d") return "rgg3d:n=" + std::to_string(n) + ",deg=8" + s;
  if (family == "grid2d") {
    // 4-neighbourhood lattice, about 4 directed edges per vertex
    const auto side = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::sqrt(static_cast<double>(directed) / 4.0)));
    return "grid2d:rows=" + std::to_string(side) + ",cols=" + std::to_string(side) + s;
  }
  if (family == "rmat") {
    const int scale = std::max(1, static_cast<int>(std::bit_width(n) - 1));
    return "rmat:scale=" + std::to_string(scale) + ",edges=" + std::to_string(undirected) + s;
  }
  throw Error(Errc::invalid_spec, "unknown weak_family '" + family + "'");
}

struct BenchRow {
  std::string matrix;
  std::string algorithm;
  int p = 0;
  std::string graph;
  std::uint64_t seed = 0;
  std::string status;  // ok, verify_failed, error
  int reps = 0;
  std::uint64_t vertices = 0;
  std::uint64_t directed_edges = 0;
  std::uint64_t msf_total_weight = 0;
  std::uint64_t msf_edge_count = 0;
  std::string verified;  // true, false, or empty
  double time_mean = 0;
  double time_var = 0;
  double throughput_mean = 0;
  double throughput_var = 0;
  PhaseTimes phase_means{};
  std::uint64_t bytes_sent = 0;
  std::uint64_t messages_sent = 0;
  std::string error;
};

inline std::pair<double, double> mean_var(const std::vector<double>& xs) {
  if (xs.empty()) return {0, 0};
  double mean = 0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0};
  double ss = 0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(xs.size() - 1)};
}

inline std::string csv_header() {
  std::string h =
      "matrix,algorithm,p,graph,seed,status,reps,vertices,directed_edges,msf_total_weight,msf_edge_count,verified,"
      "time_mean_s,time_var,throughput_mean,throughput_var";
  for (const auto name : kPhaseNames) h += "," + std::string(name) + "_mean_s";
  h += ",bytes_sent,messages_sent,error";
  return h;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline std::string csv_row(const BenchRow& r) {
  std::ostringstream o;
  o.precision(9);
  o << csv_quote(r.matrix) << ',' << r.algorithm << ',' << r.p << ',' << csv_quote(r.graph) << ',' << r.seed << ','
    << r.status << ',' << r.reps << ',' << r.vertices << ',' << r.directed_edges << ',' << r.msf_total_weight << ','
    << r.msf_edge_count << ',' << r.verified << ',' << r.time_mean << ',' << r.time_var << ',' << r.throughput_mean
    << ',' << r.throughput_var;
  for (const double t : r.phase_means) o << ',' << t;
  o << ',' << r.bytes_sent << ',' << r.messages_sent << ',' << csv_quote(r.error);
  return o.str();
}

/// CSV row for a single run, used by `run --csv`.
inline BenchRow row_from_report(const RunReport& r, const std::string& matrix = "run") {
  BenchRow row;
  row.matrix = matrix;
  row.algorithm = r.algorithm;
  row.p = r.p;
  row.graph = r.graph;
  row.seed = r.seed;
  row.status = r.verified && !*r.verified ? "verify_failed" : "ok";
  row.reps = 1;
  row.vertices = r.vertices;
  row.directed_edges = r.directed_edges;
  row.msf_total_weight = r.msf_total_weight;
  row.msf_edge_count = r.msf_edge_count;
  row.verified = r.verified ? (*r.verified ? "true" : "false") : "";
  row.time_mean = r.total_seconds;
  row.throughput_mean = r.throughput;
  row.phase_means = r.phases;
  row.bytes_sent = r.comm.bytes_sent;
  row.messages_sent = r.comm.messages_sent;
  return row;
}

/// Runs every cell of a matrix: warm-up runs are discarded, the timed
/// repetitions are averaged. A failing cell yields a marked row and the
/// matrix continues. Rows are ordered algo, graph, seed, p.
template <typename OnRow>
void run_matrix(const BenchMatrix& m, OnRow&& on_row) {
  const bool weak = m.weak_edges_per_pe > 0;
  const std::vector<std::string> weak_default{"gnm"};
  const auto& series = weak ? (m.weak_families.empty() ? weak_default : m.weak_families) : m.graphs;
  for (const auto algo : m.algos) {
    for (const auto& g : series) {
      for (const auto seed : m.seeds) {
        for (const int p : m.ps) {
          BenchRow row;
          row.matrix = m.name;
          row.algorithm = algorithm_name(algo);
          row.p = p;
          row.seed = seed;
          row.graph = weak ? weak_graph(g, m.weak_edges_per_pe, p, seed) : g;
          RunOptions o;
          o.source = row.graph;
          o.algo = algo;
          o.p = p;
          o.seed = seed;
          o.verify = m.verify;
          o.preprocess = m.preprocess;
          o.alltoall = m.alltoall;
          o.base_case_threshold = m.base_case_threshold;
          try {
            for (int w = 0; w < m.warmup; ++w) run_once(o);
            std::vector<double> times;
            std::vector<double> rates;
            PhaseTimes phases{};
            RunReport last;
            bool verify_failed = false;
            for (int rep = 0; rep < m.reps; ++rep) {
              last = run_once(o);
              times.push_back(last.total_seconds);
              rates.push_back(last.throughput);
              for (std::size_t k = 0; k < kPhaseCount; ++k) phases[k] += last.phases[k] / m.reps;
              if (last.verified && !*last.verified) verify_failed = true;
            }
            row = [&] {
              auto r = row_from_report(last, m.name);
              r.graph = row.graph;
              return r;
            }();
            row.status = verify_failed ? "verify_failed" : "ok";
            row.reps = m.reps;
            std::tie(row.time_mean, row.time_var) = mean_var(times);
            std::tie(row.throughput_mean, row.throughput_var) = mean_var(rates);
            row.phase_means = phases;
          } catch (const std::exception& e) {
            row.status = "error";
            row.error = e.what();
          }
          on_row(row);
        }
      }
    }
  }
}

}  // namespace dmst
