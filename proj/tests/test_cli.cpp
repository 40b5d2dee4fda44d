#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dmst/bench.hpp"
#include "test_util.hpp"

namespace dmst {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("dmst_test_" + name); }

RunOptions opts(const std::string& source, Algorithm a, int p) {
  RunOptions o;
  o.source = source;
  o.algo = a;
  o.p = p;
  return o;
}

TEST(Report, SchemaFields) {
  auto o = opts("gnm:n=256,m=1024,seed=1", Algorithm::boruvka, 4);
  o.verify = true;
  const auto j = report_json(run_once(o));
  EXPECT_EQ(j["schema"], "dmst.run_report.v1");
  EXPECT_EQ(j["algorithm"], "boruvka");
  EXPECT_EQ(j["p"], 4);
  EXPECT_EQ(j["graph"], "gnm:n=256,m=1024,seed=1");
  EXPECT_EQ(j["directed_edges"], 2048);
  EXPECT_EQ(j["verified"], true);
  EXPECT_EQ(j["verdict"], "ok");
  for (const char* k : {"algorithm_stats", "comm", "timings"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_TRUE(j["timings"]["phases"].contains("min_edges"));
  EXPECT_TRUE(j["comm"]["collective_calls"].contains("alltoall"));
  EXPECT_GT(j["comm"]["bytes_sent"].get<std::uint64_t>(), 0u);
}

TEST(Report, DeterministicWithoutTimings) {
  for (auto a : {Algorithm::boruvka, Algorithm::filter}) {
    const auto o = opts("rgg2d:n=2000,deg=8,seed=3", a, 4);
    EXPECT_EQ(report_json(run_once(o), false).dump(), report_json(run_once(o), false).dump());
  }
}

TEST(Report, UnverifiedIsNull) {
  const auto j = report_json(run_once(opts("grid2d:rows=8,cols=8", Algorithm::filter, 2)));
  EXPECT_TRUE(j["verified"].is_null());
  EXPECT_TRUE(j["verdict"].is_null());
}

TEST(Run, AlltoallModesAgree) {
  auto o = opts("gnm:n=1000,m=8000,seed=2", Algorithm::boruvka, 9);
  o.alltoall = AlltoallMode::grid;
  const auto grid = run_once(o);
  o.alltoall = AlltoallMode::direct;
  const auto direct = run_once(o);
  EXPECT_EQ(grid.msf_total_weight, direct.msf_total_weight);
  EXPECT_EQ(grid.msf_edge_count, direct.msf_edge_count);
  EXPECT_LE(grid.comm.max_distinct_destinations, direct.comm.max_distinct_destinations);
}

TEST(Run, AlgorithmsAgreeWithKruskal) {
  const std::string g = "rmat:scale=10,edges=6000,seed=4";
  const auto k = run_once(opts(g, Algorithm::kruskal, 1));
  for (auto a : {Algorithm::boruvka, Algorithm::filter}) {
    for (int p : {1, 3}) {
      auto o = opts(g, a, p);
      o.verify = true;
      const auto r = run_once(o);
      EXPECT_EQ(r.msf_total_weight, k.msf_total_weight);
      EXPECT_EQ(r.msf_edge_count, k.msf_edge_count);
      EXPECT_EQ(r.verified, std::optional<bool>(true));
    }
  }
}

TEST(Run, InvalidSpecAndP) {
  EXPECT_THROW(run_once(opts("gnm:n=4,m=9", Algorithm::boruvka, 1)), Error);
  EXPECT_THROW(run_once(opts("gnm:n=4,m=2", Algorithm::boruvka, 0)), Error);
  EXPECT_THROW(parse_algorithm("prim"), Error);
  EXPECT_EQ(parse_algorithm("filterBoruvka"), Algorithm::filter);
  EXPECT_EQ(parse_alltoall("grid"), AlltoallMode::grid);
}

TEST(Files, BinaryAndTextInputs) {
  const auto f = generate_edge_file("grid2d:rows=4,cols=4", 3);
  EXPECT_EQ(f.edges.size(), 48u);
  EXPECT_EQ(f.n, 16u);
  const auto bin = temp_path("grid.mstf");
  write_file_bytes(bin.string(), serialize_edge_file(f));
  const auto txt = temp_path("grid.txt");
  {
    std::ofstream o(txt);
    write_text_edges(o, f.edges);
  }
  const auto spec = run_once(opts("grid2d:rows=4,cols=4", Algorithm::boruvka, 2));
  for (const auto& path : {bin, txt}) {
    auto o = opts(path.string(), Algorithm::filter, 3);
    o.verify = true;
    const auto r = run_once(o);
    EXPECT_EQ(r.msf_total_weight, spec.msf_total_weight) << path;
    EXPECT_EQ(r.msf_edge_count, 15u);
    EXPECT_EQ(r.directed_edges, 48u);
    EXPECT_EQ(r.verified, std::optional<bool>(true));
  }
  fs::remove(bin);
  fs::remove(txt);
}

TEST(Files, GenerateIndependentOfP) {
  const auto a = serialize_edge_file(generate_edge_file("rgg3d:n=500,deg=6,seed=8", 1));
  const auto b = serialize_edge_file(generate_edge_file("rgg3d:n=500,deg=6,seed=8", 7));
  EXPECT_EQ(a, b);
}

TEST(BenchConfig, ParseExample) {
  std::istringstream in(R"(# two algorithms, three PE counts, two graphs
[small]
algo = boruvka, filter
p = 1, 2, 4
graph = gnm:n=512,m=2048
graph = grid2d:rows=16,cols=16
seed = 7
reps = 2
warmup = 0
verify = true
)");
  const auto ms = parse_bench_config(in);
  ASSERT_EQ(ms.size(), 1u);
  const auto& m = ms[0];
  EXPECT_EQ(m.name, "small");
  EXPECT_EQ(m.algos.size(), 2u);
  EXPECT_EQ(m.ps, (std::vector<int>{1, 2, 4}));
  EXPECT_EQ(m.graphs.size(), 2u);
  EXPECT_EQ(m.reps, 2);

  std::vector<BenchRow> rows;
  run_matrix(m, [&](const BenchRow& r) { rows.push_back(r); });
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "ok") << r.error;
    EXPECT_EQ(r.verified, "true");
    EXPECT_EQ(r.reps, 2);
    EXPECT_GE(r.time_var, 0.0);
  }
  // p is the innermost loop
  EXPECT_EQ(rows[0].p, 1);
  EXPECT_EQ(rows[1].p, 2);
  EXPECT_EQ(rows[2].p, 4);
  EXPECT_EQ(rows[0].msf_total_weight, rows[2].msf_total_weight);
}

TEST(BenchConfig, Errors) {
  for (const char* bad : {"[x]\np = 1\n", "[x]\ngraph = gnm:n=4,m=2\nreps = 0\n", "[x\n", "[x]\nfoo = 1\n",
                          "[x]\ngraph = gnm:n=4,m=2\nverify = maybe\n", "[x]\ngraph = gnm:n=4,m=2\np = a\n"}) {
    std::istringstream in(bad);
    try {
      parse_bench_config(in);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_spec);
    }
  }
}

TEST(BenchConfig, FailingCellGivesErrorRow) {
  std::istringstream in("[broken]\ngraph = gnm:n=4,m=99\ngraph = gnm:n=10,m=20\nreps = 1\nwarmup = 0\n");
  std::vector<BenchRow> rows;
  run_matrix(parse_bench_config(in)[0], [&](const BenchRow& r) { rows.push_back(r); });
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].status, "error");
  EXPECT_FALSE(rows[0].error.empty());
  EXPECT_EQ(rows[1].status, "ok");
}

TEST(BenchConfig, WeakPreset) {
  std::istringstream in(kWeakScalingPreset);
  const auto ms = parse_bench_config(in);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].weak_edges_per_pe, 16384u);
  EXPECT_EQ(ms[0].ps, (std::vector<int>{1, 2, 4, 8, 16}));
  EXPECT_TRUE(ms[0].verify);
  const auto s = parse_spec(weak_graph("gnm", 16384, 4, 42));
  EXPECT_EQ(2 * s.m, 16384u * 4);
  for (const char* fam : {"rgg2d", "rgg3d", "grid2d", "rmat"}) EXPECT_NO_THROW(parse_spec(weak_graph(fam, 1024, 2, 1)));
  EXPECT_THROW(weak_graph("foo", 1, 1, 1), Error);
}

TEST(Csv, HeaderAndRowsAlign) {
  const auto header = split_list(csv_header());
  EXPECT_EQ(header.front(), "matrix");
  EXPECT_NE(std::find(header.begin(), header.end(), "time_var"), header.end());
  EXPECT_NE(std::find(header.begin(), header.end(), "base_case_mean_s"), header.end());
  BenchRow r;
  r.graph = "gnm:n=4,m=2";
  r.error = "say \"hi\"";
  const auto row = csv_row(r);
  EXPECT_NE(row.find("\"gnm:n=4,m=2\""), std::string::npos);
  EXPECT_NE(row.find("\"say \"\"hi\"\"\""), std::string::npos);
  // commas outside quotes match the header
  int cols = 1;
  bool quoted = false;
  for (char c : row) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) ++cols;
  }
  EXPECT_EQ(cols, static_cast<int>(header.size()));
}

TEST(Csv, MeanVar) {
  const auto [m, v] = mean_var({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(m, 2.0);
  EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_EQ(mean_var({}), std::make_pair(0.0, 0.0));
}

#ifdef DMST_CLI_PATH
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(DMST_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Cli, GenerateIsByteIdenticalAcrossP) {
  const auto a = temp_path("cli_a.mstf"), b = temp_path("cli_b.mstf"), log = temp_path("cli.log");
  ASSERT_EQ(run_cli("generate gnm:n=300,m=1200,seed=3 " + a.string() + " -p 1", log), 0);
  ASSERT_EQ(run_cli("generate gnm:n=300,m=1200,seed=3 " + b.string() + " -p 5", log), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(log).find("m=2400"), std::string::npos);
  ASSERT_EQ(run_cli("run " + a.string() + " --algo filter -p 3 --verify --no-timings", log), 0);
  const auto j = nlohmann::json::parse(slurp(log));
  EXPECT_EQ(j["verified"], true);
  EXPECT_FALSE(j.contains("timings"));
  fs::remove(a);
  fs::remove(b);
  fs::remove(log);
}

TEST(Cli, BadInputExitCode) {
  const auto log = temp_path("cli_bad.log");
  EXPECT_EQ(run_cli("run foo:n=1", log), 1);
  EXPECT_NE(slurp(log).find("unknown family"), std::string::npos);
  EXPECT_NE(run_cli("bench", log), 0);
  fs::remove(log);
}

TEST(Cli, RunAppendsCsv) {
  const auto csv = temp_path("cli_run.csv"), log = temp_path("cli_run.log");
  fs::remove(csv);
  ASSERT_EQ(run_cli("run grid2d:rows=5,cols=5 --csv " + csv.string(), log), 0);
  ASSERT_EQ(run_cli("run grid2d:rows=5,cols=5 -p 2 --csv " + csv.string(), log), 0);
  std::istringstream lines(slurp(csv));
  std::string line;
  std::vector<std::string> all;
  while (std::getline(lines, line)) all.push_back(line);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0], csv_header());
  fs::remove(csv);
  fs::remove(log);
}
#endif

}  // namespace
}  // namespace dmst
