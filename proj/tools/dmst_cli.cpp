// dmst: generate graphs, run the distributed MSF algorithms on simulated PEs,
// and benchmark them.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dmst/bench.hpp"

namespace {

int cmd_generate(const std::string& spec_text, const std::string& out, bool text, int p) {
  auto f = dmst::generate_edge_file(spec_text, p);
  const std::uint64_t m = f.edges.size();
  std::uint64_t bytes = 0;
  if (text) {
    std::ofstream o(out);
    if (!o) throw dmst::Error(dmst::Errc::io_error, "cannot write " + out);
    dmst::write_text_edges(o, f.edges);
    o.flush();
    bytes = static_cast<std::uint64_t>(o.tellp());
  } else {
    const auto data = dmst::serialize_edge_file(f);
    dmst::write_file_bytes(out, data);
    bytes = data.size();
  }
  std::cout << "n=" << f.n << " m=" << m << " bytes=" << bytes << "\n";
  return 0;
}

void append_csv(const std::string& path, const std::vector<std::string>& rows) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream o(path, std::ios::app);
  if (!o) throw dmst::Error(dmst::Errc::io_error, "cannot append to " + path);
  if (fresh) o << dmst::csv_header() << "\n";
  for (const auto& r : rows) o << r << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed minimum spanning forest on simulated processing elements"};
  app.require_subcommand(1);

  std::string gen_spec, gen_out;
  bool gen_text = false;
  int gen_p = 1;
  auto* gen = app.add_subcommand("generate", "write a generated graph to an edge file");
  gen->add_option("spec", gen_spec, "generator spec, e.g. gnm:n=4096,m=32768,seed=1")->required();
  gen->add_option("out", gen_out, "output path")->required();
  gen->add_flag("--text", gen_text, "write 'u v w' lines instead of the binary format");
  gen->add_option("-p", gen_p, "generate on this many PEs (output is identical)")->check(CLI::PositiveNumber);

  dmst::RunOptions ro;
  std::string algo = "boruvka", alltoall = "auto", csv;
  bool no_pre = false, no_timings = false;
  auto* run = app.add_subcommand("run", "run one algorithm and print a JSON report");
  run->add_option("source", ro.source, "generator spec or edge file (.txt for text)")->required();
  run->add_option("--algo", algo, "boruvka, filter or kruskal")
      ->check(CLI::IsMember({"boruvka", "filter", "kruskal"}));
  run->add_option("-p,--pes", ro.p, "number of PEs")->check(CLI::PositiveNumber);
  run->add_option("--seed", ro.seed, "runtime seed");
  run->add_flag("--verify", ro.verify, "check the result against the sequential oracle");
  run->add_flag("--no-preprocess", no_pre, "disable local preprocessing");
  run->add_option("--alltoall", alltoall, "auto, direct or grid")->check(CLI::IsMember({"auto", "direct", "grid"}));
  run->add_option("--base-case-threshold", ro.base_case_threshold, "vertex count that switches to the replicated base case");
  run->add_option("--csv", csv, "append a CSV row to this file");
  run->add_flag("--no-timings", no_timings, "omit the timings object");

  std::string config, bench_out;
  bool preset_weak = false;
  auto* bench = app.add_subcommand("bench", "run a benchmark matrix and write CSV");
  bench->add_option("config", config, "matrix config file");
  bench->add_flag("--weak-scaling", preset_weak, "use the built-in weak-scaling preset");
  bench->add_option("-o,--out", bench_out, "CSV output (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(gen_spec, gen_out, gen_text, gen_p);
    if (*run) {
      ro.algo = dmst::parse_algorithm(algo);
      ro.alltoall = dmst::parse_alltoall(alltoall);
      ro.preprocess = !no_pre;
      const auto rep = dmst::run_once(ro);
      std::cout << dmst::report_json(rep, !no_timings).dump(2) << "\n";
      if (!csv.empty()) append_csv(csv, {dmst::csv_row(dmst::row_from_report(rep))});
      return rep.verified && !*rep.verified ? 2 : 0;
    }
    if (*bench) {
      if (config.empty() == !preset_weak) {
        std::cerr << "bench: give a config file or --weak-scaling\n";
        return 1;
      }
      std::vector<dmst::BenchMatrix> matrices;
      if (preset_weak) {
        std::istringstream in(dmst::kWeakScalingPreset);
        matrices = dmst::parse_bench_config(in);
      } else {
        std::ifstream in(config);
        if (!in) throw dmst::Error(dmst::Errc::io_error, "cannot open " + config);
        matrices = dmst::parse_bench_config(in);
      }
      std::ofstream file;
      if (!bench_out.empty()) {
        file.open(bench_out);
        if (!file) throw dmst::Error(dmst::Errc::io_error, "cannot write " + bench_out);
      }
      std::ostream& out = bench_out.empty() ? std::cout : file;
      out << dmst::csv_header() << "\n";
      bool failed = false;
      for (const auto& m : matrices) {
        dmst::run_matrix(m, [&](const dmst::BenchRow& row) {
          out << dmst::csv_row(row) << "\n" << std::flush;
          if (row.status != "ok") {
            failed = true;
            std::cerr << "bench: " << row.algorithm << " p=" << row.p << " " << row.graph << ": " << row.status
                      << (row.error.empty() ? "" : " (" + row.error + ")") << "\n";
          }
        });
      }
      return failed ? 2 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "dmst: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
