// hcb: command-line front end for the hard-core boson noise-correlation engine.
//
//   hcb run <scenario.json> --out <dir> [--raw] [--threads k] [--stream]
//   hcb preset <fig1|fig2|fig3|fig3-small|mott-sweep> --out <dir> [--full] [--threads k]
//   hcb oracle-check --max-L k --out <dir>
//   hcb benchmark --L 21,34 --threads 1,4 [--out file.csv]
//
// Exit codes: 0 ok, 1 usage, 2 validation, 3 degenerate Fermi level,
// 4 I/O, 5 oracle mismatch.

#include <sys/resource.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hcb/error.hpp"
#include "hcb/io.hpp"
#include "hcb/noise.hpp"
#include "hcb/pipeline.hpp"
#include "hcb/sweep.hpp"

namespace fs = std::filesystem;
using namespace hcb;

namespace {

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::DegenerateFermi:
      return 3;
    case ErrorCode::Io:
      return 4;
    default:
      return 2;
  }
}

double max_rss_mb() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return static_cast<double>(ru.ru_maxrss) / 1024.0;  // Linux reports KiB
}

void print_run(const std::string& name, const RunResult& r) {
  std::printf("%-14s L=%d N=%d  sum n_q=%.12f  sum-rule=%.2e  mode=%s  %.2fs\n", name.c_str(), r.scenario.L,
              r.scenario.N, r.nq_sum(), r.noise_sum_rule(), std::string(to_string(r.noise.mode)).c_str(),
              r.times.total);
  for (const auto& w : r.warnings) std::printf("  warning: %s\n", w.c_str());
}

int cmd_run(const std::string& file, const std::string& out, bool raw, int threads, bool stream) {
  auto s = io::load_scenario(file);
  if (raw) s.normalization = Normalization::Raw;
  RunOptions opt;
  opt.noise.threads = threads;
  if (stream) opt.noise.cache = CacheMode::Streaming;
  const auto r = run_scenario(s, opt);
  write_run(r, out, opt);
  print_run(fs::path(file).stem().string(), r);
  return 0;
}

int cmd_preset(const std::string& name, const std::string& out, bool full, int threads) {
  const auto runs = preset_runs(name, full);
  io::json summary;
  summary["version"] = kVersion;
  summary["preset"] = name;
  summary["runs"] = io::json::array();
  io::CsvWriter sweep({"N", "nu", "delta_00", "n_q0"});
  for (const auto& run : runs) {
    RunOptions opt;
    opt.noise.threads = threads;
    opt.cuts = run.cuts;
    const auto r = run_scenario(run.scenario, opt);
    const auto manifest = write_run(r, fs::path(out) / run.name, opt);
    print_run(run.name, r);
    summary["runs"].push_back({{"name", run.name}, {"dir", run.name}, {"checksums", manifest["checksums"]}});
    if (name == "mott-sweep") {
      sweep.row(r.scenario.N, static_cast<double>(r.scenario.N) / r.scenario.L, r.noise.delta(0, 0).real(),
                r.nq_reported[0]);
    }
  }
  if (name == "mott-sweep") sweep.save(fs::path(out) / "sweep.csv");
  io::CsvWriter::write_text(fs::path(out) / "preset.json", summary.dump(2) + "\n");
  return 0;
}

int cmd_oracle_check(int max_L, const std::string& out, bool corrupt) {
  SweepOptions opt;
  opt.max_L = max_L;
  opt.corrupt_G = corrupt;
  const auto sweep = oracle_sweep(opt);
  io::json report;
  report["version"] = kVersion;
  report["sweep"] = sweep_report(sweep);

  LatticeScenario fp_s;
  fp_s.L = std::min(max_L, 4);
  fp_s.N = fp_s.L / 2 > 0 ? fp_s.L / 2 : 1;
  fp_s.bc = Boundary::Open;
  report["mov_fingerprint"] = fingerprint_report(mov_fingerprint(fp_s));

  if (max_L >= 6) {
    LatticeScenario mott;
    mott.L = mott.N = 6;
    const auto on = oracle::oracle_noise_map(oracle::hcb_ground_state(mott));
    report["mott_constants"] = {{"L", 6},
                                {"delta_00", on.delta(0, 0).real()},
                                {"delta_q0", on.delta(1, 0).real()},
                                {"closed_form_delta_00", 2.0 - 2.0 / 6.0},
                                {"closed_form_delta_q0", -2.0 / 6.0}};
  }
  if (max_L >= 4) {
    LatticeScenario s;
    s.L = 4;
    s.N = 2;
    s.bc = Boundary::Open;
    io::json rows = io::json::array();
    for (const auto& row : finite_u_convergence(s, {10.0, 100.0, 1000.0})) {
      rows.push_back({{"U", row.U}, {"two_point", row.two_point}, {"four_point", row.four_point}});
    }
    report["finite_u"] = rows;
  }

  fs::create_directories(out);
  io::CsvWriter::write_text(fs::path(out) / "oracle_report.json", report.dump(2) + "\n");
  std::printf("oracle-check: %zu tuples, max deviation %.3e (%s)\n", sweep.tuples, sweep.max_deviation,
              sweep.ok() ? "pass" : "FAIL");
  if (!sweep.ok()) {
    const auto& t = sweep.worst_tuple;
    std::fprintf(stderr, "oracle mismatch in %s at sites (%d,%d,%d,%d) signs (%d,%d,%d,%d)\n",
                 sweep.worst_case.c_str(), t.sites[0], t.sites[1], t.sites[2], t.sites[3], t.signs[0], t.signs[1],
                 t.signs[2], t.signs[3]);
    return 5;
  }
  return 0;
}

int cmd_benchmark(const std::vector<int>& Ls, const std::vector<int>& threads, bool stream, const std::string& out) {
  io::CsvWriter csv({"L", "N", "threads", "mode", "seconds", "tuples_per_s", "determinants_per_s", "stage1_s",
                     "stage2_s", "delta_sha256", "max_rss_mb"});
  for (int L : Ls) {
    for (int t : threads) {
      LatticeScenario s;
      s.L = L;
      s.N = std::max(1, L / 2);
      RunOptions opt;
      opt.noise.threads = t;
      if (stream) opt.noise.cache = CacheMode::Streaming;
      const auto r = run_scenario(s, opt);
      const double secs = r.noise.stage1_seconds + r.noise.stage2_seconds;
      const auto sum = delta_checksum(r.noise);
      csv.row(L, s.N, t, std::string(to_string(r.noise.mode)), r.times.total,
              static_cast<double>(r.noise.tuple_evaluations) / secs,
              static_cast<double>(r.noise.determinant_evaluations) / secs, r.noise.stage1_seconds,
              r.noise.stage2_seconds, sum, max_rss_mb());
      std::printf("L=%d threads=%d %.2fs delta=%s\n", L, t, r.times.total, sum.substr(0, 16).c_str());
    }
  }
  if (out.empty()) {
    std::cout << csv.text();
  } else {
    csv.save(out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard-core boson density, momentum and noise correlations"};
  app.require_subcommand(1);

  std::string file, out, preset;
  bool raw = false, stream = false, full = false, corrupt = false;
  int threads = 1, max_L = 6;
  std::vector<int> Ls{21}, thread_list{1};

  auto* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("scenario", file, "scenario JSON")->required();
  run->add_option("--out", out, "output directory")->required();
  run->add_flag("--raw", raw, "raw (unnormalized) sums");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--stream", stream, "O(L^3) memory four-point sum");

  auto* pre = app.add_subcommand("preset", "run a figure preset");
  pre->add_option("name", preset, "preset name")->required()->check(CLI::IsMember(preset_names()));
  pre->add_option("--out", out, "output directory")->required();
  pre->add_flag("--full", full, "fig3 on the L=89 lattice");
  pre->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  auto* orc = app.add_subcommand("oracle-check", "compare the engine with exact diagonalization");
  orc->add_option("--max-L", max_L, "largest lattice")->check(CLI::Range(2, 8));
  orc->add_option("--out", out, "report directory")->default_val(".");
  orc->add_flag("--corrupt-G", corrupt, "perturb G before comparing (negative control)");

  auto* bench = app.add_subcommand("benchmark", "time full noise maps on flat rings");
  bench->add_option("--L", Ls, "lattice sizes")->delimiter(',');
  bench->add_option("--threads", thread_list, "thread counts")->delimiter(',');
  bench->add_flag("--stream", stream, "force streaming mode");
  bench->add_option("--out", out, "CSV file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(file, out, raw, threads, stream);
    if (*pre) return cmd_preset(preset, out, full, threads);
    if (*orc) return cmd_oracle_check(max_L, out, corrupt);
    if (*bench) return cmd_benchmark(Ls, thread_list, stream, out);
  } catch (const Error& e) {
    std::fprintf(stderr, "hcb: %s\n", e.what());
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "hcb: %s\n", e.what());
    return 4;
  }
  return 1;
}
