#pragma once

// End-to-end runs: spectrum -> two-point -> noise map, file emission with a
// hashed manifest, and the figure presets.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hcb/io.hpp"
#include "hcb/noise.hpp"
#include "hcb/scenario.hpp"
#include "hcb/spectral.hpp"
#include "hcb/twopoint.hpp"

namespace hcb {

inline constexpr std::string_view kVersion = "hcb-noise 1.0.0";

struct RunOptions {
  NoiseOptions noise;
  std::vector<int> cuts{0};
};

struct RunTimes {
  double spectral = 0.0;
  double twopoint = 0.0;
  double stage1 = 0.0;
  double stage2 = 0.0;
  double total = 0.0;
};

struct RunResult {
  LatticeScenario scenario;
  std::vector<std::string> warnings;
  SpectralData spectral;
  CorrelationSet corr;
  double scale = 1.0;               // N/Z, 1 unless renormalized
  std::vector<double> nq_reported;  // corr.nq * scale
  NoiseMap noise;
  RunTimes times;

  /// max_q2 |sum_q1 delta(q1,q2)| of the unscaled map.
  double noise_sum_rule() const {
    double worst = 0.0;
    for (int q2 = 0; q2 < noise.L(); ++q2) worst = std::max(worst, std::abs(noise.delta.col(q2).sum() / noise.scale));
    return worst;
  }

  double nq_sum() const {
    double total = 0.0;
    for (double v : corr.nq) total += v;
    return total;
  }
};

inline RunResult run_scenario(const LatticeScenario& s, const RunOptions& opt = {}) {
  const auto report = validate(s);
  if (!report.ok()) throw Error(report.errors.front().code, report.errors.front().message);
  using clock = std::chrono::steady_clock;
  RunResult r;
  r.scenario = s;
  r.warnings = report.warnings;
  const auto t0 = clock::now();
  r.spectral = solve_spectrum(s);
  const auto t1 = clock::now();
  r.corr = compute_correlations(s, r.spectral);
  const auto t2 = clock::now();
  r.noise = noise_map(s, r.spectral, r.corr, opt.noise);
  const auto t3 = clock::now();
  r.scale = r.noise.scale;
  r.nq_reported = r.corr.nq;
  for (double& v : r.nq_reported) v *= r.scale;
  auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
  r.times = {secs(t0, t1), secs(t1, t2), r.noise.stage1_seconds, r.noise.stage2_seconds, secs(t0, t3)};
  return r;
}

inline std::string matrix_checksum(const Matrix& m) {
  return io::sha256_of_values(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

inline std::string delta_checksum(const NoiseMap& n) {
  return io::sha256_of_values(
      std::span<const Complex>(n.delta.data(), static_cast<std::size_t>(n.delta.size())));
}

inline std::string cut_filename(int q2) { return "noise_cut_q2-" + std::to_string(q2) + ".csv"; }

/// Writes all artifacts of a run into `dir` and returns the manifest JSON,
/// which is also saved as manifest.json.
inline io::json write_run(const RunResult& r, const std::filesystem::path& dir, const RunOptions& opt) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  const int L = r.scenario.L;
  std::vector<std::string> files;

  io::CsvWriter dens({"j", "n_j"});
  for (int j = 0; j < L; ++j) dens.row(j, r.corr.density[j]);
  dens.save(dir / "density.csv");
  files.push_back("density.csv");

  io::CsvWriter mom({"q", "k", "n_q"});
  for (int q = 0; q < L; ++q) mom.row(q, 2.0 * std::numbers::pi * q / L, r.nq_reported[q]);
  mom.save(dir / "momentum.csv");
  files.push_back("momentum.csv");

  io::CsvWriter noise({"q1", "q2", "re", "im"});
  for (int q1 = 0; q1 < L; ++q1) {
    for (int q2 = 0; q2 < L; ++q2) noise.row(q1, q2, r.noise.delta(q1, q2).real(), r.noise.delta(q1, q2).imag());
  }
  noise.save(dir / "noise.csv");
  files.push_back("noise.csv");

  for (int q2 : opt.cuts) {
    if (q2 < 0 || q2 >= L) continue;
    const auto cut = delta_cut(r.noise, q2);
    io::CsvWriter c({"q1", "re", "im"});
    for (int q1 = 0; q1 < L; ++q1) c.row(q1, cut.values[q1].real(), cut.values[q1].imag());
    c.save(dir / cut_filename(q2));
    files.push_back(cut_filename(q2));
  }

  io::CsvWriter spec({"s", "E_s"});
  for (int s = 0; s < L; ++s) spec.row(s, r.spectral.energies(s));
  spec.save(dir / "spectrum.csv");
  files.push_back("spectrum.csv");

  std::string gm = std::to_string(L) + "\n";
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      if (b) gm += ',';
      gm += io::format_double(r.spectral.g(a, b));
    }
    gm += '\n';
  }
  io::CsvWriter::write_text(dir / "gmatrix.csv", gm);
  files.push_back("gmatrix.csv");

  io::json manifest;
  manifest["version"] = kVersion;
  manifest["scenario"] = io::scenario_to_json(r.scenario);
  manifest["warnings"] = r.warnings;
  manifest["engine"] = {{"threads", opt.noise.threads},
                        {"cache_mode", to_string(r.noise.mode)},
                        {"tuple_evaluations", r.noise.tuple_evaluations},
                        {"determinant_evaluations", r.noise.determinant_evaluations}};
  manifest["timings_seconds"] = {{"spectral", r.times.spectral},
                                 {"twopoint", r.times.twopoint},
                                 {"fourpoint_stage1", r.times.stage1},
                                 {"fourpoint_stage2", r.times.stage2},
                                 {"total", r.times.total}};
  manifest["checksums"] = {{"g", matrix_checksum(r.spectral.g)},
                           {"G", matrix_checksum(r.spectral.G)},
                           {"B", matrix_checksum(r.corr.B)},
                           {"delta", delta_checksum(r.noise)}};
  manifest["normalization"] = {{"mode", r.scenario.normalization == Normalization::PerSite ? "per-site" : "raw"},
                               {"trap_renormalized", r.noise.renormalized},
                               {"scale", r.scale},
                               {"support_size", support_size(r.corr.density, r.scenario.density_threshold)}};
  manifest["diagnostics"] = {{"nq_sum", r.nq_sum()}, {"noise_sum_rule", r.noise_sum_rule()}};
  io::json artifacts = io::json::array();
  for (const auto& f : files) {
    artifacts.push_back({{"path", f}, {"sha256", io::sha256_file(dir / f)}, {"bytes", fs::file_size(dir / f)}});
  }
  manifest["artifacts"] = artifacts;
  io::CsvWriter::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

// ---------------------------------------------------------------------------
// Presets

struct PresetRun {
  std::string name;
  LatticeScenario scenario;
  std::vector<int> cuts{0};
};

inline std::string label(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

/// Harmonic-trap runs at the given size; omega values are rescaled by
/// (19/N)^2 so the trap's characteristic density matches the 19-atom runs.
inline std::vector<PresetRun> trap_runs(int L, int N, const std::vector<double>& omegas, std::vector<int> cuts) {
  std::vector<PresetRun> out;
  const double rescale = (19.0 / N) * (19.0 / N);
  for (double w : omegas) {
    PresetRun run;
    run.name = "omega-" + label(w);
    run.scenario.L = L;
    run.scenario.N = N;
    run.scenario.bc = Boundary::Periodic;
    run.scenario.trap_renorm = true;
    if (w > 0.0) run.scenario.potential = HarmonicPotential{w * rescale};
    run.cuts = cuts;
    for (int& q : run.cuts) q = static_cast<int>(std::lround(static_cast<double>(q) * L / 55.0)) % L;
    out.push_back(run);
  }
  return out;
}

inline std::vector<PresetRun> fig1_runs(int L = 55, int N = 19) {
  return trap_runs(L, N, {0.0, 0.008, 0.018, 0.17}, {0});
}

inline std::vector<PresetRun> fig2_runs(int L = 55, int N = 19) {
  return trap_runs(L, N, {0.17, 0.008}, {0, 15, 30, 45});
}

inline std::vector<PresetRun> quasiperiodic_runs(int L, int N, std::int64_t num, std::int64_t den) {
  std::vector<PresetRun> out;
  for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
    PresetRun run;
    run.name = "lambda-" + label(lambda);
    run.scenario.L = L;
    run.scenario.N = N;
    run.scenario.bc = Boundary::Periodic;
    run.scenario.potential = QuasiperiodicPotential{lambda, num, den, std::numbers::pi / 4.0};
    run.cuts = {0};
    out.push_back(run);
  }
  return out;
}

inline std::vector<PresetRun> fig3_runs() { return quasiperiodic_runs(89, 25, 55, 89); }
inline std::vector<PresetRun> fig3_small_runs() { return quasiperiodic_runs(34, 10, 21, 34); }

inline std::vector<PresetRun> filling_sweep_runs(int L = 11) {
  std::vector<PresetRun> out;
  for (int N = 1; N <= L; ++N) {
    PresetRun run;
    run.name = "N-" + std::to_string(N);
    run.scenario.L = L;
    run.scenario.N = N;
    run.cuts = {0};
    out.push_back(run);
  }
  return out;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig3-small", "mott-sweep"};
  return names;
}

/// `full` selects the L=89 quasiperiodic lattice for fig3; without it fig3
/// runs the L=34 approximant.
inline std::vector<PresetRun> preset_runs(std::string_view name, bool full) {
  if (name == "fig1") return fig1_runs();
  if (name == "fig2") return fig2_runs();
  if (name == "fig3") return full ? fig3_runs() : fig3_small_runs();
  if (name == "fig3-small") return fig3_small_runs();
  if (name == "mott-sweep") return filling_sweep_runs();
  throw Error(ErrorCode::BadScenario, "unknown preset '" + std::string(name) + "'");
}

}  // namespace hcb
