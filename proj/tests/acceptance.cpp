// Acceptance checks, one PASS/FAIL line per criterion.
//
//   acceptance            run all criteria
//   acceptance 5 6        run a subset
//
// Exit status is the number of failed criteria. Runs that several criteria
// share (the L=55 trap maps) are computed once per process.

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hcb/io.hpp"
#include "hcb/oracle.hpp"
#include "hcb/pipeline.hpp"
#include "hcb/sweep.hpp"

using namespace hcb;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int worker_threads() { return static_cast<int>(std::max(1u, std::min(4u, std::thread::hardware_concurrency()))); }

struct Check {
  bool ok = true;
  std::ostringstream detail;
  std::vector<std::string> failed;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failed.push_back(what);
    }
  }

  std::string text() const {
    std::string out = detail.str();
    while (!out.empty() && (out.back() == ' ' || out.back() == ';')) out.pop_back();
    for (const auto& f : failed) out += " | failed: " + f;
    return out;
  }
};

// ---------------------------------------------------------------------------
// Shared runs

std::map<std::string, RunResult>& run_cache() {
  static std::map<std::string, RunResult> cache;
  return cache;
}

const RunResult& cached_run(const std::string& key, const LatticeScenario& s) {
  auto& cache = run_cache();
  auto it = cache.find(key);
  if (it == cache.end()) {
    RunOptions opt;
    opt.noise.threads = worker_threads();
    it = cache.emplace(key, run_scenario(s, opt)).first;
  }
  return it->second;
}

// Trap runs on the full 55-site lattice.
constexpr int kTrapL = 55;
constexpr int kTrapN = 19;

const RunResult& trap_run(double omega) {
  const auto runs = trap_runs(kTrapL, kTrapN, {omega}, {0});
  return cached_run("trap-" + label(omega), runs.front().scenario);
}

std::vector<double> cut_real(const RunResult& r, int q2) { return real_part(delta_cut(r.noise, q2).values); }

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence at L=6, N=3

Check oracle_equivalence() {
  Check c;
  const auto t0 = clock_type::now();
  double worst = 0.0;
  std::string worst_name;
  const auto fib = fibonacci_approximant(6);
  for (Boundary bc : {Boundary::Open, Boundary::Periodic}) {
    for (int kind = 0; kind < 3; ++kind) {
      LatticeScenario s;
      s.L = 6;
      s.N = 3;
      s.bc = bc;
      if (kind == 1) s.potential = HarmonicPotential{0.1};
      if (kind == 2) s.potential = QuasiperiodicPotential{0.5, fib.numerator, fib.denominator, std::numbers::pi / 4};
      SweepOptions opt;
      opt.all_signs = false;
      const auto dev = compare_with_oracle("case", s, opt);
      c.require(!dev.skipped, "degenerate scenario");
      if (dev.max_four_point > worst) {
        worst = dev.max_four_point;
        worst_name = std::to_string(kind) + (bc == Boundary::Open ? "/open" : "/periodic");
      }
    }
  }
  const double secs = seconds_since(t0);
  c.detail << "max |engine - oracle| = " << fmt(worst) << " over 6 scenarios x 6^4 tuples, " << fmt(secs) << " s";
  c.require(fib.numerator == 3 && fib.denominator == 5, "gamma approximant 3/5");
  c.require(worst <= 1e-8, "deviation <= 1e-8");
  c.require(secs <= 60.0, "runtime <= 60 s");
  return c;
}

// ---------------------------------------------------------------------------
// 2. MOV fingerprint

Check mov_fingerprint_check() {
  Check c;
  LatticeScenario s;
  s.L = 6;
  s.N = 3;
  s.bc = Boundary::Open;
  const auto f = mov_fingerprint(s);
  c.detail << f.differing.size() << " tuples differ (bosonic vs spin), all with a same-site b b^dag pair; single site "
           << fmt(f.single_site_bosonic) << " vs " << fmt(f.single_site_spin) << "; engine-bosonic "
           << fmt(f.engine_vs_bosonic) << ", engine-spin min " << fmt(f.engine_vs_spin_min);
  c.require(!f.differing.empty(), "some tuples differ");
  c.require(f.differing_without_mov == 0, "differences only on MOV tuples");
  c.require(f.mov_without_difference == 0, "every active MOV tuple differs");
  c.require(std::abs(f.single_site_bosonic - 2.0) < 1e-12, "single site bosonic = 2");
  c.require(std::abs(f.single_site_spin) < 1e-12, "single site spin = 0");
  c.require(f.engine_vs_bosonic <= 1e-8, "engine matches bosonic");
  c.require(f.engine_vs_spin_min > 1e-8, "engine never matches spin on differing tuples");
  return c;
}

// ---------------------------------------------------------------------------
// 3. Sum rules on every preset up to L=34

Check sum_rules() {
  Check c;
  std::vector<PresetRun> runs;
  for (auto& r : fig1_runs(33, 11)) runs.push_back(r);
  for (auto& r : fig2_runs(33, 11)) runs.push_back(r);
  for (auto& r : fig3_small_runs()) runs.push_back(r);
  for (auto& r : filling_sweep_runs(11)) runs.push_back(r);
  double worst_n = 0.0, worst_d = 0.0;
  for (const auto& run : runs) {
    RunOptions opt;
    opt.noise.threads = worker_threads();
    const auto r = run_scenario(run.scenario, opt);
    worst_n = std::max(worst_n, std::abs(r.nq_sum() - run.scenario.N));
    const double d = r.noise_sum_rule();
    worst_d = std::max(worst_d, d / run.scenario.L);
  }
  c.detail << runs.size() << " runs: max |sum n_q - N| = " << fmt(worst_n) << ", max |sum_q1 delta|/L = "
           << fmt(worst_d);
  c.require(worst_n <= 1e-10, "|sum n_q - N| <= 1e-10");
  c.require(worst_d <= 1e-8, "|sum_q1 delta| <= 1e-8 L");
  return c;
}

// ---------------------------------------------------------------------------
// 4. Mott limit

Check mott_limit() {
  Check c;
  const int L = 21;
  LatticeScenario s;
  s.L = s.N = L;
  const auto& r = cached_run("mott-21", s);
  const double b_dev = (r.corr.B - Matrix::Identity(L, L)).cwiseAbs().maxCoeff();
  const auto [nmin, nmax] = std::minmax_element(r.corr.nq.begin(), r.corr.nq.end());
  const auto cut = cut_real(r, 0);
  const auto [cmin, cmax] = std::minmax_element(cut.begin() + 1, cut.end());

  // Closed form 2 delta_{q1 q2} - 2/L, anchored on the L=6 oracle.
  LatticeScenario s6;
  s6.L = s6.N = 6;
  const auto on = oracle::oracle_noise_map(oracle::hcb_ground_state(s6));
  const auto sp6 = solve_spectrum(s6);
  const auto engine6 = noise_map(s6, sp6, compute_correlations(s6, sp6));
  const double oracle6 = std::max(std::abs(on.delta(0, 0).real() - (2.0 - 2.0 / 6)),
                                  std::abs(on.delta(1, 0).real() + 2.0 / 6));
  const double engine_vs_oracle6 = (engine6.delta - on.delta).cwiseAbs().maxCoeff();
  const double closed21 =
      std::max(std::abs(cut[0] - (2.0 - 2.0 / L)), std::max(std::abs(*cmin + 2.0 / L), std::abs(*cmax + 2.0 / L)));

  c.detail << "|B - I| = " << fmt(b_dev) << ", n_q spread " << fmt(*nmax - *nmin) << ", delta(q1!=0,0) spread "
           << fmt(*cmax - *cmin) << ", delta(0,0) = " << cut[0] << ", delta(q,0) = " << cut[1]
           << "; L=6 oracle vs 2-2/L, -2/L: " << fmt(oracle6) << ", engine vs oracle: " << fmt(engine_vs_oracle6);
  c.require(b_dev <= 1e-12, "B = I");
  c.require(*nmax - *nmin <= 1e-10, "n_q flat");
  c.require(*cmax - *cmin <= 1e-10, "delta(q1!=0,0) constant");
  c.require(oracle6 <= 1e-8, "L=6 oracle constants");
  c.require(engine_vs_oracle6 <= 1e-8, "L=6 engine vs oracle");
  c.require(closed21 <= 1e-8, "L=21 constants follow the closed form");
  return c;
}

// ---------------------------------------------------------------------------
// 5. Trap shapes

Check fig1_shape() {
  Check c;
  const std::vector<double> omegas{0.0, 0.008, 0.018, 0.17};
  for (double w : omegas) {
    const auto& r = trap_run(w);
    const auto& nq = r.nq_reported;
    const auto cut = cut_real(r, 0);
    c.detail << "omega " << w << ": ";
    if (w == 0.17) {
      const auto [mn, mx] = std::minmax_element(nq.begin(), nq.end());
      double mean = 0.0;
      for (double v : nq) mean += v;
      mean /= static_cast<double>(nq.size());
      const double flatness = (*mx - *mn) / mean;
      c.detail << "n_q (max-min)/mean " << fmt(flatness) << ", ";
      c.require(flatness <= 0.05, "omega 0.17 n_q flat to 0.05 (got " + fmt(flatness) + ")");
    } else {
      c.detail << "argmax n_q " << argmax(nq) << ", ";
      c.require(argmax(nq) == 0, "argmax n_q = 0 at omega " + label(w));
      int dip = -1;
      for (int q = 1; q <= 3; ++q) {
        if (cut[q] < cut[q - 1] && cut[q] < cut[q + 1]) {
          dip = q;
          break;
        }
      }
      c.detail << "dip at q1=" << dip << ", ";
      c.require(dip > 0, "dip within 3 points at omega " + label(w));
    }
    c.detail << "argmax delta(q1,0) " << argmax(cut) << "; ";
    c.require(argmax(cut) == 0, "argmax delta(q1,0) = 0 at omega " + label(w));
  }
  return c;
}

// ---------------------------------------------------------------------------
// 6. Mott regularity in the trap

Check fig2_regularity() {
  Check c;
  const auto& mott = trap_run(0.17);
  const auto& fluid = trap_run(0.008);
  const double dm = mott_regularity(mott.noise).deviation;
  const double df = mott_regularity(fluid.noise).deviation;
  c.detail << "D(0.17) = " << fmt(dm) << ", D(0.008) = " << fmt(df) << ", ratio " << fmt(dm / df);
  c.require(dm <= 0.1 * df, "D ratio <= 0.1");
  for (int q2 : {0, 15, 30, 45}) {
    for (const RunResult* r : {&mott, &fluid}) {
      const auto cut = cut_real(*r, q2);
      c.require(argmax(cut) == q2, "peak of delta(q1," + std::to_string(q2) + ") at q1=q2");
    }
  }
  c.detail << "; cut peaks at q1=q2 for q2 in {0,15,30,45}";
  return c;
}

// ---------------------------------------------------------------------------
// 7. Localization contrast (34-site approximant)

constexpr int kContrastWindow = 3;

struct QpFigures {
  double nq_contrast = 0.0;
  double delta_contrast = 0.0;
  double amplitude = 0.0;
};

Check fig3_contrast() {
  Check c;
  const std::vector<int> peaks{13, 21};
  std::map<double, QpFigures> by_lambda;
  for (const auto& run : fig3_small_runs()) {
    const auto& r = cached_run("qp-" + run.name, run.scenario);
    const auto cut = cut_real(r, 0);
    std::vector<double> mag(cut.size());
    std::transform(cut.begin(), cut.end(), mag.begin(), [](double v) { return std::abs(v); });
    const double lambda = std::get<QuasiperiodicPotential>(run.scenario.potential).lambda;
    by_lambda[lambda] = {peak_contrast(r.nq_reported, peaks, kContrastWindow),
                         peak_contrast(mag, peaks, kContrastWindow), 0.5 * (cut[13] + cut[21])};
  }

  // Frozen from the oracle-validated engine (see tests/fixtures/fig3_small.json).
  const auto fixture = io::json::parse(io::read_file(HCB_FIXTURE_DIR "/fig3_small.json"));
  double drift = 0.0;
  for (const auto& [lambda, f] : by_lambda) {
    const auto& ref = fixture.at("lambda-" + label(lambda));
    drift = std::max({drift, std::abs(f.nq_contrast - ref.at("nq_contrast").get<double>()),
                      std::abs(f.delta_contrast - ref.at("delta_contrast").get<double>()),
                      std::abs(f.amplitude - ref.at("amplitude").get<double>())});
    c.detail << "lambda " << lambda << ": n_q " << fmt(f.nq_contrast) << ", delta " << fmt(f.delta_contrast)
             << ", amp " << fmt(f.amplitude) << "; ";
  }
  c.require(by_lambda[0.5].nq_contrast > 1.5, "lambda 0.5 n_q contrast > 1.5");
  c.require(by_lambda[0.5].delta_contrast > 1.5, "lambda 0.5 delta contrast > 1.5");
  c.require(by_lambda[2.0].delta_contrast >= 2.0, "lambda 2 delta contrast >= 2");
  c.require(by_lambda[2.0].nq_contrast <= 1.2, "lambda 2 n_q contrast <= 1.2");
  double best = -1e300, best_lambda = -1;
  for (const auto& [lambda, f] : by_lambda) {
    if (f.amplitude > best) {
      best = f.amplitude;
      best_lambda = lambda;
    }
  }
  c.require(best_lambda == 1.0, "delta peak amplitude maximal at lambda 1");
  c.require(drift <= 1e-9, "frozen fixture reproduced");
  c.detail << "fixture drift " << fmt(drift);
  return c;
}

// ---------------------------------------------------------------------------
// 8. Filling sweep

Check filling_sweep() {
  Check c;
  const int L = 11;
  std::vector<double> d00(L + 1);
  std::vector<std::vector<double>> nq(L + 1);
  for (const auto& run : filling_sweep_runs(L)) {
    const auto& r = cached_run("sweep-" + run.name, run.scenario);
    d00[run.scenario.N] = r.noise.delta(0, 0).real();
    nq[run.scenario.N] = r.corr.nq;
  }
  int peak = 1;
  for (int N = 1; N <= 10; ++N) {
    if (d00[N] > d00[peak]) peak = N;
  }
  bool rise = true, fall = true;
  for (int N = 2; N <= peak; ++N) rise = rise && d00[N] > d00[N - 1];
  for (int N = peak + 1; N <= 10; ++N) fall = fall && d00[N] < d00[N - 1];

  // Particle-hole: off-diagonal B is invariant and densities map n -> 1 - n,
  // so n_q(N) - n_q(L-N) = (2N - L)/L.
  double nq_ph = 0.0, d_ph = 0.0;
  for (int N = 1; N < L; ++N) {
    for (int q = 0; q < L; ++q) {
      nq_ph = std::max(nq_ph, std::abs(nq[N][q] - nq[L - N][q] - (2.0 * N - L) / L));
    }
    d_ph = std::max(d_ph, std::abs(d00[N] - d00[L - N]));
  }
  c.detail << "delta(0,0) for N=1..10:";
  for (int N = 1; N <= 10; ++N) c.detail << " " << fmt(d00[N]);
  c.detail << "; peak at N=" << peak << "; n_q particle-hole " << fmt(nq_ph) << ", delta(0,0) particle-hole "
           << fmt(d_ph);
  c.require(peak == 5 || peak == 6, "delta(0,0) peaks at N=5/6 (got N=" + std::to_string(peak) + ")");
  c.require(rise && fall, "rises then falls");
  c.require(nq_ph <= 1e-8, "n_q particle-hole symmetric");
  c.require(d_ph <= 1e-8, "delta(0,0) particle-hole symmetric (got " + fmt(d_ph) + ")");
  return c;
}

// ---------------------------------------------------------------------------
// 9. Performance and determinism

struct ChildResult {
  bool ok = false;
  double max_rss_mb = 0.0;
  double seconds = 0.0;
};

/// Runs `body` in a forked child so its peak resident set is measured alone.
ChildResult in_child(const std::function<void()>& body) {
  const auto t0 = clock_type::now();
  const pid_t pid = fork();
  if (pid == 0) {
    try {
      body();
    } catch (...) {
      _exit(1);
    }
    _exit(0);
  }
  int status = 0;
  rusage ru{};
  wait4(pid, &status, 0, &ru);
  return {WIFEXITED(status) && WEXITSTATUS(status) == 0, static_cast<double>(ru.ru_maxrss) / 1024.0,
          seconds_since(t0)};
}

Check performance() {
  Check c;
  LatticeScenario s34;
  s34.L = 34;
  s34.N = 17;
  RunOptions one, many;
  many.noise.threads = 4;
  const auto t0 = clock_type::now();
  const auto r1 = run_scenario(s34, one);
  const double t34 = seconds_since(t0);
  const auto r4 = run_scenario(s34, many);
  const bool same = delta_checksum(r1.noise) == delta_checksum(r4.noise) &&
                    matrix_checksum(r1.corr.B) == matrix_checksum(r4.corr.B);

  LatticeScenario s55;
  s55.L = 55;
  s55.N = 19;
  const auto child = in_child([&] {
    RunOptions opt;
    opt.noise.threads = worker_threads();
    opt.noise.cache = CacheMode::Streaming;
    const auto r = run_scenario(s55, opt);
    if (r.noise.mode != CacheMode::Streaming) throw 0;
  });
  c.detail << "L=34 map " << fmt(t34) << " s (1 thread); checksum 1 vs 4 threads " << (same ? "equal" : "DIFFER")
           << "; L=55 streaming peak RSS " << fmt(child.max_rss_mb) << " MB in " << fmt(child.seconds) << " s";
  c.require(t34 <= 600.0, "L=34 within 10 min");
  c.require(same, "checksums independent of thread count");
  c.require(child.ok, "streaming run completed");
  c.require(child.max_rss_mb < 1024.0, "streaming RSS < 1 GB");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"oracle equivalence (L=6, N=3)", oracle_equivalence},
      {"MOV fingerprint", mov_fingerprint_check},
      {"sum rules on presets up to L=34", sum_rules},
      {"Mott limit (L=N=21)", mott_limit},
      {"trap shapes (L=55, N=19)", fig1_shape},
      {"Mott regularity and cut peaks (L=55, N=19)", fig2_regularity},
      {"quasiperiodic contrast (L=34, N=10)", fig3_contrast},
      {"filling sweep (L=11)", filling_sweep},
      {"performance and determinism", performance},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty()) {
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);
  }

  int failures = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "no criterion %d\n", id);
      return 100;
    }
    const auto& [name, fn] = criteria[id - 1];
    const auto t0 = clock_type::now();
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    failures += c.ok ? 0 : 1;
    std::printf("%s #%d %s: %s (%.1f s)\n", c.ok ? "PASS" : "FAIL", id, name.c_str(), c.text().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failures;
}
