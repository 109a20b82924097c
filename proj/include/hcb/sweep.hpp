#pragma once

// Exhaustive determinant-engine vs exact-diagonalization comparison used by
// `hcb oracle-check`, plus the MOV fingerprint, Mott constants and finite-U
// convergence tables that go into the same report.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hcb/fourpoint.hpp"
#include "hcb/io.hpp"
#include "hcb/oracle.hpp"
#include "hcb/scenario.hpp"
#include "hcb/spectral.hpp"
#include "hcb/twopoint.hpp"

namespace hcb {

inline constexpr double kOracleTol = 1e-8;

struct SweepOptions {
  int max_L = 6;
  bool corrupt_G = false;  // negative control: perturbs G before comparing
  bool all_signs = true;   // all 16 sign patterns, not only (-,+,-,+)
};

struct ScenarioDeviation {
  std::string name;
  LatticeScenario scenario;
  bool skipped = false;
  std::string skip_reason;
  double max_four_point = 0.0;
  double max_two_point = 0.0;
  OperatorTuple worst;
};

struct SweepResult {
  std::vector<ScenarioDeviation> cases;
  double max_deviation = 0.0;
  std::string worst_case;
  OperatorTuple worst_tuple;
  std::size_t tuples = 0;

  bool ok() const { return max_deviation <= kOracleTol; }
};

inline std::vector<std::pair<std::string, LatticeScenario>> sweep_scenarios(int max_L) {
  std::vector<std::pair<std::string, LatticeScenario>> out;
  for (int L = 2; L <= max_L; ++L) {
    const auto fib = fibonacci_approximant(L);
    for (int N = 1; N <= L; ++N) {
      for (Boundary bc : {Boundary::Open, Boundary::Periodic}) {
        for (int kind = 0; kind < 3; ++kind) {
          LatticeScenario s;
          s.L = L;
          s.N = N;
          s.bc = bc;
          std::string pot = "flat";
          if (kind == 1) {
            s.potential = HarmonicPotential{0.1};
            pot = "harmonic";
          } else if (kind == 2) {
            s.potential = QuasiperiodicPotential{0.5, fib.numerator, fib.denominator, std::numbers::pi / 4.0};
            pot = "quasiperiodic";
          }
          const std::string name = "L" + std::to_string(L) + "-N" + std::to_string(N) + "-" + pot + "-" +
                                   (bc == Boundary::Open ? "open" : "periodic");
          out.emplace_back(name, s);
        }
      }
    }
  }
  return out;
}

inline std::vector<std::array<int, 4>> sign_patterns(bool all) {
  std::vector<std::array<int, 4>> out;
  if (!all) return {{kCreate, kAnnihilate, kCreate, kAnnihilate}};
  for (int mask = 0; mask < 16; ++mask) {
    std::array<int, 4> s{};
    for (int k = 0; k < 4; ++k) s[k] = (mask >> k) & 1 ? kCreate : kAnnihilate;
    out.push_back(s);
  }
  return out;
}

/// Compares every four-point tuple and every two-point element of one
/// scenario against the hard-core oracle.
inline ScenarioDeviation compare_with_oracle(const std::string& name, const LatticeScenario& s,
                                             const SweepOptions& opt) {
  ScenarioDeviation dev{name, s};
  SpectralData sp;
  std::optional<oracle::OracleState> st;
  try {
    sp = solve_spectrum(s);
    st.emplace(oracle::hcb_ground_state(s));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateFermi && e.code() != ErrorCode::DegenerateGround) throw;
    dev.skipped = true;
    dev.skip_reason = std::string(to_string(e.code()));
    return dev;
  }
  const int L = s.L;
  if (opt.corrupt_G) {
    sp.G(0, L - 1) += 0.05;
    sp.G(L - 1, 0) += 0.05;
    sp.G(0, 0) += 0.05;
  }
  const Matrix B = two_point_matrix(sp);
  const Matrix B_ref = oracle::oracle_two_point(*st);
  dev.max_two_point = (B - B_ref).cwiseAbs().maxCoeff();

  const Propagators p{sp.g, sp.G, B};
  FourPointWorkspace ws;
  for (const auto& signs : sign_patterns(opt.all_signs)) {
    for (int n = 0; n < L; ++n)
      for (int m = 0; m < L; ++m)
        for (int l = 0; l < L; ++l)
          for (int j = 0; j < L; ++j) {
            const OperatorTuple t{{n, m, l, j}, signs};
            const double d = std::abs(four_point(t, p, ws) - oracle::oracle_four_point(*st, t));
            if (d > dev.max_four_point) {
              dev.max_four_point = d;
              dev.worst = t;
            }
          }
  }
  return dev;
}

inline SweepResult oracle_sweep(const SweepOptions& opt) {
  if (opt.max_L < 2 || opt.max_L > oracle::kMaxNoiseSites) {
    throw Error(ErrorCode::Range, "oracle sweep needs 2 <= max_L <= 8");
  }
  SweepResult out;
  for (const auto& [name, s] : sweep_scenarios(opt.max_L)) {
    auto dev = compare_with_oracle(name, s, opt);
    if (!dev.skipped) {
      out.tuples += static_cast<std::size_t>(std::pow(s.L, 4)) * sign_patterns(opt.all_signs).size();
      const double worst = std::max(dev.max_four_point, dev.max_two_point);
      if (worst > out.max_deviation) {
        out.max_deviation = worst;
        out.worst_case = name;
        out.worst_tuple = dev.worst;
      }
    }
    out.cases.push_back(std::move(dev));
  }
  return out;
}

// ---------------------------------------------------------------------------
// MOV fingerprint

/// Whether some same-site block of t can pass through double occupancy and
/// return to a hard-core state: a b b^dag pair acting on an occupied site,
/// the only place the bosonic and spin-1/2 algebras part ways.
inline bool has_active_mov_pair(const OperatorTuple& t) {
  const auto c = site_order(t);
  for (int start = 0; start < 4;) {
    int end = start;
    while (end + 1 < 4 && c.sites[end + 1] == c.sites[start]) ++end;
    for (int n0 = 0; n0 <= 1; ++n0) {
      int n = n0;
      bool valid = true, doubled = false;
      for (int k = end; k >= start && valid; --k) {
        n += c.signs[k] == kCreate ? 1 : -1;
        valid = n >= 0;
        doubled = doubled || n >= 2;
      }
      if (valid && doubled && n <= 1) return true;
    }
    start = end + 1;
  }
  return false;
}

struct FingerprintEntry {
  OperatorTuple tuple;
  double bosonic = 0.0;
  double spin = 0.0;
  double engine = 0.0;
};

struct Fingerprint {
  std::vector<FingerprintEntry> differing;  // tuples where the two algebras disagree
  std::size_t mov_tuples = 0;                // conserving tuples with an active b b^dag pair
  std::size_t differing_without_mov = 0;     // should be 0
  std::size_t mov_without_difference = 0;    // should be 0
  double engine_vs_bosonic = 0.0;            // max over all tuples
  double engine_vs_spin_min = 0.0;           // min over differing tuples
  double single_site_bosonic = 0.0;          // <b b^dag b^dag b> on an occupied site
  double single_site_spin = 0.0;
};

/// Bosonic and spin-1/2 oracles over every tuple and sign pattern of `s`.
inline Fingerprint mov_fingerprint(const LatticeScenario& s, double tol = 1e-10) {
  const auto bos = oracle::hcb_ground_state(s);
  const auto spin = oracle::with_algebra(bos, oracle::Algebra::Spin);
  const auto sp = solve_spectrum(s);
  const Matrix B = two_point_matrix(sp);
  const Propagators p{sp.g, sp.G, B};
  FourPointWorkspace ws;
  Fingerprint f;
  f.engine_vs_spin_min = std::numeric_limits<double>::infinity();
  const int L = s.L;
  for (const auto& signs : sign_patterns(true)) {
    for (int n = 0; n < L; ++n)
      for (int m = 0; m < L; ++m)
        for (int l = 0; l < L; ++l)
          for (int j = 0; j < L; ++j) {
            const OperatorTuple t{{n, m, l, j}, signs};
            FingerprintEntry e{t, oracle::oracle_four_point(bos, t), oracle::oracle_four_point(spin, t),
                               four_point(t, p, ws)};
            const bool differs = std::abs(e.bosonic - e.spin) > tol;
            const bool conserving = t.signs[0] + t.signs[1] + t.signs[2] + t.signs[3] == 0;
            const bool mov = conserving && has_active_mov_pair(t);
            f.mov_tuples += mov;
            f.engine_vs_bosonic = std::max(f.engine_vs_bosonic, std::abs(e.engine - e.bosonic));
            if (differs) {
              f.engine_vs_spin_min = std::min(f.engine_vs_spin_min, std::abs(e.engine - e.spin));
              if (!mov) ++f.differing_without_mov;
              f.differing.push_back(e);
            } else if (mov) {
              ++f.mov_without_difference;
            }
          }
  }
  if (f.differing.empty()) f.engine_vs_spin_min = 0.0;

  // Single occupied site of a Mott chain: b b^dag b^dag b |1> = 2 |1>.
  LatticeScenario mott = s;
  mott.N = s.L;
  const auto mb = oracle::hcb_ground_state(mott);
  const auto ms = oracle::with_algebra(mb, oracle::Algebra::Spin);
  const OperatorTuple single{{0, 0, 0, 0}, {kAnnihilate, kCreate, kCreate, kAnnihilate}};
  f.single_site_bosonic = oracle::oracle_four_point(mb, single);
  f.single_site_spin = oracle::oracle_four_point(ms, single);
  return f;
}

// ---------------------------------------------------------------------------
// Finite-U convergence of the Bose-Hubbard ground state toward the hard-core limit

struct ConvergenceRow {
  double U = 0.0;
  double two_point = 0.0;   // max |B_U - B_hcb|
  double four_point = 0.0;  // max |chi_U - chi_hcb| over density-pattern tuples
};

inline std::vector<ConvergenceRow> finite_u_convergence(const LatticeScenario& s, const std::vector<double>& Us,
                                                        int cap = 3) {
  const auto hcb = oracle::hcb_ground_state(s);
  const Matrix B_ref = oracle::oracle_two_point(hcb);
  std::vector<ConvergenceRow> rows;
  for (double U : Us) {
    const auto st = oracle::bose_hubbard_ground(s, U, cap);
    ConvergenceRow row{U, (oracle::oracle_two_point(st) - B_ref).cwiseAbs().maxCoeff(), 0.0};
    for (int n = 0; n < s.L; ++n)
      for (int m = 0; m < s.L; ++m)
        for (int l = 0; l < s.L; ++l)
          for (int j = 0; j < s.L; ++j) {
            const OperatorTuple t{{n, m, l, j}};
            row.four_point = std::max(
                row.four_point, std::abs(oracle::oracle_four_point(st, t) - oracle::oracle_four_point(hcb, t)));
          }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Report

inline io::json tuple_json(const OperatorTuple& t) {
  return {{"sites", t.sites}, {"signs", t.signs}};
}

inline io::json sweep_report(const SweepResult& r) {
  io::json cases = io::json::array();
  for (const auto& c : r.cases) {
    io::json j{{"name", c.name}, {"skipped", c.skipped}};
    if (c.skipped) {
      j["reason"] = c.skip_reason;
    } else {
      j["max_four_point_deviation"] = c.max_four_point;
      j["max_two_point_deviation"] = c.max_two_point;
      j["worst_tuple"] = tuple_json(c.worst);
    }
    cases.push_back(j);
  }
  return {{"tolerance", kOracleTol},
          {"pass", r.ok()},
          {"max_deviation", r.max_deviation},
          {"worst_case", r.worst_case},
          {"worst_tuple", tuple_json(r.worst_tuple)},
          {"tuples_compared", r.tuples},
          {"scenarios", cases}};
}

inline io::json fingerprint_report(const Fingerprint& f) {
  io::json list = io::json::array();
  for (const auto& e : f.differing) {
    list.push_back({{"tuple", tuple_json(e.tuple)}, {"bosonic", e.bosonic}, {"spin", e.spin}, {"engine", e.engine}});
  }
  return {{"single_site_bosonic", f.single_site_bosonic},
          {"single_site_spin", f.single_site_spin},
          {"mov_tuples", f.mov_tuples},
          {"differing_tuples", f.differing.size()},
          {"differing_without_mov", f.differing_without_mov},
          {"mov_without_difference", f.mov_without_difference},
          {"engine_vs_bosonic_max", f.engine_vs_bosonic},
          {"engine_vs_spin_min", f.engine_vs_spin_min},
          {"differing", list}};
}

}  // namespace hcb
