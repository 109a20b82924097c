#pragma once

// Lattice scenarios: geometry, filling, external potential and reporting flags.
//
// All energies are in units of the hopping J. A scenario is a plain value; the
// numerical modules only read it.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "hcb/error.hpp"

namespace hcb {

enum class Boundary { Periodic, Open };
enum class Normalization { PerSite, Raw };

struct FlatPotential {};

/// V_j = omega * (j - c)^2 with c = (L-1)/2.
struct HarmonicPotential {
  double omega = 0.0;
};

/// V_j = 2 lambda cos(2 pi (p/q) j + phi), j = 0..L-1.
struct QuasiperiodicPotential {
  double lambda = 0.0;
  std::int64_t gamma_num = 1;
  std::int64_t gamma_den = 2;
  double phi = std::numbers::pi / 4.0;

  double gamma() const { return static_cast<double>(gamma_num) / static_cast<double>(gamma_den); }
};

using Potential = std::variant<FlatPotential, HarmonicPotential, QuasiperiodicPotential>;

struct LatticeScenario {
  int L = 2;
  int N = 1;
  double J = 1.0;
  Boundary bc = Boundary::Periodic;
  Potential potential = FlatPotential{};
  Normalization normalization = Normalization::PerSite;
  bool trap_renorm = false;
  double density_threshold = 1e-4;
};

inline bool is_flat(const LatticeScenario& s) { return std::holds_alternative<FlatPotential>(s.potential); }

struct FibonacciApproximant {
  int index = 0;
  std::int64_t numerator = 1;    // F_n
  std::int64_t denominator = 1;  // F_{n+1}
};

/// F_0 = F_1 = 1, F_{n+1} = F_n + F_{n-1}.
inline std::int64_t fibonacci(int n) {
  std::int64_t prev = 1, cur = 1;
  for (int k = 1; k < n; ++k) {
    const std::int64_t next = prev + cur;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Largest consecutive Fibonacci pair (F_n, F_{n+1}) with F_{n+1} <= target_denominator.
inline FibonacciApproximant fibonacci_approximant(std::int64_t target_denominator) {
  if (target_denominator < 2) {
    throw Error(ErrorCode::Range, "fibonacci_approximant needs a target denominator >= 2");
  }
  FibonacciApproximant out{1, 1, 2};
  std::int64_t num = 1, den = 2;
  int n = 1;
  while (num + den <= target_denominator) {
    const std::int64_t next = num + den;
    num = den;
    den = next;
    ++n;
  }
  out.index = n;
  out.numerator = num;
  out.denominator = den;
  return out;
}

/// On-site potential in units of J.
inline std::vector<double> potential_values(const LatticeScenario& s) {
  std::vector<double> v(static_cast<std::size_t>(s.L), 0.0);
  if (const auto* h = std::get_if<HarmonicPotential>(&s.potential)) {
    const double centre = 0.5 * (s.L - 1);
    for (int j = 0; j < s.L; ++j) {
      const double x = j - centre;
      v[j] = h->omega * x * x;
    }
  } else if (const auto* q = std::get_if<QuasiperiodicPotential>(&s.potential)) {
    // Reduce the phase argument exactly on the integers before scaling so
    // commensurate sites get bitwise-identical values.
    for (int j = 0; j < s.L; ++j) {
      const std::int64_t r = (q->gamma_num * j) % q->gamma_den;
      const double arg = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(q->gamma_den) + q->phi;
      v[j] = 2.0 * q->lambda * std::cos(arg);
    }
  }
  return v;
}

struct ValidationIssue {
  ErrorCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

inline ValidationReport validate(const LatticeScenario& s) {
  ValidationReport r;
  auto fail = [&](ErrorCode c, std::string m) { r.errors.push_back({c, std::move(m)}); };

  if (s.L < 2) fail(ErrorCode::BadScenario, "L must be >= 2 (got " + std::to_string(s.L) + ")");
  if (s.N < 1 || s.N > s.L) {
    fail(ErrorCode::BadFilling, "N must lie in [1, L] (N=" + std::to_string(s.N) + ", L=" + std::to_string(s.L) + ")");
  }
  if (!(s.J > 0.0) || !std::isfinite(s.J)) fail(ErrorCode::BadScenario, "J must be positive");
  if (!(s.density_threshold > 0.0 && s.density_threshold < 1.0)) {
    fail(ErrorCode::BadScenario, "density_threshold must lie in (0, 1)");
  }
  if (const auto* h = std::get_if<HarmonicPotential>(&s.potential)) {
    if (!(h->omega >= 0.0) || !std::isfinite(h->omega)) fail(ErrorCode::BadScenario, "harmonic omega must be >= 0");
  } else if (const auto* q = std::get_if<QuasiperiodicPotential>(&s.potential)) {
    if (!(q->lambda >= 0.0) || !std::isfinite(q->lambda)) fail(ErrorCode::BadScenario, "lambda must be >= 0");
    if (q->gamma_den < 2 || q->gamma_num <= 0 || q->gamma_num >= q->gamma_den) {
      fail(ErrorCode::BadGamma, "gamma must be p/q with 0 < p < q");
    } else if (std::gcd(q->gamma_num, q->gamma_den) != 1) {
      fail(ErrorCode::BadGamma, "gamma numerator and denominator must be coprime");
    } else if (s.bc == Boundary::Periodic && s.L % q->gamma_den != 0) {
      r.warnings.push_back("quasiperiodic potential with denominator " + std::to_string(q->gamma_den) +
                           " is not commensurate with a periodic ring of L=" + std::to_string(s.L));
    }
    if (!std::isfinite(q->phi)) fail(ErrorCode::BadScenario, "phi must be finite");
  }
  return r;
}

/// Throws the first validation error, if any.
inline void require_valid(const LatticeScenario& s) {
  const auto r = validate(s);
  if (!r.ok()) throw Error(r.errors.front().code, r.errors.front().message);
}

}  // namespace hcb
