#pragma once

// First-order coherence: the one-body density matrix B_ij = <b_i^dag b_j>,
// site densities and the momentum distribution.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hcb/determinant.hpp"
#include "hcb/error.hpp"
#include "hcb/scenario.hpp"
#include "hcb/spectral.hpp"

namespace hcb {

using Complex = std::complex<double>;

/// e^{2 pi i k / L} for k = 0..L-1.
inline std::vector<Complex> phase_table(int L) {
  std::vector<Complex> t(static_cast<std::size_t>(L));
  for (int k = 0; k < L; ++k) t[k] = std::polar(1.0, 2.0 * std::numbers::pi * k / L);
  return t;
}

inline int mod(long long x, int L) {
  const auto r = static_cast<int>(x % L);
  return r < 0 ? r + L : r;
}

/// <b_a^dag b_b> for the filled sea described by G.
///
/// For a < b this is half the determinant of G restricted to rows a..b-1 and
/// columns a+1..b (Jordan-Wigner string between the two sites). The diagonal
/// is the density and the lower triangle follows by symmetry.
inline double two_point(const Matrix& G, int a, int b, DetWorkspace& ws) {
  if (a == b) return 0.5 * (G(a, a) + 1.0);
  if (a > b) std::swap(a, b);
  auto& rows = ws.rows();
  auto& cols = ws.cols();
  rows.clear();
  cols.clear();
  for (int k = a; k < b; ++k) {
    rows.push_back(k);
    cols.push_back(k + 1);
  }
  return 0.5 * submatrix_determinant(G, rows, cols, ws);
}

inline double two_point(const Matrix& G, int a, int b) {
  DetWorkspace ws;
  return two_point(G, a, b, ws);
}

inline Matrix two_point_matrix(const SpectralData& sp) {
  const auto L = static_cast<int>(sp.g.rows());
  Matrix B(L, L);
  DetWorkspace ws;
  for (int a = 0; a < L; ++a) {
    B(a, a) = sp.g(a, a);
    for (int b = a + 1; b < L; ++b) {
      B(a, b) = two_point(sp.G, a, b, ws);
      B(b, a) = B(a, b);
    }
  }
  return B;
}

inline std::vector<double> density(const Matrix& g) {
  std::vector<double> n(static_cast<std::size_t>(g.rows()));
  for (Eigen::Index j = 0; j < g.rows(); ++j) n[j] = g(j, j);
  return n;
}

inline constexpr double kImagResidueTol = 1e-9;

/// n_q = (1/L) sum_{n,m} e^{2 pi i q (n-m)/L} B_nm on q = 0..L-1 (no 1/L in raw mode).
inline std::vector<double> momentum_distribution(const Matrix& B, Normalization norm) {
  const int L = static_cast<int>(B.rows());
  const auto phase = phase_table(L);
  std::vector<double> nq(static_cast<std::size_t>(L));
  const double scale = norm == Normalization::PerSite ? 1.0 / L : 1.0;
  for (int q = 0; q < L; ++q) {
    Complex acc{0.0, 0.0};
    for (int n = 0; n < L; ++n) {
      for (int m = 0; m < L; ++m) acc += phase[mod(static_cast<long long>(q) * (n - m), L)] * B(n, m);
    }
    acc *= scale;
    if (std::abs(acc.imag()) > kImagResidueTol) {
      throw Error(ErrorCode::ComplexResidue, "momentum distribution has imaginary part " + std::to_string(acc.imag()) +
                                                 " at q=" + std::to_string(q));
    }
    nq[q] = acc.real();
  }
  return nq;
}

/// Number of sites with density above threshold.
inline int support_size(const std::vector<double>& dens, double threshold) {
  int z = 0;
  for (double n : dens) z += n > threshold ? 1 : 0;
  return z;
}

/// N / Z with Z the number of occupied sites.
inline double trap_scale(const std::vector<double>& dens, double threshold) {
  const int z = support_size(dens, threshold);
  if (z == 0) throw Error(ErrorCode::EmptySupport, "no site has density above " + std::to_string(threshold));
  double total = 0.0;
  for (double n : dens) total += n;
  return std::round(total) / z;
}

inline std::vector<double> trap_renormalize(std::vector<double> values, const std::vector<double>& dens,
                                            double threshold) {
  const double f = trap_scale(dens, threshold);
  for (double& v : values) v *= f;
  return values;
}

/// Whether the scenario asks for the N/Z rescaling; flat lattices never do.
inline bool applies_trap_renorm(const LatticeScenario& s) { return s.trap_renorm && !is_flat(s); }

struct CorrelationSet {
  Matrix B;
  std::vector<double> density;
  std::vector<double> nq;  // before any trap rescaling
};

inline CorrelationSet compute_correlations(const LatticeScenario& s, const SpectralData& sp) {
  CorrelationSet c;
  c.B = two_point_matrix(sp);
  c.density = density(sp.g);
  c.nq = momentum_distribution(c.B, s.normalization);
  return c;
}

}  // namespace hcb
