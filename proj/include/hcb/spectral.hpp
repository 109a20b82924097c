#pragma once

// Single-particle problem of the Jordan-Wigner fermions and the filled-sea
// propagators g and G = 2g - 1.

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "hcb/error.hpp"
#include "hcb/scenario.hpp"

namespace hcb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDegeneracyTol = 1e-10;

struct SpectralData {
  Vector energies;  // ascending
  Matrix modes;     // column s is psi^(s)
  Matrix g;         // sum_{s<N} psi^(s) psi^(s)^T
  Matrix G;         // 2g - 1
  int N = 0;
};

/// Fermionic hopping matrix for the scenario.
///
/// Open chains are plain tridiagonal. On a ring the hard-core boson hopping
/// across the boundary picks up the Jordan-Wigner parity (-1)^(N-1), so the
/// fermion corner element is -J for odd N and +J for even N.
inline Matrix build_single_particle(const LatticeScenario& s) {
  const int L = s.L;
  Matrix h = Matrix::Zero(L, L);
  const auto v = potential_values(s);
  for (int j = 0; j < L; ++j) h(j, j) = s.J * v[j];
  for (int j = 0; j + 1 < L; ++j) {
    h(j, j + 1) = -s.J;
    h(j + 1, j) = -s.J;
  }
  if (s.bc == Boundary::Periodic && L > 2) {
    const double corner = (s.N % 2 == 1) ? -s.J : s.J;
    h(0, L - 1) = corner;
    h(L - 1, 0) = corner;
  }
  return h;
}

inline Matrix big_G(const Matrix& g) {
  Matrix G = 2.0 * g;
  G.diagonal().array() -= 1.0;
  return G;
}

/// Diagonalizes H and fills the N lowest modes.
///
/// Throws DegenerateFermi when level N-1 and level N coincide within 1e-10,
/// since the projector would then depend on an arbitrary choice of basis in
/// the partially filled multiplet.
inline SpectralData ground_modes(const Matrix& H, int N) {
  const auto L = H.rows();
  if (H.cols() != L) throw Error(ErrorCode::BadScenario, "single-particle matrix must be square");
  if (N < 1 || N > L) throw Error(ErrorCode::BadFilling, "N must lie in [1, L]");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(H);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::BadScenario, "eigensolver failed");

  SpectralData out;
  out.N = N;
  out.energies = solver.eigenvalues();
  out.modes = solver.eigenvectors();

  // Fix the sign of each mode: first significant component positive.
  for (Eigen::Index s = 0; s < L; ++s) {
    auto col = out.modes.col(s);
    const double scale = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < L; ++i) {
      if (std::abs(col(i)) > 1e-8 * scale) {
        if (col(i) < 0) col *= -1.0;
        break;
      }
    }
  }

  if (N < L && std::abs(out.energies(N) - out.energies(N - 1)) < kDegeneracyTol) {
    throw Error(ErrorCode::DegenerateFermi,
                "levels " + std::to_string(N - 1) + " and " + std::to_string(N) + " are degenerate at E=" +
                    std::to_string(out.energies(N)) + "; the N-particle ground state is not unique");
  }

  const auto filled = out.modes.leftCols(N);
  out.g = filled * filled.transpose();
  out.g = 0.5 * (out.g + out.g.transpose()).eval();
  out.G = big_G(out.g);
  return out;
}

inline SpectralData solve_spectrum(const LatticeScenario& s) {
  return ground_modes(build_single_particle(s), s.N);
}

}  // namespace hcb
