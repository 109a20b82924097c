#pragma once

// Determinants of index-selected submatrices, the inner kernel of every
// correlation formula. LU with partial pivoting in a reusable workspace.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace hcb {

/// Scratch storage for one thread of determinant evaluations.
class DetWorkspace {
 public:
  double* buffer(std::size_t n) {
    if (data_.size() < n * n) data_.resize(n * n);
    return data_.data();
  }
  std::vector<int>& rows() { return rows_; }
  std::vector<int>& cols() { return cols_; }

  std::uint64_t calls = 0;

 private:
  std::vector<double> data_;
  std::vector<int> rows_;
  std::vector<int> cols_;
};

/// In-place LU determinant of a row-major n x n array. Any pivot below 1e-300
/// in magnitude yields 0.
inline double lu_determinant(double* a, std::size_t n) {
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(a[i * n + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < 1e-300) return 0.0;
    if (piv != k) {
      for (std::size_t j = k; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      det = -det;
    }
    const double pivot = a[k * n + k];
    det *= pivot;
    const double inv = 1.0 / pivot;
    for (std::size_t i = k + 1; i < n; ++i) {
      double* ri = a + i * n;
      const double f = ri[k] * inv;
      if (f == 0.0) continue;
      const double* rk = a + k * n;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= f * rk[j];
    }
  }
  return det;
}

/// det[ G(rows[i], cols[j]) ]; the empty determinant is 1.
inline double submatrix_determinant(const Eigen::MatrixXd& G, std::span<const int> rows, std::span<const int> cols,
                                    DetWorkspace& ws) {
  const std::size_t n = rows.size();
  ++ws.calls;
  if (n == 0) return 1.0;
  double* a = ws.buffer(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = G(rows[i], cols[j]);
  }
  if (n == 1) return a[0];
  if (n == 2) return a[0] * a[3] - a[1] * a[2];
  return lu_determinant(a, n);
}

inline double submatrix_determinant(const Eigen::MatrixXd& G, std::span<const int> rows, std::span<const int> cols) {
  DetWorkspace ws;
  return submatrix_determinant(G, rows, cols, ws);
}

}  // namespace hcb
