#pragma once

// Four-point hard-core boson correlators <b^(a) b^(b) b^(c) b^(d)> of a
// filled Jordan-Wigner sea.
//
// Convention: sign +1 is an annihilation operator, -1 a creation operator.
// A tuple is first stably sorted by site (operators on different sites
// commute), then dispatched on how many sites coincide. Same-site pairs of the
// form b b^dag carry the bosonic 1 + n of a virtually doubly occupied site
// rather than the spin-1/2 value 1 - n.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "hcb/determinant.hpp"
#include "hcb/spectral.hpp"

namespace hcb {

inline constexpr int kAnnihilate = +1;
inline constexpr int kCreate = -1;

/// <b_n^dag b_m b_l^dag b_j> by default.
struct OperatorTuple {
  std::array<int, 4> sites{};
  std::array<int, 4> signs{kCreate, kAnnihilate, kCreate, kAnnihilate};

  bool is_density_pattern() const {
    return signs == std::array<int, 4>{kCreate, kAnnihilate, kCreate, kAnnihilate};
  }
};

enum class Pattern { AllDistinct, PairLeft, PairMid, PairRight, TwoPairs, Triple, Quad };

struct OrderedCase {
  Pattern pattern = Pattern::AllDistinct;
  std::array<int, 4> sites{};  // a <= b <= c <= d
  std::array<int, 4> signs{};  // alpha, beta, gamma, delta
  OperatorTuple original;
};

inline OrderedCase site_order(const OperatorTuple& t) {
  std::array<int, 4> perm{0, 1, 2, 3};
  std::stable_sort(perm.begin(), perm.end(), [&](int x, int y) { return t.sites[x] < t.sites[y]; });
  OrderedCase c;
  c.original = t;
  for (int k = 0; k < 4; ++k) {
    c.sites[k] = t.sites[perm[k]];
    c.signs[k] = t.signs[perm[k]];
  }
  const auto& s = c.sites;
  const bool ab = s[0] == s[1], bc = s[1] == s[2], cd = s[2] == s[3];
  const int equal_links = int(ab) + int(bc) + int(cd);
  if (equal_links == 0) {
    c.pattern = Pattern::AllDistinct;
  } else if (equal_links == 1) {
    c.pattern = ab ? Pattern::PairLeft : (bc ? Pattern::PairMid : Pattern::PairRight);
  } else if (equal_links == 2) {
    c.pattern = (ab && cd) ? Pattern::TwoPairs : Pattern::Triple;
  } else {
    c.pattern = Pattern::Quad;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Index sets of the determinant matrices. Row and column order is significant.

struct IndexSets {
  std::vector<int> rows;
  std::vector<int> cols;
};

/// Rows x..z-1 and columns x+1..z, both skipping y. Requires x < y < z.
inline void indices_M(int x, int y, int z, IndexSets& out) {
  out.rows.clear();
  out.cols.clear();
  for (int k = x; k < z; ++k) {
    if (k != y) out.rows.push_back(k);
  }
  for (int k = x + 1; k <= z; ++k) {
    if (k != y) out.cols.push_back(k);
  }
}

/// Rows (p, u..v-1) and columns (p, u+1..v).
inline void indices_S(int p, int u, int v, IndexSets& out) {
  out.rows.assign(1, p);
  out.cols.assign(1, p);
  for (int k = u; k < v; ++k) out.rows.push_back(k);
  for (int k = u + 1; k <= v; ++k) out.cols.push_back(k);
}

/// Rows (b, a+1..b-1, c+1..d), columns (a..b-1, c+1..d-1, c).
inline void indices_X(int a, int b, int c, int d, IndexSets& out) {
  out.rows.assign(1, b);
  out.cols.clear();
  for (int k = a + 1; k < b; ++k) out.rows.push_back(k);
  for (int k = c + 1; k <= d; ++k) out.rows.push_back(k);
  for (int k = a; k < b; ++k) out.cols.push_back(k);
  for (int k = c + 1; k < d; ++k) out.cols.push_back(k);
  out.cols.push_back(c);
}

/// Rows (a+1..b-1, c+1..d-1, c, d), columns (a, b, a+1..b-1, c+1..d-1).
inline void indices_Y(int a, int b, int c, int d, IndexSets& out) {
  out.rows.clear();
  out.cols.assign({a, b});
  for (int k = a + 1; k < b; ++k) out.rows.push_back(k);
  for (int k = c + 1; k < d; ++k) out.rows.push_back(k);
  out.rows.push_back(c);
  out.rows.push_back(d);
  for (int k = a + 1; k < b; ++k) out.cols.push_back(k);
  for (int k = c + 1; k < d; ++k) out.cols.push_back(k);
}

/// Per-thread scratch for four-point evaluation.
struct FourPointWorkspace {
  DetWorkspace det;
  IndexSets idx;
};

inline double matrix_M(const Matrix& G, int x, int y, int z, FourPointWorkspace& ws) {
  indices_M(x, y, z, ws.idx);
  return submatrix_determinant(G, ws.idx.rows, ws.idx.cols, ws.det);
}

inline double matrix_S(const Matrix& G, int p, int u, int v, FourPointWorkspace& ws) {
  indices_S(p, u, v, ws.idx);
  return submatrix_determinant(G, ws.idx.rows, ws.idx.cols, ws.det);
}

inline double matrix_X(const Matrix& G, int a, int b, int c, int d, FourPointWorkspace& ws) {
  indices_X(a, b, c, d, ws.idx);
  return submatrix_determinant(G, ws.idx.rows, ws.idx.cols, ws.det);
}

inline double matrix_Y(const Matrix& G, int a, int b, int c, int d, FourPointWorkspace& ws) {
  indices_Y(a, b, c, d, ws.idx);
  return submatrix_determinant(G, ws.idx.rows, ws.idx.cols, ws.det);
}

// ---------------------------------------------------------------------------

/// Read-only propagator bundle; all three matrices are L x L.
struct Propagators {
  const Matrix& g;
  const Matrix& G;
  const Matrix& B;
};

/// Matrix of a same-site operator string on {|0>, |1>}: element (out, in).
/// Operators act right to left with bosonic amplitudes and unbounded
/// intermediate occupation; components ending above 1 are projected out.
inline std::array<std::array<double, 2>, 2> projected_site_string(std::span<const int> signs) {
  std::array<std::array<double, 2>, 2> m{};
  for (int in = 0; in < 2; ++in) {
    int n = in;
    double amp = 1.0;
    for (auto it = signs.rbegin(); it != signs.rend(); ++it) {
      if (*it == kAnnihilate) {
        if (n == 0) {
          amp = 0.0;
          break;
        }
        amp *= std::sqrt(static_cast<double>(n));
        --n;
      } else {
        amp *= std::sqrt(static_cast<double>(n + 1));
        ++n;
      }
    }
    if (amp != 0.0 && n <= 1) m[n][in] += amp;
  }
  return m;
}

namespace detail {

inline double bracket(bool p) { return p ? 1.0 : 0.0; }

/// Tuples on at most two distinct sites for general sign patterns.
inline double few_site_general(const OrderedCase& c, const Propagators& p) {
  const auto& s = c.sites;
  const int x = s[0], y = s[3];
  std::array<int, 4> sx{}, sy{};
  int nx = 0, ny = 0;
  for (int k = 0; k < 4; ++k) {
    if (s[k] == x) sx[nx++] = c.signs[k];
    else sy[ny++] = c.signs[k];
  }
  const auto mx = projected_site_string(std::span<const int>(sx.data(), nx));
  const double gx = p.g(x, x);
  if (x == y) return mx[0][0] * (1.0 - gx) + mx[1][1] * gx;
  const auto my = projected_site_string(std::span<const int>(sy.data(), ny));
  const double gy = p.g(y, y);
  const double both = gx * gy - p.g(x, y) * p.g(x, y);
  double r = mx[0][0] * my[0][0] * (1.0 - gx - gy + both) + mx[1][1] * my[0][0] * (gx - both) +
             mx[0][0] * my[1][1] * (gy - both) + mx[1][1] * my[1][1] * both;
  // b_x^dag b_y and b_x b_y^dag; both equal B_xy for a real ground state.
  r += (mx[1][0] * my[0][1] + mx[0][1] * my[1][0]) * p.B(x, y);
  return r;
}

/// Closed forms for <b_n^dag b_m b_l^dag b_j> with at most two distinct sites.
inline double few_site_density_pattern(const OperatorTuple& t, const Propagators& p) {
  const int n = t.sites[0], m = t.sites[1], l = t.sites[2], j = t.sites[3];
  if (n == m && m == l && l == j) return p.g(n, n);
  if (n == m && l == j) return p.g(n, n) * p.g(l, l) - p.g(n, l) * p.g(n, l);
  if (n == j && m == l) return p.g(n, n) * p.g(m, m) - p.g(n, m) * p.g(n, m) + p.g(n, n);
  if (n == m && m == l) return p.B(n, j);
  if (m == l && l == j) return p.B(n, m);
  return 0.0;
}

}  // namespace detail

/// Expectation value of a site-ordered case.
inline double chi_ordered(const OrderedCase& c, const Propagators& p, FourPointWorkspace& ws) {
  const auto [alpha, beta, gamma, delta] = c.signs;
  if (alpha + beta + gamma + delta != 0) return 0.0;
  const auto [a, b, cc, d] = c.sites;
  using detail::bracket;

  switch (c.pattern) {
    case Pattern::AllDistinct: {
      const double wx = (2.0 - gamma * delta - alpha * beta) / 16.0;
      const double wy = beta / 4.0 * (bracket(gamma == kCreate) - bracket(alpha == kCreate));
      double v = 0.0;
      if (wx != 0.0) v += wx * matrix_X(p.G, a, b, cc, d, ws);
      if (wy != 0.0) v += wy * matrix_Y(p.G, a, b, cc, d, ws);
      return ((b + d - cc - a) % 2 == 0) ? v : -v;
    }
    case Pattern::PairMid: {
      if (beta * gamma == 1) return 0.0;
      return -0.25 * matrix_M(p.G, a, b, d, ws) + (0.5 + bracket(beta == kAnnihilate)) * p.B(a, d);
    }
    case Pattern::PairLeft: {
      if (alpha * beta == 1) return 0.0;
      return 0.25 * matrix_S(p.G, a, cc, d, ws) + (0.5 + bracket(alpha == kAnnihilate)) * p.B(cc, d);
    }
    case Pattern::PairRight: {
      if (gamma * delta == 1) return 0.0;
      return 0.25 * matrix_S(p.G, cc, a, b, ws) + (0.5 + bracket(gamma == kAnnihilate)) * p.B(a, b);
    }
    case Pattern::TwoPairs:
    case Pattern::Triple:
    case Pattern::Quad:
      if (c.original.is_density_pattern()) return detail::few_site_density_pattern(c.original, p);
      return detail::few_site_general(c, p);
  }
  return 0.0;
}

inline double four_point(const OperatorTuple& t, const Propagators& p, FourPointWorkspace& ws) {
  return chi_ordered(site_order(t), p, ws);
}

inline double four_point(const OperatorTuple& t, const Propagators& p) {
  FourPointWorkspace ws;
  return four_point(t, p, ws);
}

}  // namespace hcb
