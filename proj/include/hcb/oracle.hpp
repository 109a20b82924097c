#pragma once

// Brute-force exact diagonalization on small lattices.
//
// Ground states live in a fixed-N Fock sector with occupations capped per
// site (cap = 1 for hard-core bosons). Correlators are evaluated by applying
// ladder operators one at a time. In bosonic mode intermediate states may be
// multiply occupied; in spin mode b^dag|1> = 0.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hcb/error.hpp"
#include "hcb/fourpoint.hpp"
#include "hcb/noise.hpp"
#include "hcb/scenario.hpp"
#include "hcb/spectral.hpp"
#include "hcb/twopoint.hpp"

namespace hcb::oracle {

/// Occupations packed 4 bits per site, site 0 in the lowest nibble.
using StateCode = std::uint64_t;

inline constexpr int kMaxSites = 16;
inline constexpr int kMaxHcbSites = 12;
inline constexpr int kMaxNoiseSites = 8;
inline constexpr int kDenseLimit = 2000;

inline int occupation(StateCode s, int site) { return static_cast<int>((s >> (4 * site)) & 0xF); }
inline StateCode with_occupation(StateCode s, int site, int n) {
  const StateCode mask = StateCode{0xF} << (4 * site);
  return (s & ~mask) | (static_cast<StateCode>(n) << (4 * site));
}

class FockBasis {
 public:
  /// All occupation vectors with entries in [0, cap], optionally restricted to
  /// total particle number, in lexicographic order of (n_0, n_1, ..., n_{L-1}).
  FockBasis(int L, int cap, std::optional<int> particles = std::nullopt) : L_(L), cap_(cap), particles_(particles) {
    if (L < 1 || L > kMaxSites) throw Error(ErrorCode::TooLarge, "FockBasis supports 1..16 sites");
    if (cap < 1 || cap > 15) throw Error(ErrorCode::Cap, "occupation cap must lie in [1, 15]");
    std::vector<int> occ(static_cast<std::size_t>(L), 0);
    enumerate(0, 0, occ);
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], static_cast<int>(i));
  }

  int sites() const { return L_; }
  int cap() const { return cap_; }
  std::optional<int> particles() const { return particles_; }
  std::size_t size() const { return states_.size(); }
  StateCode state(std::size_t i) const { return states_[i]; }

  std::optional<int> index(StateCode s) const {
    const auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  void enumerate(int site, int used, std::vector<int>& occ) {
    if (site == L_) {
      if (particles_ && used != *particles_) return;
      StateCode code = 0;
      for (int j = 0; j < L_; ++j) code = with_occupation(code, j, occ[j]);
      states_.push_back(code);
      return;
    }
    for (int n = 0; n <= cap_; ++n) {
      if (particles_ && used + n > *particles_) break;
      occ[site] = n;
      enumerate(site + 1, used + n, occ);
    }
    occ[site] = 0;
  }

  int L_;
  int cap_;
  std::optional<int> particles_;
  std::vector<StateCode> states_;
  std::unordered_map<StateCode, int> index_;
};

enum class Algebra { Bosonic, Spin };

struct OracleState {
  FockBasis basis;
  Vector ground;
  double energy = 0.0;
  double gap = 0.0;
  Algebra algebra = Algebra::Bosonic;
};

namespace detail {

inline std::vector<std::pair<int, int>> bonds(int L, Boundary bc) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j + 1 < L; ++j) out.emplace_back(j, j + 1);
  if (bc == Boundary::Periodic && L > 2) out.emplace_back(L - 1, 0);
  return out;
}

/// Bose-Hubbard Hamiltonian on the basis; U in units of J.
inline Eigen::SparseMatrix<double> hamiltonian(const FockBasis& basis, const LatticeScenario& s, double U) {
  const auto v = potential_values(s);
  const auto links = bonds(s.L, s.bc);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const StateCode st = basis.state(i);
    double diag = 0.0;
    for (int j = 0; j < s.L; ++j) {
      const int n = occupation(st, j);
      diag += s.J * v[j] * n + 0.5 * U * s.J * n * (n - 1);
    }
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
    for (auto [x, y] : links) {
      for (auto [to, from] : {std::pair{x, y}, std::pair{y, x}}) {
        const int nf = occupation(st, from), nt = occupation(st, to);
        if (nf == 0 || nt >= basis.cap()) continue;
        const StateCode moved = with_occupation(with_occupation(st, from, nf - 1), to, nt + 1);
        const auto k = basis.index(moved);
        if (!k) continue;
        trip.emplace_back(*k, static_cast<int>(i), -s.J * std::sqrt(static_cast<double>(nf) * (nt + 1)));
      }
    }
  }
  Eigen::SparseMatrix<double> H(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(basis.size()));
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

struct LowestPair {
  double e0 = 0.0;
  double e1 = 0.0;  // +inf for a one-dimensional space
  Vector v0;
};

/// Lanczos with full reorthogonalization; returns the two lowest Ritz values.
inline LowestPair lanczos_lowest(const Eigen::SparseMatrix<double>& H, double tol = 1e-10) {
  const Eigen::Index n = H.rows();
  const int max_iter = static_cast<int>(std::min<Eigen::Index>(n, 400));
  std::vector<Vector> basis;
  Vector q = Vector::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) += 1e-3 * std::sin(1.0 + static_cast<double>(i));
  q.normalize();
  std::vector<double> alpha, beta;
  LowestPair out;
  for (int it = 0; it < max_iter; ++it) {
    basis.push_back(q);
    Vector w = H * q;
    alpha.push_back(q.dot(w));
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) w -= b.dot(w) * b;
    }
    const double bnorm = w.norm();
    const int k = static_cast<int>(alpha.size());
    Matrix T = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(T);
    const double resid = bnorm * std::abs(es.eigenvectors()(k - 1, 0));
    if ((resid < tol * std::max(1.0, std::abs(es.eigenvalues()(0))) && k >= 2) || bnorm < 1e-14 || it + 1 == max_iter) {
      out.e0 = es.eigenvalues()(0);
      out.e1 = k > 1 ? es.eigenvalues()(1) : std::numeric_limits<double>::infinity();
      out.v0 = Vector::Zero(n);
      for (int i = 0; i < k; ++i) out.v0 += es.eigenvectors()(i, 0) * basis[i];
      out.v0.normalize();
      return out;
    }
    beta.push_back(bnorm);
    q = w / bnorm;
  }
  return out;
}

inline OracleState solve(FockBasis basis, const Eigen::SparseMatrix<double>& H) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Vector v0;
  double e0 = 0.0, e1 = std::numeric_limits<double>::infinity();
  if (dim < kDenseLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix> es{Matrix(H)};
    e0 = es.eigenvalues()(0);
    if (dim > 1) e1 = es.eigenvalues()(1);
    v0 = es.eigenvectors().col(0);
  } else {
    const auto lp = lanczos_lowest(H);
    e0 = lp.e0;
    e1 = lp.e1;
    v0 = lp.v0;
  }
  if (e1 - e0 < 1e-10) throw Error(ErrorCode::DegenerateGround, "many-body ground state is degenerate");
  Eigen::Index imax = 0;
  v0.cwiseAbs().maxCoeff(&imax);
  if (v0(imax) < 0) v0 = -v0;
  return OracleState{std::move(basis), std::move(v0), e0, e1 - e0, Algebra::Bosonic};
}

}  // namespace detail

/// Hard-core boson ground state in the fixed-N sector.
inline OracleState hcb_ground_state(const LatticeScenario& s) {
  require_valid(s);
  if (s.L > kMaxHcbSites) throw Error(ErrorCode::TooLarge, "hcb oracle limited to L <= 12");
  FockBasis basis(s.L, 1, s.N);
  const auto H = detail::hamiltonian(basis, s, 0.0);
  return detail::solve(std::move(basis), H);
}

/// Ground state of the full Bose-Hubbard model with on-site U (units of J).
inline OracleState bose_hubbard_ground(const LatticeScenario& s, double U, int cap) {
  require_valid(s);
  if (cap < 3) throw Error(ErrorCode::Cap, "finite-U oracle needs cap >= 3");
  if (s.L > kMaxNoiseSites) throw Error(ErrorCode::TooLarge, "finite-U oracle limited to L <= 8");
  if (!(U > 0.0)) throw Error(ErrorCode::BadScenario, "U must be positive");
  FockBasis basis(s.L, cap, s.N);
  const auto H = detail::hamiltonian(basis, s, U);
  return detail::solve(std::move(basis), H);
}

inline OracleState with_algebra(OracleState state, Algebra a) {
  state.algebra = a;
  return state;
}

/// <psi| b^(s0)_{x0} b^(s1)_{x1} ... |psi> for an arbitrary operator string.
///
/// `eval_cap` bounds intermediate occupation in bosonic mode (nullopt: none).
inline double oracle_expectation(const OracleState& st, std::span<const int> sites, std::span<const int> signs,
                                 std::optional<int> eval_cap = std::nullopt) {
  if (st.algebra == Algebra::Bosonic && eval_cap && *eval_cap < 2) {
    throw Error(ErrorCode::Cap, "bosonic evaluation needs cap >= 2");
  }
  const bool spin = st.algebra == Algebra::Spin;
  std::vector<std::pair<StateCode, double>> vec;
  vec.reserve(st.basis.size());
  for (std::size_t i = 0; i < st.basis.size(); ++i) {
    if (st.ground(static_cast<Eigen::Index>(i)) != 0.0) vec.emplace_back(st.basis.state(i), st.ground(i));
  }
  for (std::size_t k = sites.size(); k-- > 0;) {
    const int site = sites[k];
    std::size_t out = 0;
    for (auto& [code, amp] : vec) {
      const int n = occupation(code, site);
      int next = 0;
      double f = 1.0;
      if (signs[k] == kAnnihilate) {
        if (n == 0) continue;
        next = n - 1;
        f = spin ? 1.0 : std::sqrt(static_cast<double>(n));
      } else {
        if (spin && n >= 1) continue;
        next = n + 1;
        if (next > 15 || (eval_cap && next > *eval_cap)) continue;
        f = spin ? 1.0 : std::sqrt(static_cast<double>(n + 1));
      }
      vec[out++] = {with_occupation(code, site, next), amp * f};
    }
    vec.resize(out);
  }
  double acc = 0.0;
  for (const auto& [code, amp] : vec) {
    if (const auto i = st.basis.index(code)) acc += st.ground(*i) * amp;
  }
  return acc;
}

inline double oracle_four_point(const OracleState& st, const OperatorTuple& t,
                                std::optional<int> eval_cap = std::nullopt) {
  return oracle_expectation(st, t.sites, t.signs, eval_cap);
}

inline Matrix oracle_two_point(const OracleState& st) {
  const int L = st.basis.sites();
  Matrix B(L, L);
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      const std::array<int, 2> sites{a, b}, signs{kCreate, kAnnihilate};
      B(a, b) = oracle_expectation(st, sites, signs);
    }
  }
  return B;
}

struct OracleNoise {
  ComplexMatrix delta;
  std::vector<double> nq;
};

/// Direct L^4 x L^2 summation of the noise map from oracle correlators.
inline OracleNoise oracle_noise_map(const OracleState& st, Normalization norm = Normalization::PerSite) {
  const int L = st.basis.sites();
  if (L > kMaxNoiseSites) throw Error(ErrorCode::TooLarge, "oracle noise map limited to L <= 8");
  std::vector<double> tensor(static_cast<std::size_t>(L) * L * L * L);
  std::size_t idx = 0;
  for (int n = 0; n < L; ++n)
    for (int m = 0; m < L; ++m)
      for (int l = 0; l < L; ++l)
        for (int j = 0; j < L; ++j) tensor[idx++] = oracle_four_point(st, OperatorTuple{{n, m, l, j}});

  const Matrix B = oracle_two_point(st);
  auto e = [L](int q, int x) { return std::polar(1.0, 2.0 * std::numbers::pi * q * x / L); };
  const double s2 = norm == Normalization::PerSite ? 1.0 / L : 1.0;
  OracleNoise out;
  out.nq.resize(static_cast<std::size_t>(L));
  for (int q = 0; q < L; ++q) {
    Complex acc{};
    for (int n = 0; n < L; ++n)
      for (int m = 0; m < L; ++m) acc += e(q, n - m) * B(n, m);
    out.nq[q] = (acc * s2).real();
  }
  out.delta.resize(L, L);
  for (int q1 = 0; q1 < L; ++q1) {
    for (int q2 = 0; q2 < L; ++q2) {
      Complex acc{};
      idx = 0;
      for (int n = 0; n < L; ++n)
        for (int m = 0; m < L; ++m)
          for (int l = 0; l < L; ++l)
            for (int j = 0; j < L; ++j) acc += e(q1, n - m) * e(q2, l - j) * tensor[idx++];
      out.delta(q1, q2) = acc * s2 * s2 - out.nq[q1] * out.nq[q2];
    }
  }
  return out;
}

/// Whether the site-ordered form of t has a same-site annihilate-then-create
/// neighbour pair, the operator structure where b b^dag = 1 + n matters.
inline bool has_mov_pair(const OperatorTuple& t) {
  const auto c = site_order(t);
  for (int k = 0; k + 1 < 4; ++k) {
    if (c.sites[k] == c.sites[k + 1] && c.signs[k] == kAnnihilate && c.signs[k + 1] == kCreate) return true;
  }
  return false;
}

}  // namespace hcb::oracle
