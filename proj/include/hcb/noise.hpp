#pragma once

// Noise correlations Delta(q1, q2) = <n_q1 n_q2> - <n_q1><n_q2> assembled from
// the four-point engine, plus the cut / regularity / peak diagnostics.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hcb/fourpoint.hpp"
#include "hcb/twopoint.hpp"

namespace hcb {

using ComplexMatrix = Eigen::MatrixXcd;

enum class CacheMode { Auto, Cached, Streaming };

constexpr const char* to_string(CacheMode m) {
  switch (m) {
    case CacheMode::Auto: return "auto";
    case CacheMode::Cached: return "cached";
    case CacheMode::Streaming: return "streaming";
  }
  return "auto";
}

inline constexpr int kMaxCachedL = 64;

struct NoiseOptions {
  int threads = 1;
  CacheMode cache = CacheMode::Auto;
};

struct NoiseMap {
  ComplexMatrix delta;  // delta(q1, q2)
  Normalization normalization = Normalization::PerSite;
  double scale = 1.0;  // N/Z factor already applied (1 when not renormalized)
  bool renormalized = false;
  CacheMode mode = CacheMode::Cached;
  std::uint64_t tuple_evaluations = 0;
  std::uint64_t determinant_evaluations = 0;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;

  int L() const { return static_cast<int>(delta.rows()); }
};

inline constexpr double kConjugationTol = 1e-9;

namespace detail {

/// Runs body(row) for row in [0, rows) on `threads` workers. Rows are pulled
/// from a shared counter; results must depend only on the row index.
template <class Body>
void parallel_rows(int rows, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, rows));
  if (threads == 1) {
    for (int r = 0; r < rows; ++r) body(r);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int r = next.fetch_add(1); r < rows; r = next.fetch_add(1)) body(r);
    });
  }
}

/// delta(q1,q2) from the site-difference histogram W(s, r) = sum of
/// <b_n^dag b_m b_l^dag b_j> over n-m = s, l-j = r (mod L).
inline ComplexMatrix transform_histogram(const Matrix& W, const std::vector<Complex>& phase) {
  const int L = static_cast<int>(W.rows());
  // Inner transform over r, then over s.
  ComplexMatrix inner(L, L);  // (s, q2)
  for (int s = 0; s < L; ++s) {
    for (int q2 = 0; q2 < L; ++q2) {
      Complex acc{0.0, 0.0};
      for (int r = 0; r < L; ++r) acc += phase[mod(static_cast<long long>(q2) * r, L)] * W(s, r);
      inner(s, q2) = acc;
    }
  }
  ComplexMatrix out(L, L);
  for (int q1 = 0; q1 < L; ++q1) {
    for (int q2 = 0; q2 < L; ++q2) {
      Complex acc{0.0, 0.0};
      for (int s = 0; s < L; ++s) acc += phase[mod(static_cast<long long>(q1) * s, L)] * inner(s, q2);
      out(q1, q2) = acc;
    }
  }
  return out;
}

}  // namespace detail

struct FourPointSum {
  ComplexMatrix S4;
  CacheMode mode = CacheMode::Cached;
  std::uint64_t tuple_evaluations = 0;
  std::uint64_t determinant_evaluations = 0;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
};

/// Raw sum S4(q1,q2) = sum_{n,m,l,j} e^{iq1(n-m)} e^{iq2(l-j)} <b_n^dag b_m b_l^dag b_j>.
///
/// Stage 1 reduces each (n,m) row over (l,j) into a histogram over l-j in a
/// fixed order; stage 2 sums the rows in ascending order and Fourier
/// transforms. Thread count never changes the result bits.
inline FourPointSum four_point_sum(const Propagators& p, const NoiseOptions& opt) {
  const int L = static_cast<int>(p.g.rows());
  const auto t0 = std::chrono::steady_clock::now();
  FourPointSum out;
  out.mode =
      opt.cache == CacheMode::Auto ? (L <= kMaxCachedL ? CacheMode::Cached : CacheMode::Streaming) : opt.cache;
  const int rows = L * L;
  std::vector<double> row_hist(static_cast<std::size_t>(rows) * L, 0.0);
  std::atomic<std::uint64_t> tuples{0}, dets{0};

  auto flat = [L](int n, int m, int l, int j) {
    return ((static_cast<std::size_t>(n) * L + m) * L + l) * L + j;
  };

  if (out.mode == CacheMode::Cached) {
    // Each tuple is evaluated once for the canonical member of its
    // hermitian pair (n,m,l,j) ~ (j,l,m,n) and written to both slots.
    std::vector<double> tensor(static_cast<std::size_t>(rows) * rows);
    detail::parallel_rows(rows, opt.threads, [&](int row) {
      FourPointWorkspace ws;
      const int n = row / L, m = row % L;
      std::uint64_t local = 0;
      for (int l = 0; l < L; ++l) {
        for (int j = 0; j < L; ++j) {
          const auto self = flat(n, m, l, j);
          const auto partner = flat(j, l, m, n);
          if (self > partner) continue;
          const double v = four_point(OperatorTuple{{n, m, l, j}}, p, ws);
          tensor[self] = v;
          tensor[partner] = v;
          ++local;
        }
      }
      tuples += local;
      dets += ws.det.calls;
    });
    detail::parallel_rows(rows, opt.threads, [&](int row) {
      double* hist = row_hist.data() + static_cast<std::size_t>(row) * L;
      const double* t = tensor.data() + static_cast<std::size_t>(row) * rows;
      for (int l = 0; l < L; ++l) {
        for (int j = 0; j < L; ++j) hist[mod(l - j, L)] += t[l * L + j];
      }
    });
  } else {
    detail::parallel_rows(rows, opt.threads, [&](int row) {
      FourPointWorkspace ws;
      const int n = row / L, m = row % L;
      double* hist = row_hist.data() + static_cast<std::size_t>(row) * L;
      for (int l = 0; l < L; ++l) {
        for (int j = 0; j < L; ++j) hist[mod(l - j, L)] += four_point(OperatorTuple{{n, m, l, j}}, p, ws);
      }
      tuples += static_cast<std::uint64_t>(L) * L;
      dets += ws.det.calls;
    });
  }
  const auto t1 = std::chrono::steady_clock::now();

  Matrix W = Matrix::Zero(L, L);
  for (int n = 0; n < L; ++n) {
    for (int m = 0; m < L; ++m) {
      const double* hist = row_hist.data() + static_cast<std::size_t>(n * L + m) * L;
      const int s = mod(n - m, L);
      for (int r = 0; r < L; ++r) W(s, r) += hist[r];
    }
  }
  out.S4 = detail::transform_histogram(W, phase_table(L));
  const auto t2 = std::chrono::steady_clock::now();

  out.tuple_evaluations = tuples.load();
  out.determinant_evaluations = dets.load();
  out.stage1_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.stage2_seconds = std::chrono::duration<double>(t2 - t1).count();
  return out;
}

/// Largest |delta(q1,q2)^* - delta(-q1,-q2)|.
inline double conjugation_defect(const ComplexMatrix& d) {
  const int L = static_cast<int>(d.rows());
  double worst = 0.0;
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) worst = std::max(worst, std::abs(std::conj(d(a, b)) - d(mod(-a, L), mod(-b, L))));
  }
  return worst;
}

/// Noise map from the raw four-point sum and the momentum distribution.
/// `nq` must carry the same normalization as requested (unscaled by N/Z).
inline NoiseMap assemble_noise(const ComplexMatrix& S4, const std::vector<double>& nq, Normalization norm) {
  const int L = static_cast<int>(S4.rows());
  NoiseMap out;
  out.normalization = norm;
  out.delta.resize(L, L);
  const double scale = norm == Normalization::PerSite ? 1.0 / (static_cast<double>(L) * L) : 1.0;
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) out.delta(a, b) = S4(a, b) * scale - nq[a] * nq[b];
  }
  const double defect = conjugation_defect(out.delta);
  if (defect > kConjugationTol) {
    throw Error(ErrorCode::ComplexResidue, "noise map violates conjugation symmetry by " + std::to_string(defect));
  }
  return out;
}

inline NoiseMap noise_map(const LatticeScenario& s, const SpectralData& sp, const CorrelationSet& corr,
                          const NoiseOptions& opt = {}) {
  const Propagators p{sp.g, sp.G, corr.B};
  const FourPointSum sum = four_point_sum(p, opt);
  NoiseMap out = assemble_noise(sum.S4, corr.nq, s.normalization);
  out.mode = sum.mode;
  out.tuple_evaluations = sum.tuple_evaluations;
  out.determinant_evaluations = sum.determinant_evaluations;
  out.stage1_seconds = sum.stage1_seconds;
  out.stage2_seconds = sum.stage2_seconds;
  if (applies_trap_renorm(s)) {
    out.scale = trap_scale(corr.density, s.density_threshold);
    out.delta *= out.scale;
    out.renormalized = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct NoiseCut {
  int q2 = 0;
  std::vector<Complex> values;  // indexed by q1
  Normalization normalization = Normalization::PerSite;
  bool renormalized = false;
};

inline NoiseCut delta_cut(const NoiseMap& noise, int q2) {
  if (q2 < 0 || q2 >= noise.L()) {
    throw Error(ErrorCode::Range, "q2=" + std::to_string(q2) + " outside [0, " + std::to_string(noise.L()) + ")");
  }
  NoiseCut cut;
  cut.q2 = q2;
  cut.normalization = noise.normalization;
  cut.renormalized = noise.renormalized;
  cut.values.resize(static_cast<std::size_t>(noise.L()));
  for (int q1 = 0; q1 < noise.L(); ++q1) cut.values[q1] = noise.delta(q1, q2);
  return cut;
}

inline std::vector<double> real_part(const std::vector<Complex>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](Complex z) { return z.real(); });
  return out;
}

struct Regularity {
  double deviation = 0.0;          // D
  std::vector<Complex> by_offset;  // mean of delta(q2 + r, q2) over q2
};

/// How far delta(q1,q2) is from a function of q1 - q2 alone.
inline Regularity mott_regularity(const NoiseMap& noise) {
  const int L = noise.L();
  Regularity reg;
  reg.by_offset.assign(static_cast<std::size_t>(L), Complex{});
  for (int r = 0; r < L; ++r) {
    Complex acc{};
    for (int q2 = 0; q2 < L; ++q2) acc += noise.delta(mod(q2 + r, L), q2);
    reg.by_offset[r] = acc / static_cast<double>(L);
  }
  for (int q1 = 0; q1 < L; ++q1) {
    for (int q2 = 0; q2 < L; ++q2) {
      reg.deviation = std::max(reg.deviation, std::abs(noise.delta(q1, q2) - reg.by_offset[mod(q1 - q2, L)]));
    }
  }
  return reg;
}

/// Mean signal at the peak indices over the median of the background.
///
/// The background is every index within `half_window` of some peak
/// (cyclically), excluding the peaks themselves and q = 0; a negative
/// half_window uses the whole grid.
inline double peak_contrast(const std::vector<double>& signal, const std::vector<int>& peaks, int half_window) {
  const int L = static_cast<int>(signal.size());
  if (peaks.empty()) throw Error(ErrorCode::Range, "peak_contrast needs at least one peak index");
  std::vector<char> is_peak(static_cast<std::size_t>(L), 0), in_bg(static_cast<std::size_t>(L), 0);
  double peak_sum = 0.0;
  for (int q : peaks) {
    if (q < 0 || q >= L) throw Error(ErrorCode::Range, "peak index " + std::to_string(q) + " out of range");
    is_peak[q] = 1;
    peak_sum += signal[q];
  }
  if (half_window < 0 || 2 * half_window + 1 >= L) {
    std::fill(in_bg.begin(), in_bg.end(), 1);
  } else {
    for (int q : peaks) {
      for (int k = -half_window; k <= half_window; ++k) in_bg[mod(q + k, L)] = 1;
    }
  }
  std::vector<double> bg;
  for (int q = 1; q < L; ++q) {
    if (in_bg[q] && !is_peak[q]) bg.push_back(signal[q]);
  }
  if (bg.empty()) throw Error(ErrorCode::Range, "peak_contrast background is empty");
  const auto mid = bg.begin() + static_cast<std::ptrdiff_t>(bg.size() / 2);
  std::nth_element(bg.begin(), mid, bg.end());
  double median = *mid;
  if (bg.size() % 2 == 0) {
    const double lower = *std::max_element(bg.begin(), mid);
    median = 0.5 * (median + lower);
  }
  return (peak_sum / static_cast<double>(peaks.size())) / median;
}

}  // namespace hcb
