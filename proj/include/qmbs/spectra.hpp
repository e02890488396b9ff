#pragma once

// Dense Hermitian diagonalization and level-spacing statistics.

#include <complex>
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qmbs/blas_guard.hpp"
#include "qmbs/error.hpp"
#include "qmbs/operators.hpp"

namespace qmbs {

struct SpectrumResult {
  Eigen::VectorXd eigenvalues;                // ascending
  std::optional<Eigen::MatrixXcd> eigenvectors;  // columns
  BasisPtr basis;
};

enum class SolverPath { automatic, real_symmetric, complex_hermitian };

struct DenseOptions {
  std::size_t dense_cap = 20'000;
  SolverPath path = SolverPath::automatic;
};

inline double dense_bytes(std::size_t dim, bool complex) {
  return static_cast<double>(dim) * static_cast<double>(dim) * (complex ? 16.0 : 8.0);
}

namespace detail {

inline void check_info(lapack_int info, const char* routine) {
  if (info != 0) throw Error(std::string(routine) + " failed with info = " + std::to_string(info));
}

}  // namespace detail

/// Real symmetric path: dsyev for values only (faster than dsyevd for jobz=N
/// on this workload), dsyevd when vectors are wanted. Consumes `a`.
inline SpectrumResult diagonalize_dense(Eigen::MatrixXd a, bool want_vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  SpectrumResult out;
  out.eigenvalues.resize(n);
  if (n == 0) return out;
  if (!blas_checked_ok()) throw Error(kBlasHelp);
  const lapack_int info = want_vectors
                              ? LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, out.eigenvalues.data())
                              : LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, out.eigenvalues.data());
  detail::check_info(info, want_vectors ? "dsyevd" : "dsyev");
  if (want_vectors) out.eigenvectors = a.cast<Complex>();
  return out;
}

inline SpectrumResult diagonalize_dense(Eigen::MatrixXcd a, bool want_vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  SpectrumResult out;
  out.eigenvalues.resize(n);
  if (n == 0) return out;
  const lapack_int info = want_vectors
                              ? LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, out.eigenvalues.data())
                              : LAPACKE_zheev(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, out.eigenvalues.data());
  detail::check_info(info, want_vectors ? "zheevd" : "zheev");
  if (want_vectors) out.eigenvectors = std::move(a);
  return out;
}

/// Full spectrum of a square sector operator. Real operators go through the
/// real symmetric solver unless the complex path is forced.
inline SpectrumResult diagonalize(const SectorOperator& op, bool want_vectors, const DenseOptions& opts = {}) {
  if (!op.square()) throw SectorMismatch("diagonalize needs a square (N -> N) operator");
  const std::size_t dim = op.domain->size();
  const bool real = opts.path == SolverPath::real_symmetric ||
                    (opts.path == SolverPath::automatic && op.is_real());
  if (opts.path == SolverPath::real_symmetric && !op.is_real())
    throw InvalidParameter("real symmetric solver requested for a complex operator");
  if (dim > opts.dense_cap) {
    const double bytes = dense_bytes(dim, !real);
    throw CapacityExceeded("dense diagonalization of dimension " + std::to_string(dim) + " exceeds the cap " +
                               std::to_string(opts.dense_cap) + " (needs about " +
                               std::to_string(static_cast<long long>(bytes / (1 << 20))) +
                               " MiB); pick a smaller sector or raise --dense-cap",
                           bytes);
  }
  SpectrumResult out;
  if (real) {
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (Eigen::Index k = 0; k < op.matrix.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(op.matrix, k); it; ++it) dense(it.row(), it.col()) = it.value().real();
    out = diagonalize_dense(std::move(dense), want_vectors);
  } else {
    out = diagonalize_dense(Eigen::MatrixXcd(op.matrix), want_vectors);
  }
  out.basis = op.domain;
  return out;
}

inline StateVector eigenstate(const SpectrumResult& spec, Eigen::Index i) {
  if (!spec.eigenvectors) throw InvalidParameter("spectrum was computed without eigenvectors");
  return StateVector(spec.basis, spec.eigenvectors->col(i));
}

// ---------------------------------------------------------------------------
// Level statistics

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<long> counts;

  [[nodiscard]] double density(std::size_t bin) const {
    long total = 0;
    for (long c : counts) total += c;
    if (total == 0) return 0.0;
    return static_cast<double>(counts[bin]) / (static_cast<double>(total) * (edges[bin + 1] - edges[bin]));
  }
};

/// Values outside [lo, hi) are dropped, except hi itself which joins the last bin.
inline Histogram make_histogram(const std::vector<double>& values, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw InvalidParameter("histogram needs bins >= 1 and hi > lo");
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    if (v < lo || v > hi) continue;
    auto b = static_cast<int>((v - lo) / (hi - lo) * bins);
    b = std::min(b, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

struct LevelWindow {
  std::size_t lo = 0;  // first level included
  std::size_t hi = 0;  // one past the last level
};

/// Levels floor(D/4) .. ceil(3D/4) - 1 of an ascending spectrum of size D.
inline LevelWindow middle_half(std::size_t dim) { return {dim / 4, (3 * dim + 3) / 4}; }

struct LevelStats {
  std::vector<double> spacings;  // s_i, normalized to unit mean
  std::vector<double> ratios;    // r_i, one per consecutive spacing pair with max > 0
  double mean_r = 0.0;
  double mean_spacing = 0.0;     // Delta before normalization
  LevelWindow window;
  std::size_t zero_spacings = 0;  // exact degeneracies kept as s_i = 0
  std::size_t skipped_ratios = 0; // pairs with both spacings zero
  Histogram histogram;
};

struct LevelStatsOptions {
  std::optional<LevelWindow> window;  // middle half when empty
  int bins = 40;
  double s_max = 4.0;
};

inline LevelStats level_statistics(const Eigen::VectorXd& eigs, const LevelStatsOptions& opts = {}) {
  std::vector<double> e(eigs.data(), eigs.data() + eigs.size());
  std::sort(e.begin(), e.end());
  LevelStats st;
  st.window = opts.window.value_or(middle_half(e.size()));
  if (st.window.hi > e.size() || st.window.lo >= st.window.hi)
    throw InvalidParameter("level window out of range");
  if (st.window.hi - st.window.lo < 10)
    throw InvalidParameter("level statistics need at least 10 levels in the window, got " +
                           std::to_string(st.window.hi - st.window.lo));
  for (std::size_t i = st.window.lo; i + 1 < st.window.hi; ++i) st.spacings.push_back(e[i + 1] - e[i]);
  double sum = 0.0;
  for (double s : st.spacings) sum += s;
  st.mean_spacing = sum / static_cast<double>(st.spacings.size());
  if (!(st.mean_spacing > 0.0)) throw DegenerateInput("all levels in the window coincide");
  for (double& s : st.spacings) {
    s /= st.mean_spacing;
    if (s == 0.0) ++st.zero_spacings;
  }
  double rsum = 0.0;
  for (std::size_t i = 0; i + 1 < st.spacings.size(); ++i) {
    const double a = st.spacings[i], b = st.spacings[i + 1];
    const double mx = std::max(a, b);
    if (mx == 0.0) {
      ++st.skipped_ratios;
      continue;
    }
    st.ratios.push_back(std::min(a, b) / mx);
    rsum += st.ratios.back();
  }
  st.mean_r = st.ratios.empty() ? 0.0 : rsum / static_cast<double>(st.ratios.size());
  st.histogram = make_histogram(st.spacings, 0.0, opts.s_max, opts.bins);
  return st;
}

enum class Ensemble { goe, gue, poisson };

/// Wigner surmises and the Poisson law. The GUE exponent is negative; the
/// positive-exponent form is not normalizable.
inline double reference_distribution(Ensemble kind, double s) {
  using std::numbers::pi;
  if (s < 0.0) throw InvalidParameter("spacing must be non-negative");
  switch (kind) {
    case Ensemble::goe:
      return 0.5 * pi * s * std::exp(-pi * s * s / 4.0);
    case Ensemble::gue:
      return 32.0 / (pi * pi) * s * s * std::exp(-4.0 * s * s / pi);
    case Ensemble::poisson:
      return std::exp(-s);
  }
  return 0.0;
}

/// Large-matrix mean level-spacing ratios.
inline double reference_mean_r(Ensemble kind) {
  switch (kind) {
    case Ensemble::goe:
      return 0.53590;
    case Ensemble::gue:
      return 0.60266;
    case Ensemble::poisson:
      return 0.38629;
  }
  return 0.0;
}

}  // namespace qmbs
