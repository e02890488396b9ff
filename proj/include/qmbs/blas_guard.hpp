#pragma once

// Startup check for the BLAS backend. OpenBLAS 0.3.20 built with DYNAMIC_ARCH
// selects its Cooperlake kernels on some AVX-512 CPUs and dgemm then returns
// garbage. The kernel can only be chosen through OPENBLAS_CORETYPE before the
// library loads, so a failing process re-executes itself with it set.

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "qmbs/error.hpp"

extern "C" void dgemm_(const char* transa, const char* transb, const int* m, const int* n, const int* k,
                       const double* alpha, const double* a, const int* lda, const double* b, const int* ldb,
                       const double* beta, double* c, const int* ldc);

namespace qmbs {

/// (256 x 64)(64 x 256) dgemm against a naive loop. The faulty kernels only
/// show up once m, n pass about 150.
inline bool blas_dgemm_ok() {
  const int n = 256, kk = 64;
  std::vector<double> a(n * kk), b(kk * n), c(n * n, 0.0);
  for (int i = 0; i < n * kk; ++i) {
    a[static_cast<std::size_t>(i)] = std::sin(0.37 * i + 0.1);
    b[static_cast<std::size_t>(i)] = std::cos(0.11 * i);
  }
  const char no = 'N';
  const double one = 1.0, zero = 0.0;
  dgemm_(&no, &no, &n, &n, &kk, &one, a.data(), &n, b.data(), &kk, &zero, c.data(), &n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double ref = 0.0;
      for (int k = 0; k < kk; ++k) ref += a[static_cast<std::size_t>(i + k * n)] * b[static_cast<std::size_t>(k + j * kk)];
      if (std::abs(c[static_cast<std::size_t>(i + j * n)] - ref) > 1e-10 * (1.0 + std::abs(ref))) return false;
    }
  return true;
}

inline bool blas_checked_ok() {
  static const bool ok = blas_dgemm_ok();
  return ok;
}

inline constexpr const char* kBlasHelp =
    "BLAS dgemm self-test failed; set OPENBLAS_CORETYPE to a working kernel (for example Haswell)";

/// Call first thing in main. Returns only with a working BLAS.
inline void ensure_working_blas(char** argv) {
  if (blas_checked_ok()) return;
  if (std::getenv("OPENBLAS_CORETYPE") == nullptr) {
    ::setenv("OPENBLAS_CORETYPE", "Haswell", 1);
    ::execv("/proc/self/exe", argv);
  }
  throw Error(kBlasHelp);
}

}  // namespace qmbs
