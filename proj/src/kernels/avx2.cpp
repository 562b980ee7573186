#include "modgcn/kernels.hpp"

#if defined(MODGCN_HAVE_AVX2) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace modgcn::kernels {
namespace {

inline void axpy_impl(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

inline double dot_impl(std::size_t n, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(std::size_t n, double a, const double* x, double* y) { axpy_impl(n, a, x, y); }
double dot(std::size_t n, const double* x, const double* y) { return dot_impl(n, x, y); }

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      axpy_impl(n, aip, b + p * n, crow);
    }
  }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      axpy_impl(n, aip, brow, c + p * n);
    }
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot_impl(k, a + i * k, b + j * k);
  }
}

void spmm(std::size_t rows, const std::size_t* offsets, const Index* cols,
          const double* vals, std::size_t p, const double* b, double* c) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* crow = c + i * p;
    for (std::size_t q = 0; q < p; ++q) crow[q] = 0.0;
    for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
      axpy_impl(p, vals[e], b + std::size_t(cols[e]) * p, crow);
    }
  }
}

void spmm_t(std::size_t rows, const std::size_t* offsets, const Index* cols,
            const double* vals, std::size_t p, const double* b, double* c) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* brow = b + i * p;
    for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
      axpy_impl(p, vals[e], brow, c + std::size_t(cols[e]) * p);
    }
  }
}

constexpr KernelTable kAvx2{"avx2", axpy, dot, gemm_nn, gemm_tn, gemm_nt, spmm, spmm_t};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace modgcn::kernels

#else

namespace modgcn::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace modgcn::kernels

#endif
