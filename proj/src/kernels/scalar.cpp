#include "modgcn/kernels.hpp"

namespace modgcn::kernels {
namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      axpy(n, aip, b + p * n, crow);
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
      axpy(n, aip, brow, c + p * n);
    }
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(k, a + i * k, b + j * k);
  }
}

void spmm(std::size_t rows, const std::size_t* offsets, const Index* cols,
          const double* vals, std::size_t p, const double* b, double* c) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* crow = c + i * p;
    for (std::size_t q = 0; q < p; ++q) crow[q] = 0.0;
    for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
      axpy(p, vals[e], b + std::size_t(cols[e]) * p, crow);
    }
  }
}

void spmm_t(std::size_t rows, const std::size_t* offsets, const Index* cols,
            const double* vals, std::size_t p, const double* b, double* c) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* brow = b + i * p;
    for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
      axpy(p, vals[e], brow, c + std::size_t(cols[e]) * p);
    }
  }
}

constexpr KernelTable kScalar{"scalar", axpy, dot, gemm_nn, gemm_tn, gemm_nt, spmm, spmm_t};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace modgcn::kernels
