#pragma once

// Dense/sparse inner-loop kernels with a scalar reference implementation and
// an AVX2+FMA variant chosen at runtime. All matrices are row-major doubles.
//
// Every backend is deterministic for a fixed input: reduction order depends
// only on the shapes, never on threading or alignment. Backends are NOT
// bitwise identical to each other (FMA contraction and lane-wise partial sums
// round differently); equivalence is tested to a relative 1e-12.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace modgcn::kernels {

using Index = std::uint32_t;

enum class Backend { scalar, avx2 };

struct KernelTable {
  const char* name;

  // y += a * x
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);

  // C[m x n] += A[m x k] * B[k x n]. Zero entries of A are skipped, so the
  // cost scales with nnz(A) (bag-of-words features are ~1% dense).
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  // C[k x n] += A^T * B with A[m x k], B[m x n]. Zeros of A skipped.
  void (*gemm_tn)(std::size_t m, std::size_t k, std::size_t n, const double* a,
                  const double* b, double* c);
  // C[m x n] += A[m x k] * B^T with B[n x k].
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);

  // C[rows x p] = S * B, S in CSR form.
  void (*spmm)(std::size_t rows, const std::size_t* offsets, const Index* cols,
               const double* vals, std::size_t p, const double* b, double* c);
  // C[ncols x p] += S^T * B, B[rows x p]. Scatter form; C must be zeroed by
  // the caller when a plain product is wanted.
  void (*spmm_t)(std::size_t rows, const std::size_t* offsets, const Index* cols,
                 const double* vals, std::size_t p, const double* b, double* c);
};

const KernelTable& scalar_table();
// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table();

bool available(Backend b);
const KernelTable& table(Backend b);

// The table used by every library routine. Initialized on first use from
// MODGCN_KERNELS=scalar|avx2 if set, else the best backend the CPU supports.
const KernelTable& active();
Backend current_backend();
// Throws std::invalid_argument if the backend is not available.
void set_backend(Backend b);

Backend parse_backend(std::string_view name);
std::string_view backend_name(Backend b);

// RAII switch used by equivalence tests.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) : previous_(current_backend()) { set_backend(b); }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace modgcn::kernels
