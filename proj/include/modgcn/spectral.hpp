#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "modgcn/sparse.hpp"

namespace modgcn {

struct PowerIterationOptions {
  double tol = 1e-6;
  std::size_t max_iters = 1000;
  std::uint64_t seed = 0;
};

struct PowerIterationResult {
  double lambda_max = 0.0;
  std::size_t iterations = 0;
  // false when max_iters ran out before successive Rayleigh quotients agreed
  // to within tol; lambda_max is then the last estimate.
  bool converged = false;
};

// Largest eigenvalue of a symmetric positive semi-definite matrix. A zero
// matrix yields 0.
PowerIterationResult power_iteration(const CsrMatrix& m, const PowerIterationOptions& opts = {});

// 2 L / lambda_max - I. Throws std::invalid_argument for lambda_max <= 0.
CsrMatrix rescale_laplacian(const CsrMatrix& laplacian, double lambda_max);

// T_0 .. T_K of the rescaled Laplacian via T_k = 2 L~ T_{k-1} - T_{k-2}.
struct ChebSupports {
  std::size_t order = 0;
  std::vector<CsrMatrix> supports;  // order + 1 entries
  double lambda_max = 0.0;
};

ChebSupports chebyshev_supports(const CsrMatrix& rescaled_laplacian, std::size_t order,
                                double lambda_max = 0.0);

}  // namespace modgcn
