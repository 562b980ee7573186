#include "modgcn/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "modgcn/rng.hpp"

namespace modgcn {
namespace {

double norm2(const Dense2D& v) { return frobenius_norm(v); }

}  // namespace

PowerIterationResult power_iteration(const CsrMatrix& m, const PowerIterationOptions& opts) {
  if (m.n_rows() != m.n_cols()) throw std::invalid_argument("power_iteration: matrix not square");
  PowerIterationResult result;
  const std::size_t n = m.n_rows();
  if (n == 0 || m.nnz() == 0) {
    result.converged = true;
    return result;
  }

  Rng rng(opts.seed);
  Dense2D v(n, 1);
  for (double& x : v.values()) x = rng.uniform(0.5, 1.5);
  double nv = norm2(v);
  for (double& x : v.values()) x /= nv;

  double previous = 0.0;
  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    Dense2D w = spmm(m, v);
    const double rayleigh = frobenius_dot(v, w);
    result.lambda_max = rayleigh;
    result.iterations = it;
    const double nw = norm2(w);
    if (nw == 0.0) {
      // v landed in the null space; the start vector had no component along
      // any nonzero eigenvector.
      result.converged = true;
      return result;
    }
    if (it > 1 && std::abs(rayleigh - previous) < opts.tol) {
      result.converged = true;
      return result;
    }
    previous = rayleigh;
    for (std::size_t i = 0; i < n; ++i) v.values()[i] = w.values()[i] / nw;
  }
  return result;
}

CsrMatrix rescale_laplacian(const CsrMatrix& laplacian, double lambda_max) {
  if (!(lambda_max > 0.0)) {
    throw std::invalid_argument("rescale_laplacian: lambda_max must be positive");
  }
  return linear_combination(2.0 / lambda_max, laplacian, -1.0,
                            CsrMatrix::identity(laplacian.n_rows()));
}

ChebSupports chebyshev_supports(const CsrMatrix& rescaled_laplacian, std::size_t order,
                                double lambda_max) {
  ChebSupports out;
  out.order = order;
  out.lambda_max = lambda_max;
  out.supports.reserve(order + 1);
  out.supports.push_back(CsrMatrix::identity(rescaled_laplacian.n_rows()));
  if (order >= 1) out.supports.push_back(rescaled_laplacian);
  const bool symmetric = order >= 2 && is_symmetric(rescaled_laplacian);
  for (std::size_t k = 2; k <= order; ++k) {
    const CsrMatrix product = spgemm(rescaled_laplacian, out.supports[k - 1]);
    CsrMatrix next = linear_combination(2.0, product, -1.0, out.supports[k - 2]);
    // L~ and T_{k-1} commute, so the product is symmetric in exact arithmetic;
    // averaging with the transpose removes the rounding asymmetry.
    if (symmetric) next = linear_combination(0.5, next, 0.5, transpose(next));
    out.supports.push_back(std::move(next));
  }
  return out;
}

}  // namespace modgcn
