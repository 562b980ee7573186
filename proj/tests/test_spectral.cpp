#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "helpers.hpp"
#include "modgcn/spectral.hpp"

using namespace modgcn;
using testing::edge_graph;
using testing::max_abs_entry_diff;
using testing::naive_matmul;

namespace {

Dense2D poly(const Dense2D& l, std::size_t k) {
  // Closed forms of T_0..T_4 with the matrix identity.
  const std::size_t n = l.rows();
  const Dense2D i = Dense2D::identity(n);
  const Dense2D l2 = naive_matmul(l, l);
  const Dense2D l3 = naive_matmul(l2, l);
  const Dense2D l4 = naive_matmul(l3, l);
  Dense2D out(n, n);
  switch (k) {
    case 0: return i;
    case 1: return l;
    case 2: add_scaled(out, l2, 2.0); add_scaled(out, i, -1.0); return out;
    case 3: add_scaled(out, l3, 4.0); add_scaled(out, l, -3.0); return out;
    case 4: add_scaled(out, l4, 8.0); add_scaled(out, l2, -8.0); add_scaled(out, i, 1.0); return out;
  }
  throw std::logic_error("order");
}

}  // namespace

TEST_CASE("power iteration on analytic spectra") {
  const CsrMatrix k2 = normalized_laplacian(edge_graph(2, {{0, 1}}));
  const auto r2 = power_iteration(k2);
  CHECK(std::abs(r2.lambda_max - 2.0) <= 1e-6);
  CHECK(r2.converged);
  const CsrMatrix k3 = normalized_laplacian(edge_graph(3, {{0, 1}, {1, 2}, {0, 2}}));
  CHECK(std::abs(power_iteration(k3).lambda_max - 1.5) <= 1e-6);
  CHECK(power_iteration(CsrMatrix::identity(5)).lambda_max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(power_iteration(CsrMatrix(3, 3, {0, 0, 0, 0}, {}, {})).lambda_max == 0.0);
}

TEST_CASE("power iteration is deterministic and seed-stable") {
  Rng rng(31);
  const Graph g = testing::random_graph(25, 0.2, rng);
  const CsrMatrix l = normalized_laplacian(g);
  CHECK(power_iteration(l).lambda_max == power_iteration(l).lambda_max);
  PowerIterationOptions other;
  other.seed = 99;
  CHECK(std::abs(power_iteration(l).lambda_max - power_iteration(l, other).lambda_max) < 1e-4);
}

TEST_CASE("rescale_laplacian") {
  const CsrMatrix k2 = normalized_laplacian(edge_graph(2, {{0, 1}}));
  CHECK(max_abs_entry_diff(rescale_laplacian(k2, 2.0).to_dense(), Dense2D::from_rows({{0, -1}, {-1, 0}})) < 1e-15);
  CHECK(rescale_laplacian(CsrMatrix::identity(3), 1.0) == CsrMatrix::identity(3));
  CHECK_THROWS_AS(rescale_laplacian(k2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rescale_laplacian(k2, -1.0), std::invalid_argument);
}

TEST_CASE("chebyshev supports: small cases") {
  const CsrMatrix lt = rescale_laplacian(normalized_laplacian(edge_graph(2, {{0, 1}})), 2.0);
  const ChebSupports k0 = chebyshev_supports(lt, 0);
  REQUIRE(k0.supports.size() == 1);
  CHECK(k0.supports[0] == CsrMatrix::identity(2));
  const ChebSupports k2 = chebyshev_supports(lt, 2);
  REQUIRE(k2.supports.size() == 3);
  CHECK(k2.supports[1] == lt);
  CHECK(max_abs_entry_diff(k2.supports[2].to_dense(), Dense2D::identity(2)) < 1e-15);
}

TEST_CASE("chebyshev recursion matches closed forms to 1e-10") {
  Rng rng(32);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 2 + rng.below(19);
    const Graph g = testing::random_graph(n, rng.uniform(0.1, 0.6), rng);
    const CsrMatrix lap = normalized_laplacian(g);
    double lambda = power_iteration(lap).lambda_max;
    if (lambda <= 0.0) lambda = 1.0;
    const CsrMatrix lt = rescale_laplacian(lap, lambda);
    const std::size_t order = rng.below(5);
    const ChebSupports cs = chebyshev_supports(lt, order, lambda);
    REQUIRE(cs.supports.size() == order + 1);
    CHECK(cs.order == order);
    const Dense2D dl = lt.to_dense();
    for (std::size_t k = 0; k <= order; ++k) {
      CAPTURE(k);
      CHECK(max_abs_entry_diff(cs.supports[k].to_dense(), poly(dl, k)) <= 1e-10);
      CHECK(is_symmetric(cs.supports[k]));
    }
  }
}

TEST_CASE("T_4 on a random 10-node graph") {
  Rng rng(33);
  const Graph g = testing::random_graph(10, 0.35, rng);
  const CsrMatrix lap = normalized_laplacian(g);
  const CsrMatrix lt = rescale_laplacian(lap, power_iteration(lap).lambda_max);
  CHECK(max_abs_entry_diff(chebyshev_supports(lt, 4).supports[4].to_dense(), poly(lt.to_dense(), 4)) <= 1e-10);
}
