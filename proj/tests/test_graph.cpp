#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "helpers.hpp"
#include "modgcn/spectral.hpp"

using namespace modgcn;
using testing::edge_graph;
using testing::max_abs_entry_diff;

TEST_CASE("build_graph symmetrizes, deduplicates and drops self-loops") {
  const Graph g = edge_graph(3, {{0, 1}, {1, 0}, {1, 2}});
  CHECK(g.adjacency.nnz() == 4);
  CHECK(g.num_edges == 2);
  CHECK(is_symmetric(g.adjacency));

  const Graph loops = edge_graph(2, {{0, 0}, {0, 1}});
  CHECK(loops.num_edges == 1);
  CHECK(loops.adjacency.at(0, 0) == 0.0);
}

TEST_CASE("build_graph rejects inconsistent input") {
  CHECK_THROWS_AS(edge_graph(2, {{0, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(2, {}, Dense2D(3, 1), {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(2, {}, Dense2D(2, 1), {0}), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(2, {}, Dense2D(2, 1), {0, 5}, 2), std::invalid_argument);
}

TEST_CASE("gcn_support hand-evaluated cases") {
  const CsrMatrix iso = gcn_support(edge_graph(1, {}));
  CHECK(iso.to_dense() == Dense2D::from_rows({{1.0}}));

  const Dense2D k2 = gcn_support(edge_graph(2, {{0, 1}})).to_dense();
  CHECK(max_abs_entry_diff(k2, Dense2D::from_rows({{0.5, 0.5}, {0.5, 0.5}})) < 1e-15);

  const CsrMatrix path = gcn_support(edge_graph(3, {{0, 1}, {1, 2}}));
  CHECK(path.at(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(path.at(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(path.at(0, 2) == 0.0);
}

TEST_CASE("normalized_laplacian hand-evaluated cases") {
  CHECK(max_abs_entry_diff(normalized_laplacian(edge_graph(2, {{0, 1}})).to_dense(),
                           Dense2D::from_rows({{1, -1}, {-1, 1}})) < 1e-15);
  CHECK(normalized_laplacian(edge_graph(1, {})).to_dense() == Dense2D::from_rows({{1.0}}));
  const Dense2D k3 = normalized_laplacian(edge_graph(3, {{0, 1}, {1, 2}, {0, 2}})).to_dense();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(k3(i, j) == doctest::Approx(i == j ? 1.0 : -0.5).epsilon(1e-15));
  // Isolated node next to an edge: its row is the unit vector.
  const Dense2D mixed = normalized_laplacian(edge_graph(3, {{0, 1}})).to_dense();
  CHECK(mixed(2, 2) == 1.0);
  CHECK(mixed(2, 0) == 0.0);
}

TEST_CASE("supports are exactly symmetric with bounded spectrum") {
  Rng rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    const Graph g = testing::random_graph(3 + rng.below(30), 0.2, rng);
    const CsrMatrix a_hat = gcn_support(g);
    const CsrMatrix lap = normalized_laplacian(g);
    CHECK(is_symmetric(a_hat));
    CHECK(is_symmetric(lap));
    CHECK(power_iteration(lap).lambda_max <= 2.0 + 1e-6);
    // |lambda(A_hat)| <= 1: I - A_hat is PSD with spectrum in [0, 2].
    const CsrMatrix shifted = linear_combination(1.0, CsrMatrix::identity(g.num_nodes()), -1.0, a_hat);
    CHECK(power_iteration(shifted).lambda_max <= 2.0 + 1e-6);
  }
}

TEST_CASE("two disjoint edges: trace 2 and Q = 0.5") {
  const Graph g = edge_graph(4, {{0, 1}, {2, 3}});
  const DegreeVector deg = compute_degrees(g);
  CHECK(deg.total() == 4.0);
  const Dense2D h = Dense2D::from_rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
  CHECK(modularity_trace(g, deg, h) == 2.0);
  CHECK(modularity_score(g, deg, h) == 0.5);
}

TEST_CASE("modularity_apply matches the dense modularity matrix") {
  Rng rng(22);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng.below(49);
    Graph g = testing::random_graph(n, rng.uniform(0.05, 0.5), rng);
    if (g.num_edges == 0) g = testing::edge_graph(n, {{0, 1}});
    const DegreeVector deg = compute_degrees(g);
    const Dense2D h = testing::random_dense(n, 1 + rng.below(5), rng);
    const Dense2D b = testing::dense_modularity_matrix(g);
    const Dense2D bh = testing::naive_matmul(b, h);
    CHECK(max_abs_entry_diff(modularity_apply(g, deg, h), bh) < 1e-12);
    const double trace = frobenius_dot(h, bh);
    CHECK(std::abs(modularity_trace(g, deg, h) - trace) < 1e-12);
    CHECK(std::abs(modularity_score(g, deg, h) - trace / deg.total()) < 1e-12);
    const Dense2D ones(n, 1, 1.0);
    CHECK(max_abs_entry_diff(modularity_apply(g, deg, ones), Dense2D(n, 1)) < 1e-12);
    CHECK(std::abs(modularity_score(g, deg, ones)) < 1e-12);
  }
}

TEST_CASE("hard partitions score within [-1, 1]") {
  Rng rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 4 + rng.below(20);
    Graph g = testing::random_graph(n, 0.3, rng);
    if (g.num_edges == 0) continue;
    const std::size_t k = 1 + rng.below(4);
    Dense2D h(n, k);
    for (std::size_t i = 0; i < n; ++i) h(i, rng.below(k)) = 1.0;
    const double q = modularity_score(g, compute_degrees(g), h);
    CHECK(q >= -1.0);
    CHECK(q <= 1.0);
  }
}

TEST_CASE("modularity on an edgeless graph is an error") {
  const Graph g = edge_graph(3, {});
  CHECK_THROWS_AS(modularity_apply(g, compute_degrees(g), Dense2D(3, 1, 1.0)), std::domain_error);
}
