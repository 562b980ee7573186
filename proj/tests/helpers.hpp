#pragma once

// Shared fixtures and naive dense oracles for the unit tests.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "modgcn/dense.hpp"
#include "modgcn/graph.hpp"
#include "modgcn/rng.hpp"

namespace testing {

using namespace modgcn;

inline Dense2D naive_matmul(const Dense2D& a, const Dense2D& b) {
  Dense2D c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline Dense2D random_dense(std::size_t r, std::size_t c, Rng& rng, double zero_prob = 0.0) {
  Dense2D m(r, c);
  for (double& v : m.values()) v = rng.uniform() < zero_prob ? 0.0 : rng.uniform(-1.0, 1.0);
  return m;
}

// Erdos-Renyi graph with random features and labels.
inline Graph random_graph(std::size_t n, double p, Rng& rng, std::size_t classes = 3, std::size_t features = 4) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.emplace_back(i, j);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i < classes ? i : rng.below(classes));
  return build_graph(n, edges, random_dense(n, features, rng), labels, classes);
}

inline Graph edge_graph(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<int> labels(n, 0);
  return build_graph(n, edges, Dense2D(n, 1, 1.0), labels, 1);
}

// Dense B = A - k k^T / 2e.
inline Dense2D dense_modularity_matrix(const Graph& g) {
  const Dense2D a = g.adjacency.to_dense();
  const std::size_t n = a.rows();
  std::vector<double> k(n, 0.0);
  double two_e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i] += a(i, j);
    two_e += k[i];
  }
  Dense2D b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = a(i, j) - k[i] * k[j] / two_e;
  return b;
}

inline double max_abs_entry_diff(const Dense2D& a, const Dense2D& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("modgcn_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
