#include "modgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "modgcn/kernels.hpp"

namespace modgcn {

Graph build_graph(std::size_t num_nodes, const std::vector<Edge>& edges, Dense2D features,
                  std::vector<int> labels, std::size_t num_classes) {
  if (features.rows() != num_nodes) {
    throw std::invalid_argument("build_graph: feature matrix has " +
                                std::to_string(features.rows()) + " rows, expected " +
                                std::to_string(num_nodes));
  }
  if (labels.size() != num_nodes) {
    throw std::invalid_argument("build_graph: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(num_nodes) + " nodes");
  }
  int max_label = -1;
  for (int l : labels) {
    if (l < kUnlabeled) throw std::invalid_argument("build_graph: negative class id");
    max_label = std::max(max_label, l);
  }
  if (num_classes == 0) {
    num_classes = static_cast<std::size_t>(max_label + 1);
  } else if (max_label >= static_cast<int>(num_classes)) {
    throw std::invalid_argument("build_graph: label exceeds num_classes");
  }

  std::vector<CsrMatrix::Triplet> triplets;
  triplets.reserve(2 * edges.size());
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw std::invalid_argument("build_graph: node id out of range in edge (" +
                                  std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    if (u == v) continue;
    triplets.push_back({static_cast<Index>(u), static_cast<Index>(v), 1.0});
    triplets.push_back({static_cast<Index>(v), static_cast<Index>(u), 1.0});
  }
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  triplets.erase(std::unique(triplets.begin(), triplets.end(),
                             [](const auto& a, const auto& b) {
                               return a.row == b.row && a.col == b.col;
                             }),
                 triplets.end());

  Graph g;
  g.adjacency = CsrMatrix::from_triplets(num_nodes, num_nodes, std::move(triplets));
  g.features = std::move(features);
  g.labels = std::move(labels);
  g.num_classes = num_classes;
  g.num_edges = g.adjacency.nnz() / 2;
  return g;
}

double DegreeVector::total() const {
  return std::accumulate(degrees.begin(), degrees.end(), 0.0);
}

DegreeVector compute_degrees(const Graph& g) {
  DegreeVector d;
  d.degrees.resize(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    d.degrees[i] = static_cast<double>(g.adjacency.row_nnz(i));
  return d;
}

CsrMatrix gcn_support(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i)
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.adjacency.row_nnz(i)) + 1.0);

  std::vector<std::size_t> offsets{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(g.adjacency.nnz() + n);
  vals.reserve(g.adjacency.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    bool diag_done = false;
    const auto rc = g.adjacency.row_cols(i);
    for (Index j : rc) {
      if (!diag_done && j > i) {
        cols.push_back(static_cast<Index>(i));
        vals.push_back(inv_sqrt[i] * inv_sqrt[i]);
        diag_done = true;
      }
      cols.push_back(j);
      vals.push_back(inv_sqrt[i] * inv_sqrt[j]);
    }
    if (!diag_done) {
      cols.push_back(static_cast<Index>(i));
      vals.push_back(inv_sqrt[i] * inv_sqrt[i]);
    }
    offsets.push_back(vals.size());
  }
  return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix normalized_laplacian(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = g.adjacency.row_nnz(i);
    if (d > 0) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(d));
  }
  std::vector<std::size_t> offsets{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    bool diag_done = false;
    for (Index j : g.adjacency.row_cols(i)) {
      if (!diag_done && j > i) {
        cols.push_back(static_cast<Index>(i));
        vals.push_back(1.0);
        diag_done = true;
      }
      cols.push_back(j);
      vals.push_back(-(inv_sqrt[i] * inv_sqrt[j]));
    }
    if (!diag_done) {
      cols.push_back(static_cast<Index>(i));
      vals.push_back(1.0);
    }
    offsets.push_back(vals.size());
  }
  return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
}

Dense2D modularity_apply(const Graph& g, const DegreeVector& degrees, const Dense2D& h) {
  if (g.num_edges == 0) throw std::domain_error("empty graph");
  if (h.rows() != g.num_nodes() || degrees.degrees.size() != g.num_nodes()) {
    throw std::invalid_argument("modularity_apply: H has " + std::to_string(h.rows()) +
                                " rows for a graph of " + std::to_string(g.num_nodes()) +
                                " nodes");
  }
  const auto& kern = kernels::active();
  const std::size_t p = h.cols();
  const double two_e = 2.0 * static_cast<double>(g.num_edges);

  // k^T H, accumulated row by row in node order.
  std::vector<double> kt_h(p, 0.0);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    if (degrees.degrees[i] != 0.0) kern.axpy(p, degrees.degrees[i], h.row(i).data(), kt_h.data());
  }

  Dense2D out = spmm(g.adjacency, h);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double coeff = -degrees.degrees[i] / two_e;
    if (coeff != 0.0) kern.axpy(p, coeff, kt_h.data(), out.row(i).data());
  }
  return out;
}

double modularity_trace(const Graph& g, const DegreeVector& degrees, const Dense2D& h) {
  return frobenius_dot(h, modularity_apply(g, degrees, h));
}

double modularity_score(const Graph& g, const DegreeVector& degrees, const Dense2D& h) {
  return modularity_trace(g, degrees, h) / (2.0 * static_cast<double>(g.num_edges));
}

}  // namespace modgcn
