#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "modgcn/dense.hpp"
#include "modgcn/sparse.hpp"

namespace modgcn {

inline constexpr int kUnlabeled = -1;

// Undirected attributed graph. The adjacency is binary, symmetric and has an
// empty diagonal; self-loops only ever appear inside derived supports.
struct Graph {
  CsrMatrix adjacency;
  Dense2D features;         // n x C
  std::vector<int> labels;  // class id in [0, num_classes) or kUnlabeled
  std::size_t num_classes = 0;
  std::size_t num_edges = 0;  // undirected edge count e = nnz(A) / 2
  std::vector<std::string> node_names;  // original ids when loaded from files, else empty
  std::vector<std::string> class_names;  // empty when classes are anonymous

  std::size_t num_nodes() const { return labels.size(); }
  std::size_t num_features() const { return features.cols(); }

  friend bool operator==(const Graph&, const Graph&) = default;
};

using Edge = std::pair<std::size_t, std::size_t>;

// Symmetrizes and deduplicates the edge list and drops self-loops.
// num_classes == 0 infers max(label) + 1.
Graph build_graph(std::size_t num_nodes, const std::vector<Edge>& edges, Dense2D features,
                  std::vector<int> labels, std::size_t num_classes = 0);

// Unweighted degrees k_i = nnz of adjacency row i.
struct DegreeVector {
  std::vector<double> degrees;
  double total() const;  // 2e
};
DegreeVector compute_degrees(const Graph& g);

// D~^{-1/2} (A + I) D~^{-1/2} with d~ = degree + 1.
CsrMatrix gcn_support(const Graph& g);

// I - D^{-1/2} A D^{-1/2}. Zero-degree nodes use D^{-1/2} = 0 and keep a
// unit diagonal.
CsrMatrix normalized_laplacian(const Graph& g);

// B * H with B = A - k k^T / 2e, applied as a sparse product plus a rank-one
// correction; B itself is never formed. Throws std::domain_error on a graph
// without edges.
Dense2D modularity_apply(const Graph& g, const DegreeVector& degrees, const Dense2D& h);

// tr(H^T B H) (unnormalized).
double modularity_trace(const Graph& g, const DegreeVector& degrees, const Dense2D& h);
// tr(H^T B H) / 2e.
double modularity_score(const Graph& g, const DegreeVector& degrees, const Dense2D& h);

}  // namespace modgcn
