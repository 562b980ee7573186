#pragma once

// Central finite-difference verification of every hand-written backward pass.
// The numeric side only ever calls forward code, so it is independent of the
// analytic gradients it checks.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "modgcn/dense.hpp"
#include "modgcn/graph.hpp"

namespace modgcn {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-5;
  std::size_t instances = 20;
  std::size_t max_nodes = 10;
  std::uint64_t seed = 7;
};

struct GradCheckEntry {
  std::string name;  // e.g. "instance 3 / ChebNet-aux / conv1.W2"
  double rel_error = 0.0;
  double analytic_norm = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  std::size_t instances = 0;
  bool all_passed() const;
  double worst() const;
};

// ||a - n|| / max(||a||, ||n||); 0 when both are (numerically) zero.
double relative_error(const Dense2D& analytic, const Dense2D& numeric);

// d f / d param by central differences, perturbing param in place.
Dense2D numeric_gradient(const std::function<double()>& f, Dense2D& param, double step);

// Random connected attributed graph with n nodes, k classes, c features.
Graph random_attributed_graph(std::size_t n, std::size_t classes, std::size_t features,
                              double edge_prob, std::uint64_t seed);

// Layers (graph conv with 1 and 3 supports, dense, each activation),
// both loss terms and all model variants on `instances` random graphs.
GradCheckReport run_gradient_suite(const GradCheckOptions& opts = {});

}  // namespace modgcn
