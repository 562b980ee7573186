#pragma once

#include <cstddef>
#include <vector>

#include "modgcn/dense.hpp"
#include "modgcn/graph.hpp"
#include "modgcn/model.hpp"

namespace modgcn {

// Labeled node ids and their one-hot targets. Rows of onehot outside
// train_ids are zero and never read.
struct LabelMask {
  std::vector<std::size_t> train_ids;
  Dense2D onehot;  // n x num_classes
};

// Throws std::invalid_argument for out-of-range or unlabeled ids.
LabelMask make_label_mask(const Graph& g, const std::vector<std::size_t>& train_ids);

inline constexpr double kLogClamp = 1e-12;

struct CrossEntropyResult {
  double loss = 0.0;
  Dense2D grad_logits;  // Z - Y on labeled rows, 0 elsewhere
};

// -sum_{l in train} sum_c Y_lc ln Z_lc (summed, not averaged), with the
// softmax backward fused into the gradient.
CrossEntropyResult masked_cross_entropy(const Dense2D& z, const LabelMask& mask);

struct ModularityLossResult {
  double loss = 0.0;  // -tr(H^T B H) / 2e
  Dense2D grad_h;     // -(2 / 2e) B H
};

ModularityLossResult modularity_loss(const Graph& g, const DegreeVector& degrees, const Dense2D& h);

struct LossReport {
  double total = 0.0;
  double supervised = 0.0;
  double modularity_term = 0.0;  // tr(H^T B H) / 2e, i.e. the (soft) modularity Q
  double alpha = 0.0;
};

struct LossAndGradients {
  LossReport report;
  std::vector<Dense2D> grads;  // aligned with Model::parameters()
  ForwardPass forward;
};

// total = (1 - a) CE(Z) - a Q(Z) with Z the output softmax. Both terms reach
// every parameter through the shared encoder.
LossAndGradients combined_loss_output_reg(const Model& model, const GraphContext& ctx,
                                          const LabelMask& mask, double alpha,
                                          Rng* dropout_rng = nullptr);

// total = (1 - a) CE(H_out) - a Q(H_aux). conv2 only sees the supervised
// signal, the aux head only the modularity signal, and conv1 the sum of both.
LossAndGradients combined_loss_aux(const Model& model, const GraphContext& ctx,
                                   const LabelMask& mask, double alpha,
                                   Rng* dropout_rng = nullptr);

// Dispatches on the model variant using spec().effective_alpha().
LossAndGradients loss_and_gradients(const Model& model, const GraphContext& ctx,
                                    const LabelMask& mask, Rng* dropout_rng = nullptr);

// Forward-only loss (no dropout) for the given alpha; the scalar that
// loss_and_gradients differentiates.
LossReport evaluate_loss(const Model& model, const GraphContext& ctx, const LabelMask& mask,
                         double alpha);

}  // namespace modgcn
