#include "modgcn/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace modgcn {

LabelMask make_label_mask(const Graph& g, const std::vector<std::size_t>& train_ids) {
  LabelMask mask;
  mask.train_ids = train_ids;
  mask.onehot = Dense2D(g.num_nodes(), g.num_classes);
  for (std::size_t id : train_ids) {
    if (id >= g.num_nodes()) {
      throw std::invalid_argument("make_label_mask: node " + std::to_string(id) + " out of range");
    }
    const int label = g.labels[id];
    if (label == kUnlabeled) {
      throw std::invalid_argument("make_label_mask: node " + std::to_string(id) + " is unlabeled");
    }
    mask.onehot(id, static_cast<std::size_t>(label)) = 1.0;
  }
  return mask;
}

CrossEntropyResult masked_cross_entropy(const Dense2D& z, const LabelMask& mask) {
  if (mask.train_ids.empty()) throw std::invalid_argument("masked_cross_entropy: empty train set");
  require_same_shape(z, mask.onehot, "masked_cross_entropy");
  CrossEntropyResult r;
  r.grad_logits = Dense2D(z.rows(), z.cols());
  for (std::size_t id : mask.train_ids) {
    for (std::size_t c = 0; c < z.cols(); ++c) {
      const double y = mask.onehot(id, c);
      if (y != 0.0) r.loss -= y * std::log(std::max(z(id, c), kLogClamp));
      r.grad_logits(id, c) = z(id, c) - y;
    }
  }
  return r;
}

ModularityLossResult modularity_loss(const Graph& g, const DegreeVector& degrees, const Dense2D& h) {
  if (h.cols() == 0) throw std::invalid_argument("modularity_loss: H needs at least one column");
  const double two_e = 2.0 * static_cast<double>(g.num_edges);
  Dense2D bh = modularity_apply(g, degrees, h);
  ModularityLossResult r;
  r.loss = -frobenius_dot(h, bh) / two_e;
  r.grad_h = scaled(bh, -2.0 / two_e);
  return r;
}

namespace {

double weighted_total(double alpha, double supervised, double q) {
  return (1.0 - alpha) * supervised - alpha * q;
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
}

// Modularity Q of h, or 0 on an edgeless graph (where it is undefined) as
// long as it does not enter the loss.
double report_q(const GraphContext& ctx, const Dense2D& h, double alpha) {
  if (ctx.graph().num_edges == 0) {
    if (alpha > 0.0) throw std::domain_error("empty graph");
    return 0.0;
  }
  return modularity_score(ctx.graph(), ctx.degrees(), h);
}

void append_conv_grads(std::vector<Dense2D>& out, ConvGradients&& g) {
  for (auto& w : g.grad_weights) out.push_back(std::move(w));
  out.push_back(std::move(g.grad_bias));
}

}  // namespace

LossAndGradients combined_loss_output_reg(const Model& model, const GraphContext& ctx,
                                          const LabelMask& mask, double alpha,
                                          Rng* dropout_rng) {
  check_alpha(alpha);
  if (model.has_aux()) {
    throw std::invalid_argument("combined_loss_output_reg: model has an auxiliary branch");
  }
  LossAndGradients r;
  r.forward = model.forward(ctx.features(), dropout_rng);
  const Dense2D& z = r.forward.probabilities();

  auto ce = masked_cross_entropy(z, mask);
  r.report.alpha = alpha;
  r.report.supervised = ce.loss;
  r.report.modularity_term = report_q(ctx, z, alpha);
  r.report.total = weighted_total(alpha, ce.loss, r.report.modularity_term);

  Dense2D delta_out(z.rows(), z.cols());
  if (alpha < 1.0) add_scaled(delta_out, ce.grad_logits, 1.0 - alpha);
  if (alpha > 0.0) {
    auto mod = modularity_loss(ctx.graph(), ctx.degrees(), z);
    add_scaled(delta_out, softmax_rows_backward(z, mod.grad_h), alpha);
  }

  auto g2 = gconv_backward_from_pre(model.conv2(), r.forward.output, delta_out, true);
  Dense2D grad_hidden = std::move(g2.grad_input);
  if (!r.forward.hidden_mask.empty()) grad_hidden = hadamard(grad_hidden, r.forward.hidden_mask);
  auto g1 = gconv_backward(model.conv1(), r.forward.hidden, grad_hidden, false);
  append_conv_grads(r.grads, std::move(g1));
  append_conv_grads(r.grads, std::move(g2));
  return r;
}

LossAndGradients combined_loss_aux(const Model& model, const GraphContext& ctx,
                                   const LabelMask& mask, double alpha, Rng* dropout_rng) {
  check_alpha(alpha);
  if (!model.has_aux()) throw std::invalid_argument("combined_loss_aux: model has no auxiliary branch");
  LossAndGradients r;
  r.forward = model.forward(ctx.features(), dropout_rng);
  const Dense2D& z = r.forward.probabilities();
  const Dense2D& h_aux = r.forward.aux->output;

  auto ce = masked_cross_entropy(z, mask);
  r.report.alpha = alpha;
  r.report.supervised = ce.loss;
  r.report.modularity_term = report_q(ctx, h_aux, alpha);
  r.report.total = weighted_total(alpha, ce.loss, r.report.modularity_term);

  // Supervised path: conv2 is updated by (1 - alpha) CE only.
  Dense2D delta_out(z.rows(), z.cols());
  if (alpha < 1.0) add_scaled(delta_out, ce.grad_logits, 1.0 - alpha);
  auto g2 = gconv_backward_from_pre(model.conv2(), r.forward.output, delta_out, true);
  Dense2D grad_hidden = std::move(g2.grad_input);
  if (!r.forward.hidden_mask.empty()) grad_hidden = hadamard(grad_hidden, r.forward.hidden_mask);

  // Modularity path: the aux head is updated by alpha * (-Q) only.
  const DenseLayer& aux = *model.aux();
  DenseGradients ga{Dense2D(), Dense2D(aux.weight.rows(), aux.weight.cols()),
                    Dense2D(1, aux.out_dim())};
  if (alpha > 0.0) {
    auto mod = modularity_loss(ctx.graph(), ctx.degrees(), h_aux);
    Dense2D delta_aux = scaled(softmax_rows_backward(h_aux, mod.grad_h), alpha);
    ga = dense_backward_from_pre(aux, *r.forward.aux, delta_aux, true);
    // Shared layers before the branch receive both signals.
    add_scaled(grad_hidden, ga.grad_input);
  }

  auto g1 = gconv_backward(model.conv1(), r.forward.hidden, grad_hidden, false);
  append_conv_grads(r.grads, std::move(g1));
  append_conv_grads(r.grads, std::move(g2));
  r.grads.push_back(std::move(ga.grad_weight));
  r.grads.push_back(std::move(ga.grad_bias));
  return r;
}

LossAndGradients loss_and_gradients(const Model& model, const GraphContext& ctx,
                                    const LabelMask& mask, Rng* dropout_rng) {
  const double alpha = model.spec().effective_alpha();
  if (model.spec().variant == Variant::aux) return combined_loss_aux(model, ctx, mask, alpha, dropout_rng);
  return combined_loss_output_reg(model, ctx, mask, alpha, dropout_rng);
}

LossReport evaluate_loss(const Model& model, const GraphContext& ctx, const LabelMask& mask,
                         double alpha) {
  check_alpha(alpha);
  const ForwardPass fp = model.forward(ctx.features(), nullptr);
  LossReport r;
  r.alpha = alpha;
  r.supervised = masked_cross_entropy(fp.probabilities(), mask).loss;
  const Dense2D& h = model.has_aux() ? fp.aux->output : fp.probabilities();
  r.modularity_term = report_q(ctx, h, alpha);
  r.total = weighted_total(alpha, r.supervised, r.modularity_term);
  return r;
}

}  // namespace modgcn
