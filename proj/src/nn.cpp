#include "modgcn/nn.hpp"

#include <algorithm>
#include <cmath>

#include "modgcn/kernels.hpp"

namespace modgcn {

Dense2D softmax_rows(const Dense2D& logits) {
  Dense2D out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto in = logits.row(i);
    auto o = out.row(i);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (double& x : o) x /= sum;
  }
  return out;
}

Dense2D softmax_rows_backward(const Dense2D& z, const Dense2D& grad_z) {
  require_same_shape(z, grad_z, "softmax_rows_backward");
  Dense2D out(z.rows(), z.cols());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const double inner = k.dot(z.cols(), z.row(i).data(), grad_z.row(i).data());
    for (std::size_t j = 0; j < z.cols(); ++j) out(i, j) = z(i, j) * (grad_z(i, j) - inner);
  }
  return out;
}

Dense2D apply_activation(Activation act, const Dense2D& pre) {
  switch (act) {
    case Activation::identity:
      return pre;
    case Activation::relu: {
      Dense2D out = pre;
      for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
      return out;
    }
    case Activation::softmax_rows:
      return softmax_rows(pre);
  }
  throw std::invalid_argument("unknown activation");
}

Dense2D activation_backward(Activation act, const Dense2D& pre, const Dense2D& out,
                            const Dense2D& grad_out) {
  require_same_shape(pre, grad_out, "activation_backward");
  switch (act) {
    case Activation::identity:
      return grad_out;
    case Activation::relu: {
      Dense2D delta = grad_out;
      for (std::size_t i = 0; i < delta.size(); ++i)
        if (!(pre.values()[i] > 0.0)) delta.values()[i] = 0.0;
      return delta;
    }
    case Activation::softmax_rows:
      return softmax_rows_backward(out, grad_out);
  }
  throw std::invalid_argument("unknown activation");
}

Dense2D glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Dense2D w(rows, cols);
  for (double& v : w.values()) v = rng.uniform(-a, a);
  return w;
}

Dense2D glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return glorot_init(rows, cols, rng);
}

void GraphConvLayer::validate() const {
  if (supports.empty() || supports.size() != weights.size()) {
    throw std::invalid_argument("GraphConvLayer: need one weight matrix per support");
  }
  const std::size_t n = supports.front()->n_rows();
  for (const auto& s : supports) {
    if (!s || s->n_rows() != n || s->n_cols() != n) {
      throw std::invalid_argument("GraphConvLayer: supports must be square and equally sized");
    }
  }
  for (const auto& w : weights) {
    if (!w.same_shape(weights.front())) {
      throw std::invalid_argument("GraphConvLayer: weight shapes differ");
    }
  }
  if (bias.rows() != 1 || bias.cols() != weights.front().cols()) {
    throw std::invalid_argument("GraphConvLayer: bias must be 1 x out_dim");
  }
}

GraphConvLayer make_graph_conv(std::vector<std::shared_ptr<const CsrMatrix>> supports,
                               std::size_t in_dim, std::size_t out_dim, Activation act,
                               Rng& rng) {
  GraphConvLayer layer;
  layer.supports = std::move(supports);
  for (std::size_t s = 0; s < layer.supports.size(); ++s)
    layer.weights.push_back(glorot_init(in_dim, out_dim, rng));
  layer.bias = Dense2D(1, out_dim);
  layer.activation = act;
  layer.validate();
  return layer;
}

LayerCache gconv_forward(const GraphConvLayer& layer, std::shared_ptr<const Dense2D> input) {
  layer.validate();
  const Dense2D& h = *input;
  if (h.cols() != layer.in_dim() || h.rows() != layer.supports.front()->n_cols()) {
    throw std::invalid_argument("gconv_forward: input " + h.shape_string() + " for layer " +
                                std::to_string(layer.in_dim()) + " -> " +
                                std::to_string(layer.out_dim()));
  }
  LayerCache cache;
  cache.pre_activation = Dense2D(h.rows(), layer.out_dim());
  for (std::size_t s = 0; s < layer.supports.size(); ++s) {
    // S (H W) keeps the sparse product on the narrow side.
    add_scaled(cache.pre_activation, spmm(*layer.supports[s], matmul(h, layer.weights[s])));
  }
  add_row_bias(cache.pre_activation, layer.bias);
  cache.output = apply_activation(layer.activation, cache.pre_activation);
  cache.input = std::move(input);
  return cache;
}

LayerCache gconv_forward(const GraphConvLayer& layer, const Dense2D& input) {
  return gconv_forward(layer, std::make_shared<const Dense2D>(input));
}

ConvGradients gconv_backward(const GraphConvLayer& layer, const LayerCache& cache,
                             const Dense2D& grad_out, bool need_input_grad) {
  return gconv_backward_from_pre(
      layer, cache,
      activation_backward(layer.activation, cache.pre_activation, cache.output, grad_out),
      need_input_grad);
}

ConvGradients gconv_backward_from_pre(const GraphConvLayer& layer, const LayerCache& cache,
                                      const Dense2D& delta, bool need_input_grad) {
  require_same_shape(cache.pre_activation, delta, "gconv_backward");
  const Dense2D& h = *cache.input;
  ConvGradients g;
  g.grad_bias = column_sums(delta);
  if (need_input_grad) g.grad_input = Dense2D(h.rows(), h.cols());
  g.grad_weights.reserve(layer.supports.size());
  for (std::size_t s = 0; s < layer.supports.size(); ++s) {
    // (S H)^T delta = H^T (S^T delta)
    const Dense2D back = spmm_t(*layer.supports[s], delta);
    g.grad_weights.push_back(matmul_tn(h, back));
    if (need_input_grad) add_scaled(g.grad_input, matmul_nt(back, layer.weights[s]));
  }
  return g;
}

DenseLayer make_dense(std::size_t in_dim, std::size_t out_dim, Activation act, Rng& rng) {
  return DenseLayer{glorot_init(in_dim, out_dim, rng), Dense2D(1, out_dim), act};
}

LayerCache dense_forward(const DenseLayer& layer, std::shared_ptr<const Dense2D> input) {
  LayerCache cache;
  cache.pre_activation = matmul(*input, layer.weight);
  add_row_bias(cache.pre_activation, layer.bias);
  cache.output = apply_activation(layer.activation, cache.pre_activation);
  cache.input = std::move(input);
  return cache;
}

LayerCache dense_forward(const DenseLayer& layer, const Dense2D& input) {
  return dense_forward(layer, std::make_shared<const Dense2D>(input));
}

DenseGradients dense_backward(const DenseLayer& layer, const LayerCache& cache,
                              const Dense2D& grad_out, bool need_input_grad) {
  return dense_backward_from_pre(
      layer, cache,
      activation_backward(layer.activation, cache.pre_activation, cache.output, grad_out),
      need_input_grad);
}

DenseGradients dense_backward_from_pre(const DenseLayer& layer, const LayerCache& cache,
                                       const Dense2D& delta, bool need_input_grad) {
  require_same_shape(cache.pre_activation, delta, "dense_backward");
  DenseGradients g;
  g.grad_weight = matmul_tn(*cache.input, delta);
  g.grad_bias = column_sums(delta);
  if (need_input_grad) g.grad_input = matmul_nt(delta, layer.weight);
  return g;
}

AdamState make_adam(const AdamConfig& config, const std::vector<ParamRef>& params) {
  AdamState st;
  st.config = config;
  for (const auto& p : params) {
    st.m.emplace_back(p.value->rows(), p.value->cols());
    st.v.emplace_back(p.value->rows(), p.value->cols());
  }
  return st;
}

void adam_step(AdamState& state, const std::vector<ParamRef>& params,
               const std::vector<Dense2D>& grads) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    require_same_shape(*params[p].value, grads[p], "adam_step");
    if (!all_finite(grads[p])) {
      throw NonFiniteError("non-finite gradient in parameter '" + params[p].name + "'");
    }
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& w = params[p].value->values();
    const auto& g = grads[p].values();
    auto& m = state.m[p].values();
    auto& v = state.v[p].values();
    const double wd = params[p].decay ? c.weight_decay : 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] + wd * w[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * gi;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

}  // namespace modgcn
