#pragma once

// Layers with hand-written backward passes, parameter initialization and Adam.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "modgcn/dense.hpp"
#include "modgcn/rng.hpp"
#include "modgcn/sparse.hpp"

namespace modgcn {

enum class Activation { identity, relu, softmax_rows };

// Row-wise softmax with the row max subtracted first.
Dense2D softmax_rows(const Dense2D& logits);
// Gradient w.r.t. the logits given softmax output z and dL/dz:
// z (.) (g - rowsum(g (.) z)).
Dense2D softmax_rows_backward(const Dense2D& z, const Dense2D& grad_z);

Dense2D apply_activation(Activation act, const Dense2D& pre);
// dL/d(pre) from dL/d(out).
Dense2D activation_backward(Activation act, const Dense2D& pre, const Dense2D& out,
                            const Dense2D& grad_out);

// Uniform in [-a, a] with a = sqrt(6 / (rows + cols)).
Dense2D glorot_init(std::size_t rows, std::size_t cols, Rng& rng);
Dense2D glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed);

// out = act(sum_s supports[s] * in * weights[s] + bias).
// One support with weight sharing for GCN; K+1 Chebyshev supports for ChebNet.
struct GraphConvLayer {
  std::vector<std::shared_ptr<const CsrMatrix>> supports;
  std::vector<Dense2D> weights;  // each in_dim x out_dim
  Dense2D bias;                  // 1 x out_dim
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return weights.front().rows(); }
  std::size_t out_dim() const { return weights.front().cols(); }
  // Throws std::invalid_argument if supports/weights/bias disagree.
  void validate() const;
};

GraphConvLayer make_graph_conv(std::vector<std::shared_ptr<const CsrMatrix>> supports,
                               std::size_t in_dim, std::size_t out_dim, Activation act,
                               Rng& rng);

struct LayerCache {
  std::shared_ptr<const Dense2D> input;
  Dense2D pre_activation;
  Dense2D output;
};

struct ConvGradients {
  Dense2D grad_input;  // empty when not requested
  std::vector<Dense2D> grad_weights;
  Dense2D grad_bias;
};

LayerCache gconv_forward(const GraphConvLayer& layer, std::shared_ptr<const Dense2D> input);
LayerCache gconv_forward(const GraphConvLayer& layer, const Dense2D& input);
// grad_out is dL/d(output).
ConvGradients gconv_backward(const GraphConvLayer& layer, const LayerCache& cache,
                             const Dense2D& grad_out, bool need_input_grad = true);
// delta is dL/d(pre_activation); skips the activation Jacobian.
ConvGradients gconv_backward_from_pre(const GraphConvLayer& layer, const LayerCache& cache,
                                      const Dense2D& delta, bool need_input_grad = true);

struct DenseLayer {
  Dense2D weight;  // in_dim x out_dim
  Dense2D bias;    // 1 x out_dim
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
};

DenseLayer make_dense(std::size_t in_dim, std::size_t out_dim, Activation act, Rng& rng);

struct DenseGradients {
  Dense2D grad_input;
  Dense2D grad_weight;
  Dense2D grad_bias;
};

LayerCache dense_forward(const DenseLayer& layer, std::shared_ptr<const Dense2D> input);
LayerCache dense_forward(const DenseLayer& layer, const Dense2D& input);
DenseGradients dense_backward(const DenseLayer& layer, const LayerCache& cache,
                              const Dense2D& grad_out, bool need_input_grad = true);
DenseGradients dense_backward_from_pre(const DenseLayer& layer, const LayerCache& cache,
                                       const Dense2D& delta, bool need_input_grad = true);

// A named handle onto a trainable matrix owned by a model.
struct ParamRef {
  std::string name;
  Dense2D* value;
  bool decay;  // weight decay applies (weights yes, biases no)
};

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2 coefficient added to the gradient
};

struct AdamState {
  AdamConfig config;
  std::size_t step = 0;
  std::vector<Dense2D> m;
  std::vector<Dense2D> v;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

AdamState make_adam(const AdamConfig& config, const std::vector<ParamRef>& params);
// Bias-corrected Adam update. Throws NonFiniteError naming the parameter if a
// gradient contains NaN/Inf, std::invalid_argument on shape mismatch.
void adam_step(AdamState& state, const std::vector<ParamRef>& params,
               const std::vector<Dense2D>& grads);

}  // namespace modgcn
