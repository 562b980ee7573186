#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modgcn/graph.hpp"
#include "modgcn/nn.hpp"
#include "modgcn/spectral.hpp"

namespace modgcn {

enum class EncoderKind { gcn, chebnet };
// plain: supervised only; mod: modularity term on the output softmax;
// aux: modularity term on an auxiliary head fed by the hidden layer.
enum class Variant { plain, mod, aux };

std::string_view to_string(EncoderKind e);
std::string_view to_string(Variant v);
EncoderKind parse_encoder(std::string_view s);
Variant parse_variant(std::string_view s);

struct ModelSpec {
  EncoderKind encoder = EncoderKind::gcn;
  std::size_t cheb_order = 2;
  Variant variant = Variant::plain;
  std::size_t hidden_dim = 16;
  double alpha = 0.0;
  std::size_t k_aux = 0;  // 0 = number of label classes
  std::size_t epochs = 100;
  double lr = 0.01;
  std::uint64_t seed = 0;
  double dropout = 0.0;
  double weight_decay = 0.0;

  // alpha used in the loss: plain ignores the configured value.
  double effective_alpha() const { return variant == Variant::plain ? 0.0 : alpha; }
  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
  // e.g. "ChebNet-mod", "GCN"
  std::string display_name() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct ChebCache;

struct ContextOptions {
  // Chebyshev orders to precompute. Others are built on first request.
  std::vector<std::size_t> cheb_orders{};
  // Overrides the power-iteration estimate (e.g. the common 2.0 shortcut).
  std::optional<double> lambda_max_override{};
  PowerIterationOptions power{};
};

// Per-graph preprocessing shared by every model and run on that graph.
// Immutable after construction except for the lazily filled Chebyshev cache,
// which is guarded by a mutex.
class GraphContext {
 public:
  GraphContext(std::shared_ptr<const Graph> graph, ContextOptions options = {});

  const Graph& graph() const { return *graph_; }
  std::shared_ptr<const Graph> graph_ptr() const { return graph_; }
  std::shared_ptr<const Dense2D> features() const { return features_; }
  const DegreeVector& degrees() const { return degrees_; }
  std::shared_ptr<const CsrMatrix> gcn_support() const { return gcn_support_; }
  double lambda_max() const { return lambda_max_; }
  bool lambda_converged() const { return lambda_converged_; }
  // T_0..T_K as shared matrices.
  std::vector<std::shared_ptr<const CsrMatrix>> cheb_supports(std::size_t order) const;

 private:
  std::shared_ptr<const Graph> graph_;
  std::shared_ptr<const Dense2D> features_;
  DegreeVector degrees_;
  std::shared_ptr<const CsrMatrix> gcn_support_;
  CsrMatrix rescaled_laplacian_;
  double lambda_max_ = 0.0;
  bool lambda_converged_ = true;
  mutable std::shared_ptr<ChebCache> cheb_;
};

struct ForwardPass {
  LayerCache hidden;                // conv1, ReLU
  LayerCache output;                // conv2, softmax rows
  std::optional<LayerCache> aux;    // aux head, softmax rows
  // Inverted-dropout mask applied to the conv2 input (entries 0 or 1/keep);
  // empty when dropout is off.
  Dense2D hidden_mask;

  const Dense2D& probabilities() const { return output.output; }
};

// Two stacked graph convolutions with an optional auxiliary dense head.
class Model {
 public:
  Model(ModelSpec spec, GraphConvLayer conv1, GraphConvLayer conv2,
        std::optional<DenseLayer> aux);

  const ModelSpec& spec() const { return spec_; }
  const GraphConvLayer& conv1() const { return conv1_; }
  const GraphConvLayer& conv2() const { return conv2_; }
  const std::optional<DenseLayer>& aux() const { return aux_; }
  bool has_aux() const { return aux_.has_value(); }

  // Ordered handles: conv1.W*, conv1.b, conv2.W*, conv2.b, [aux.W, aux.b].
  std::vector<ParamRef> parameters();
  std::vector<std::string> parameter_names() const;

  // dropout_rng == nullptr or spec().dropout == 0 disables dropout.
  ForwardPass forward(std::shared_ptr<const Dense2D> features, Rng* dropout_rng = nullptr) const;

 private:
  ModelSpec spec_;
  GraphConvLayer conv1_;
  GraphConvLayer conv2_;
  std::optional<DenseLayer> aux_;
};

// Glorot weights, zero biases. Initialization order is conv1, conv2, aux so
// that the encoder weights do not depend on the variant.
Model build_model(const ModelSpec& spec, const GraphContext& ctx, std::uint64_t seed);

// Inverted-dropout mask: 0 with probability p, else 1 / (1 - p).
Dense2D dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng);

}  // namespace modgcn
