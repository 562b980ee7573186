#include "modgcn/model.hpp"

#include <mutex>
#include <stdexcept>

namespace modgcn {

std::string_view to_string(EncoderKind e) { return e == EncoderKind::gcn ? "gcn" : "chebnet"; }

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::plain:
      return "plain";
    case Variant::mod:
      return "mod";
    case Variant::aux:
      return "aux";
  }
  return "?";
}

EncoderKind parse_encoder(std::string_view s) {
  if (s == "gcn") return EncoderKind::gcn;
  if (s == "chebnet" || s == "cheb") return EncoderKind::chebnet;
  throw std::invalid_argument("unknown encoder kind '" + std::string(s) + "'");
}

Variant parse_variant(std::string_view s) {
  if (s == "plain") return Variant::plain;
  if (s == "mod") return Variant::mod;
  if (s == "aux") return Variant::aux;
  throw std::invalid_argument("unknown model variant '" + std::string(s) + "'");
}

void ModelSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (hidden_dim == 0) throw std::invalid_argument("hidden_dim must be positive");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be non-negative");
}

std::string ModelSpec::display_name() const {
  std::string name = encoder == EncoderKind::gcn ? "GCN" : "ChebNet";
  if (variant != Variant::plain) name += "-" + std::string(to_string(variant));
  return name;
}

struct ChebCache {
  std::mutex mu;
  std::map<std::size_t, std::vector<std::shared_ptr<const CsrMatrix>>> by_order;
};

GraphContext::GraphContext(std::shared_ptr<const Graph> graph, ContextOptions options)
    : graph_(std::move(graph)), cheb_(std::make_shared<ChebCache>()) {
  features_ = std::make_shared<const Dense2D>(graph_->features);
  degrees_ = compute_degrees(*graph_);
  gcn_support_ = std::make_shared<const CsrMatrix>(modgcn::gcn_support(*graph_));
  const CsrMatrix laplacian = normalized_laplacian(*graph_);
  if (options.lambda_max_override) {
    lambda_max_ = *options.lambda_max_override;
  } else {
    const auto pi = power_iteration(laplacian, options.power);
    lambda_max_ = pi.lambda_max;
    lambda_converged_ = pi.converged;
  }
  // An edgeless graph has L = I and lambda_max = 1.
  if (!(lambda_max_ > 0.0)) lambda_max_ = 1.0;
  rescaled_laplacian_ = rescale_laplacian(laplacian, lambda_max_);
  for (std::size_t k : options.cheb_orders) cheb_supports(k);
}

std::vector<std::shared_ptr<const CsrMatrix>> GraphContext::cheb_supports(std::size_t order) const {
  std::lock_guard lock(cheb_->mu);
  auto it = cheb_->by_order.find(order);
  if (it != cheb_->by_order.end()) return it->second;
  auto cs = modgcn::chebyshev_supports(rescaled_laplacian_, order, lambda_max_);
  std::vector<std::shared_ptr<const CsrMatrix>> shared;
  for (auto& s : cs.supports) shared.push_back(std::make_shared<const CsrMatrix>(std::move(s)));
  cheb_->by_order.emplace(order, shared);
  return shared;
}

Model::Model(ModelSpec spec, GraphConvLayer conv1, GraphConvLayer conv2,
             std::optional<DenseLayer> aux)
    : spec_(std::move(spec)), conv1_(std::move(conv1)), conv2_(std::move(conv2)), aux_(std::move(aux)) {}

std::vector<ParamRef> Model::parameters() {
  std::vector<ParamRef> p;
  for (std::size_t s = 0; s < conv1_.weights.size(); ++s)
    p.push_back({"conv1.W" + std::to_string(s), &conv1_.weights[s], true});
  p.push_back({"conv1.b", &conv1_.bias, false});
  for (std::size_t s = 0; s < conv2_.weights.size(); ++s)
    p.push_back({"conv2.W" + std::to_string(s), &conv2_.weights[s], true});
  p.push_back({"conv2.b", &conv2_.bias, false});
  if (aux_) {
    p.push_back({"aux.W", &aux_->weight, true});
    p.push_back({"aux.b", &aux_->bias, false});
  }
  return p;
}

std::vector<std::string> Model::parameter_names() const {
  std::vector<std::string> names;
  for (const auto& p : const_cast<Model*>(this)->parameters()) names.push_back(p.name);
  return names;
}

Dense2D dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng) {
  Dense2D mask(rows, cols);
  const double scale = 1.0 / (1.0 - p);
  for (double& v : mask.values()) v = rng.uniform() < p ? 0.0 : scale;
  return mask;
}

ForwardPass Model::forward(std::shared_ptr<const Dense2D> features, Rng* dropout_rng) const {
  const bool drop = dropout_rng != nullptr && spec_.dropout > 0.0;
  ForwardPass fp;
  if (drop) {
    const Dense2D mask = dropout_mask(features->rows(), features->cols(), spec_.dropout, *dropout_rng);
    features = std::make_shared<const Dense2D>(hadamard(*features, mask));
  }
  fp.hidden = gconv_forward(conv1_, std::move(features));
  auto hidden = std::make_shared<const Dense2D>(fp.hidden.output);
  std::shared_ptr<const Dense2D> conv2_in = hidden;
  if (drop) {
    fp.hidden_mask = dropout_mask(hidden->rows(), hidden->cols(), spec_.dropout, *dropout_rng);
    conv2_in = std::make_shared<const Dense2D>(hadamard(*hidden, fp.hidden_mask));
  }
  fp.output = gconv_forward(conv2_, conv2_in);
  if (aux_) fp.aux = dense_forward(*aux_, hidden);
  return fp;
}

Model build_model(const ModelSpec& spec, const GraphContext& ctx, std::uint64_t seed) {
  spec.validate();
  const Graph& g = ctx.graph();
  std::vector<std::shared_ptr<const CsrMatrix>> supports;
  switch (spec.encoder) {
    case EncoderKind::gcn:
      supports = {ctx.gcn_support()};
      break;
    case EncoderKind::chebnet:
      supports = ctx.cheb_supports(spec.cheb_order);
      break;
    default:
      throw std::invalid_argument("build_model: unknown encoder kind");
  }
  if (g.num_classes == 0) throw std::invalid_argument("build_model: graph has no classes");
  Rng rng(seed);
  auto conv1 = make_graph_conv(supports, g.num_features(), spec.hidden_dim, Activation::relu, rng);
  auto conv2 = make_graph_conv(supports, spec.hidden_dim, g.num_classes, Activation::softmax_rows, rng);
  std::optional<DenseLayer> aux;
  if (spec.variant == Variant::aux) {
    const std::size_t k_aux = spec.k_aux == 0 ? g.num_classes : spec.k_aux;
    aux = make_dense(spec.hidden_dim, k_aux, Activation::softmax_rows, rng);
  }
  return Model(spec, std::move(conv1), std::move(conv2), std::move(aux));
}

}  // namespace modgcn
