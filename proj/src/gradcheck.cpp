#include "modgcn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "modgcn/model.hpp"
#include "modgcn/nn.hpp"
#include "modgcn/objectives.hpp"
#include "modgcn/rng.hpp"

namespace modgcn {

bool GradCheckReport::all_passed() const {
  return !entries.empty() &&
         std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.rel_error);
  return w;
}

double relative_error(const Dense2D& analytic, const Dense2D& numeric) {
  require_same_shape(analytic, numeric, "relative_error");
  Dense2D diff = analytic;
  add_scaled(diff, numeric, -1.0);
  const double denom = std::max(frobenius_norm(analytic), frobenius_norm(numeric));
  if (denom < 1e-12) return frobenius_norm(diff);
  return frobenius_norm(diff) / denom;
}

Dense2D numeric_gradient(const std::function<double()>& f, Dense2D& param, double step) {
  Dense2D g(param.rows(), param.cols());
  for (std::size_t i = 0; i < param.size(); ++i) {
    double& x = param.values()[i];
    const double saved = x;
    x = saved + step;
    const double plus = f();
    x = saved - step;
    const double minus = f();
    x = saved;
    g.values()[i] = (plus - minus) / (2.0 * step);
  }
  return g;
}

Graph random_attributed_graph(std::size_t n, std::size_t classes, std::size_t features,
                              double edge_prob, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < edge_prob) edges.emplace_back(i, j);
  // A spanning path keeps every instance connected.
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  Dense2D x(n, features);
  for (double& v : x.values()) v = rng.normal();
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i < classes ? i : rng.below(classes));
  return build_graph(n, edges, std::move(x), std::move(labels), classes);
}

namespace {

class Checker {
 public:
  Checker(const GradCheckOptions& opts, GradCheckReport& report) : opts_(opts), report_(report) {}

  void record(const std::string& name, const Dense2D& analytic, const Dense2D& numeric) {
    const double e = relative_error(analytic, numeric);
    report_.entries.push_back({name, e, frobenius_norm(analytic), e < opts_.tolerance});
  }

  double step() const { return opts_.step; }

 private:
  const GradCheckOptions& opts_;
  GradCheckReport& report_;
};

Dense2D random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Dense2D m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

std::string act_name(Activation a) {
  switch (a) {
    case Activation::identity:
      return "identity";
    case Activation::relu:
      return "relu";
    case Activation::softmax_rows:
      return "softmax";
  }
  return "?";
}

// Central differences straddling a ReLU kink measure a one-sided slope, so
// instances keep every ReLU pre-activation at least this far from zero.
constexpr double kKinkMargin = 1e-3;
constexpr int kMaxRedraws = 200;

double min_abs(const Dense2D& m) {
  double lo = std::numeric_limits<double>::infinity();
  for (const double v : m.values()) lo = std::min(lo, std::abs(v));
  return lo;
}

void check_conv_layer(Checker& ck, const std::string& tag, GraphConvLayer layer, Rng& rng) {
  const std::size_t n = layer.supports.front()->n_rows();
  Dense2D input = random_matrix(n, layer.in_dim(), rng);
  for (int i = 0; layer.activation == Activation::relu && i < kMaxRedraws &&
                  min_abs(gconv_forward(layer, input).pre_activation) < kKinkMargin;
       ++i)
    input = random_matrix(n, layer.in_dim(), rng);
  const Dense2D proj = random_matrix(n, layer.out_dim(), rng);
  auto loss = [&] { return frobenius_dot(gconv_forward(layer, input).output, proj); };

  const auto cache = gconv_forward(layer, input);
  const auto g = gconv_backward(layer, cache, proj, true);
  for (std::size_t s = 0; s < layer.weights.size(); ++s) {
    ck.record(tag + "/W" + std::to_string(s), g.grad_weights[s],
              numeric_gradient(loss, layer.weights[s], ck.step()));
  }
  ck.record(tag + "/b", g.grad_bias, numeric_gradient(loss, layer.bias, ck.step()));
  ck.record(tag + "/input", g.grad_input, numeric_gradient(loss, input, ck.step()));
}

void check_dense_layer(Checker& ck, const std::string& tag, DenseLayer layer, std::size_t n, Rng& rng) {
  Dense2D input = random_matrix(n, layer.in_dim(), rng);
  for (int i = 0; layer.activation == Activation::relu && i < kMaxRedraws &&
                  min_abs(dense_forward(layer, input).pre_activation) < kKinkMargin;
       ++i)
    input = random_matrix(n, layer.in_dim(), rng);
  const Dense2D proj = random_matrix(n, layer.out_dim(), rng);
  auto loss = [&] { return frobenius_dot(dense_forward(layer, input).output, proj); };
  const auto cache = dense_forward(layer, input);
  const auto g = dense_backward(layer, cache, proj, true);
  ck.record(tag + "/W", g.grad_weight, numeric_gradient(loss, layer.weight, ck.step()));
  ck.record(tag + "/b", g.grad_bias, numeric_gradient(loss, layer.bias, ck.step()));
  ck.record(tag + "/input", g.grad_input, numeric_gradient(loss, input, ck.step()));
}

void check_losses(Checker& ck, const std::string& tag, const Graph& g, const LabelMask& mask, Rng& rng) {
  Dense2D logits = random_matrix(g.num_nodes(), g.num_classes, rng);
  auto ce = [&] { return masked_cross_entropy(softmax_rows(logits), mask).loss; };
  ck.record(tag + "/cross_entropy", masked_cross_entropy(softmax_rows(logits), mask).grad_logits,
            numeric_gradient(ce, logits, ck.step()));

  const DegreeVector deg = compute_degrees(g);
  Dense2D h = random_matrix(g.num_nodes(), 3, rng);
  auto mod = [&] { return modularity_loss(g, deg, h).loss; };
  ck.record(tag + "/modularity", modularity_loss(g, deg, h).grad_h, numeric_gradient(mod, h, ck.step()));
}

// Dense long-double re-implementation of the model loss used as the
// finite-difference oracle for full models. Independent of the sparse and
// SIMD code under test, and its extra precision keeps round-off well below
// the smallest gradient blocks (e.g. an aux bias near a uniform softmax).
namespace reference {

using LD = long double;

struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<LD> v;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0L) {}
  LD& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  LD operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
};

Mat from(const Dense2D& d) {
  Mat m(d.rows(), d.cols());
  for (std::size_t i = 0; i < d.size(); ++i) m.v[i] = d.values()[i];
  return m;
}

Mat mul(const Mat& a, const Mat& b) {
  Mat c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k)
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

void activate(Mat& m, Activation act) {
  if (act == Activation::relu) {
    for (LD& x : m.v) x = x > 0.0L ? x : 0.0L;
  } else if (act == Activation::softmax_rows) {
    for (std::size_t i = 0; i < m.rows; ++i) {
      LD mx = m(i, 0);
      for (std::size_t j = 1; j < m.cols; ++j) mx = std::max(mx, m(i, j));
      LD sum = 0.0L;
      for (std::size_t j = 0; j < m.cols; ++j) sum += (m(i, j) = std::exp(m(i, j) - mx));
      for (std::size_t j = 0; j < m.cols; ++j) m(i, j) /= sum;
    }
  }
}

void add_bias(Mat& m, const Dense2D& b) {
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) += b.values()[j];
}

Mat conv(const GraphConvLayer& layer, const Mat& h) {
  Mat out(h.rows, layer.bias.cols());
  for (std::size_t s = 0; s < layer.supports.size(); ++s) {
    const Mat t = mul(from(layer.supports[s]->to_dense()), mul(h, from(layer.weights[s])));
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += t.v[i];
  }
  add_bias(out, layer.bias);
  activate(out, layer.activation);
  return out;
}

struct Terms {
  LD ce = 0.0L;
  LD q = 0.0L;
};

LD cross_entropy(const Mat& z, const LabelMask& mask) {
  LD loss = 0.0L;
  for (std::size_t id : mask.train_ids)
    for (std::size_t c = 0; c < z.cols; ++c)
      if (mask.onehot(id, c) != 0.0) loss -= std::log(std::max(z(id, c), static_cast<LD>(kLogClamp)));
  return loss;
}

// tr(H^T B H) / 2e with B_ij = A_ij - k_i k_j / 2e formed explicitly.
LD modularity(const Mat& a, const Mat& h) {
  std::vector<LD> k(a.rows, 0.0L);
  LD two_e = 0.0L;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) k[i] += a(i, j);
    two_e += k[i];
  }
  LD q = 0.0L;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.rows; ++j) {
      LD dot = 0.0L;
      for (std::size_t c = 0; c < h.cols; ++c) dot += h(i, c) * h(j, c);
      q += (a(i, j) - k[i] * k[j] / two_e) * dot;
    }
  return q / two_e;
}

Terms model_terms(const Model& model, const Mat& x, const Mat& adjacency, const LabelMask& mask) {
  const Mat hidden = conv(model.conv1(), x);
  const Mat z = conv(model.conv2(), hidden);
  Terms t;
  t.ce = cross_entropy(z, mask);
  if (model.has_aux()) {
    Mat a = mul(hidden, from(model.aux()->weight));
    add_bias(a, model.aux()->bias);
    activate(a, model.aux()->activation);
    t.q = modularity(adjacency, a);
  } else {
    t.q = modularity(adjacency, z);
  }
  return t;
}

// Central differences of (1 - alpha) CE - alpha Q, accumulated in long double.
Dense2D numeric_gradient(const Model& model, Dense2D& param, const Mat& x, const Mat& adjacency,
                         const LabelMask& mask, long double alpha, double step) {
  Dense2D g(param.rows(), param.cols());
  auto total = [&] {
    const Terms t = model_terms(model, x, adjacency, mask);
    return (1.0L - alpha) * t.ce - alpha * t.q;
  };
  for (std::size_t i = 0; i < param.size(); ++i) {
    double& p = param.values()[i];
    const double saved = p;
    p = saved + step;
    const LD plus = total();
    p = saved - step;
    const LD minus = total();
    p = saved;
    g.values()[i] = static_cast<double>((plus - minus) / (2.0L * static_cast<LD>(step)));
  }
  return g;
}

}  // namespace reference

void check_model(Checker& ck, const std::string& tag, const GraphContext& ctx, const LabelMask& mask,
                 const ModelSpec& spec, std::uint64_t seed) {
  // Also redraw if a hidden unit is dead on every node: an all-dead encoder has
  // an exactly zero gradient, which no relative error can score.
  auto usable = [&](const Model& m) {
    const Dense2D pre = m.forward(ctx.features()).hidden.pre_activation;
    if (min_abs(pre) < kKinkMargin) return false;
    for (std::size_t j = 0; j < pre.cols(); ++j) {
      bool alive = false;
      for (std::size_t i = 0; i < pre.rows(); ++i) alive = alive || pre(i, j) > 0.0;
      if (!alive) return false;
    }
    return true;
  };
  Model model = build_model(spec, ctx, seed);
  for (int i = 1; i <= kMaxRedraws && !usable(model); ++i)
    model = build_model(spec, ctx, derive_seed(seed, static_cast<std::uint64_t>(i)));
  const double alpha = spec.effective_alpha();
  const auto analytic = loss_and_gradients(model, ctx, mask);
  auto params = model.parameters();
  const reference::Mat x = reference::from(*ctx.features());
  const reference::Mat adjacency = reference::from(ctx.graph().adjacency.to_dense());
  // Scored over the whole parameter vector: single blocks can be exactly or
  // nearly zero (e.g. output bias on a vertex-transitive graph), where a
  // per-block ratio only measures round-off.
  std::vector<double> a, num;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const Dense2D nb = reference::numeric_gradient(model, *params[p].value, x, adjacency, mask, alpha, ck.step());
    a.insert(a.end(), analytic.grads[p].values().begin(), analytic.grads[p].values().end());
    num.insert(num.end(), nb.values().begin(), nb.values().end());
  }
  const std::size_t total = a.size();
  ck.record(tag + "/" + spec.display_name() + "/all_parameters", Dense2D(1, total, std::move(a)),
            Dense2D(1, total, std::move(num)));
}

}  // namespace

GradCheckReport run_gradient_suite(const GradCheckOptions& opts) {
  GradCheckReport report;
  Checker ck(opts, report);
  Rng meta(opts.seed);
  const std::size_t lo = std::min<std::size_t>(4, opts.max_nodes);
  for (std::size_t inst = 0; inst < opts.instances; ++inst) {
    const std::size_t n = lo + meta.below(opts.max_nodes - lo + 1);
    const std::size_t classes = 3;
    const std::uint64_t seed = meta.next_u64();
    auto g = std::make_shared<const Graph>(random_attributed_graph(n, classes, 5, 0.35, seed));
    GraphContext ctx(g, ContextOptions{{2}, std::nullopt, {}});
    Rng rng(derive_seed(seed, 1));
    const std::string tag = "instance " + std::to_string(inst);

    const Activation acts[] = {Activation::identity, Activation::relu, Activation::softmax_rows};
    const Activation act = acts[inst % 3];
    check_conv_layer(ck, tag + "/gcn_layer(" + act_name(act) + ")",
                     make_graph_conv({ctx.gcn_support()}, 4, 3, act, rng), rng);
    check_conv_layer(ck, tag + "/cheb_layer(" + act_name(act) + ")",
                     make_graph_conv(ctx.cheb_supports(2), 4, 3, act, rng), rng);
    check_dense_layer(ck, tag + "/dense(" + act_name(act) + ")", make_dense(4, 3, act, rng), n, rng);

    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < n; ++i)
      if (i < classes || rng.uniform() < 0.3) train.push_back(i);
    const LabelMask mask = make_label_mask(*g, train);
    check_losses(ck, tag, *g, mask, rng);

    const double alpha = 0.1 + 0.8 * rng.uniform();
    for (EncoderKind enc : {EncoderKind::gcn, EncoderKind::chebnet}) {
      for (Variant var : {Variant::plain, Variant::mod, Variant::aux}) {
        ModelSpec spec;
        spec.encoder = enc;
        spec.variant = var;
        spec.hidden_dim = 4;
        spec.cheb_order = 2;
        spec.alpha = alpha;
        spec.k_aux = 2;
        check_model(ck, tag, ctx, mask, spec, derive_seed(seed, 2));
      }
    }
    ++report.instances;
  }
  return report;
}

}  // namespace modgcn
