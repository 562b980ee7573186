#include "modgcn/ica.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "modgcn/kernels.hpp"

namespace modgcn {

void OneVsRestLogistic::fit(const Dense2D& x, const std::vector<std::size_t>& train_ids,
                            const std::vector<int>& labels, std::size_t num_classes,
                            const IcaConfig& cfg) {
  const std::size_t m = train_ids.size();
  Dense2D xs(m, x.cols());
  Dense2D y(m, num_classes);
  for (std::size_t r = 0; r < m; ++r) {
    const auto src = x.row(train_ids[r]);
    std::copy(src.begin(), src.end(), xs.row(r).begin());
    y(r, static_cast<std::size_t>(labels[train_ids[r]])) = 1.0;
  }
  layer_ = DenseLayer{Dense2D(x.cols(), num_classes), Dense2D(1, num_classes), Activation::identity};
  auto input = std::make_shared<const Dense2D>(std::move(xs));
  std::vector<ParamRef> params{{"ica.W", &layer_.weight, true}, {"ica.b", &layer_.bias, false}};
  AdamState adam = make_adam(AdamConfig{cfg.lr, 0.9, 0.999, 1e-8, cfg.l2}, params);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t epoch = 0; epoch < cfg.classifier_epochs; ++epoch) {
    const LayerCache cache = dense_forward(layer_, input);
    // Mean binary cross-entropy per unit: d/dz = sigmoid(z) - y.
    Dense2D delta(m, num_classes);
    for (std::size_t i = 0; i < delta.size(); ++i) {
      const double z = cache.pre_activation.values()[i];
      delta.values()[i] = (1.0 / (1.0 + std::exp(-z)) - y.values()[i]) * inv_m;
    }
    const DenseGradients g = dense_backward_from_pre(layer_, cache, delta, false);
    adam_step(adam, params, {g.grad_weight, g.grad_bias});
  }
}

Dense2D OneVsRestLogistic::logits(const Dense2D& x) const {
  Dense2D z = matmul(x, layer_.weight);
  add_row_bias(z, layer_.bias);
  return z;
}

namespace {

// Per-class counts of neighbor labels under the current assignment.
void neighbor_counts(const Graph& g, const std::vector<int>& current, std::size_t node,
                     std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (Index j : g.adjacency.row_cols(node))
    if (current[j] != kUnlabeled) out[static_cast<std::size_t>(current[j])] += 1.0;
}

}  // namespace

IcaResult ica_train_predict(const Graph& g, const std::vector<std::size_t>& train_ids,
                            const std::vector<std::size_t>& test_ids, const IcaConfig& cfg,
                            std::uint64_t /*seed*/) {
  if (cfg.max_iters < 1) throw std::invalid_argument("ica: max_iters must be at least 1");
  const std::size_t n = g.num_nodes();
  const std::size_t k = g.num_classes;
  const std::size_t c = g.num_features();

  std::vector<char> is_train(n, 0);
  std::vector<std::size_t> per_class(k, 0);
  for (std::size_t id : train_ids) {
    if (id >= n || g.labels[id] == kUnlabeled) throw std::invalid_argument("ica: invalid training node");
    is_train[id] = 1;
    ++per_class[static_cast<std::size_t>(g.labels[id])];
  }
  for (std::size_t cls = 0; cls < k; ++cls) {
    if (per_class[cls] == 0) {
      throw std::invalid_argument("ica: class " + std::to_string(cls) + " has no training node");
    }
  }

  IcaResult result;
  result.labels.assign(n, kUnlabeled);
  for (std::size_t id : train_ids) result.labels[id] = g.labels[id];

  // Bootstrap from attributes alone.
  OneVsRestLogistic attr;
  attr.fit(g.features, train_ids, g.labels, k, cfg);
  const Dense2D z0 = attr.logits(g.features);
  for (std::size_t i = 0; i < n; ++i)
    if (!is_train[i]) result.labels[i] = static_cast<int>(argmax_row(z0, i));

  // [attributes | neighbor label counts]; the count block is rewritten in place.
  Dense2D joint(n, c + k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = g.features.row(i);
    std::copy(src.begin(), src.end(), joint.row(i).begin());
  }
  const auto& kern = kernels::active();
  std::vector<double> scores(k);
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    for (std::size_t i = 0; i < n; ++i) neighbor_counts(g, result.labels, i, joint.row(i).subspan(c));
    OneVsRestLogistic rel;
    rel.fit(joint, train_ids, g.labels, k, cfg);
    const Dense2D& w = rel.layer().weight;
    const Dense2D attr_scores = [&] {
      // Attribute block of the linear score; the relational block changes per node.
      Dense2D z(n, k);
      kern.gemm_nn(n, k, c, g.features.data(), w.data(), z.data());
      add_row_bias(z, rel.layer().bias);
      return z;
    }();

    std::size_t changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_train[i]) continue;
      neighbor_counts(g, result.labels, i, joint.row(i).subspan(c));
      const auto counts = joint.row(i).subspan(c);
      for (std::size_t cls = 0; cls < k; ++cls) scores[cls] = attr_scores(i, cls);
      for (std::size_t r = 0; r < k; ++r)
        if (counts[r] != 0.0) kern.axpy(k, counts[r], w.row(c + r).data(), scores.data());
      std::size_t best = 0;
      for (std::size_t cls = 1; cls < k; ++cls)
        if (scores[cls] > scores[best]) best = cls;
      if (result.labels[i] != static_cast<int>(best)) {
        result.labels[i] = static_cast<int>(best);
        ++changed;
      }
    }
    result.iterations = iter + 1;
    if (changed == 0) {
      result.converged = true;
      break;
    }
  }

  std::size_t correct = 0;
  for (std::size_t id : test_ids) {
    result.test_predictions.push_back(result.labels[id]);
    if (result.labels[id] == g.labels[id]) ++correct;
  }
  result.test_accuracy = test_ids.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_ids.size());
  return result;
}

}  // namespace modgcn
