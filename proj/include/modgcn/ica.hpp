#pragma once

// Iterative Classification Algorithm baseline: a local one-vs-rest logistic
// regression over [node attributes | per-class neighbor label counts],
// alternated with label re-estimation until labels stop changing.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "modgcn/graph.hpp"
#include "modgcn/nn.hpp"

namespace modgcn {

struct IcaConfig {
  std::size_t max_iters = 10;
  // Local classifier training (full-batch Adam from zero weights).
  std::size_t classifier_epochs = 300;
  double lr = 0.05;
  double l2 = 1e-4;
};

// One-vs-rest logistic regression: k independent sigmoid units sharing the
// input. Prediction is the argmax of the k scores.
class OneVsRestLogistic {
 public:
  // Rows train_ids of x with labels[id] in [0, num_classes).
  void fit(const Dense2D& x, const std::vector<std::size_t>& train_ids,
           const std::vector<int>& labels, std::size_t num_classes, const IcaConfig& cfg);
  Dense2D logits(const Dense2D& x) const;
  const DenseLayer& layer() const { return layer_; }

 private:
  DenseLayer layer_;
};

struct IcaResult {
  std::vector<int> labels;            // final estimate for every node (truth on train ids)
  std::vector<int> test_predictions;  // aligned with test_ids
  std::size_t iterations = 0;         // relational passes performed
  bool converged = false;             // a pass changed no label
  double test_accuracy = 0.0;
};

// Throws std::invalid_argument if a class has no training node.
IcaResult ica_train_predict(const Graph& g, const std::vector<std::size_t>& train_ids,
                            const std::vector<std::size_t>& test_ids, const IcaConfig& cfg,
                            std::uint64_t seed = 0);

}  // namespace modgcn
