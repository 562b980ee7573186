#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "helpers.hpp"
#include "modgcn/nn.hpp"

using namespace modgcn;
using testing::max_abs_entry_diff;
using testing::random_dense;

TEST_CASE("glorot bounds, determinism and moments") {
  const Dense2D w = glorot_init(2, 4, 7);
  for (double v : w.values()) CHECK(std::abs(v) <= 1.0);
  CHECK(glorot_init(2, 4, 7) == w);
  CHECK_FALSE(glorot_init(2, 4, 8) == w);

  const Dense2D big = glorot_init(400, 250, 3);  // 1e5 samples, a = sqrt(6/650)
  double mean = 0.0, sq = 0.0;
  for (double v : big.values()) {
    mean += v;
    sq += v * v;
  }
  mean /= 1e5;
  sq /= 1e5;
  CHECK(std::abs(mean) < 0.01);
  const double a = std::sqrt(6.0 / 650.0);
  CHECK(sq == doctest::Approx(a * a / 3.0).epsilon(0.02));
  for (double v : big.values()) CHECK(std::abs(v) <= a);
}

TEST_CASE("softmax rows") {
  const Dense2D z = softmax_rows(Dense2D::from_rows({{0, 0}, {1000, 0}, {-1000, -1000}}));
  CHECK(z(0, 0) == 0.5);
  CHECK(z(0, 1) == 0.5);
  CHECK(z(1, 0) == 1.0);
  CHECK(z(1, 1) < 1e-300);
  CHECK(z(2, 0) == 0.5);
  CHECK(all_finite(z));
}

TEST_CASE("softmax backward equals the explicit Jacobian product") {
  Rng rng(41);
  const Dense2D z = softmax_rows(random_dense(3, 4, rng));
  const Dense2D g = random_dense(3, 4, rng);
  const Dense2D d = softmax_rows_backward(z, g);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double expect = 0.0;
      for (std::size_t c = 0; c < 4; ++c) expect += g(i, c) * z(i, c) * ((c == j ? 1.0 : 0.0) - z(i, j));
      CHECK(d(i, j) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("graph conv forward cases") {
  const auto eye = std::make_shared<const CsrMatrix>(CsrMatrix::identity(2));
  GraphConvLayer layer{{eye}, {Dense2D::identity(2)}, Dense2D(1, 2), Activation::identity};
  const Dense2D h = Dense2D::from_rows({{1, 2}, {3, 4}});
  CHECK(gconv_forward(layer, h).output == h);

  const auto k2 = std::make_shared<const CsrMatrix>(CsrMatrix::from_dense(Dense2D::from_rows({{.5, .5}, {.5, .5}})));
  layer.supports = {k2};
  const Dense2D out = gconv_forward(layer, Dense2D::identity(2)).output;
  for (double v : out.values()) CHECK(v == 0.5);  // each row is the column mean of I

  layer.supports = {eye};
  layer.activation = Activation::relu;
  const Dense2D r = gconv_forward(layer, Dense2D::from_rows({{-1, 2}, {3, -4}})).output;
  CHECK(r == Dense2D::from_rows({{0, 2}, {3, 0}}));
}

TEST_CASE("graph conv backward cases") {
  Rng rng(42);
  const auto eye = std::make_shared<const CsrMatrix>(CsrMatrix::identity(4));
  GraphConvLayer layer = make_graph_conv({eye}, 3, 2, Activation::identity, rng);
  const Dense2D h = random_dense(4, 3, rng);
  const auto cache = gconv_forward(layer, h);
  const auto zero = gconv_backward(layer, cache, Dense2D(4, 2));
  CHECK(frobenius_norm(zero.grad_input) == 0.0);
  CHECK(frobenius_norm(zero.grad_weights[0]) == 0.0);
  CHECK(frobenius_norm(zero.grad_bias) == 0.0);

  const Dense2D g = random_dense(4, 2, rng);
  const auto grads = gconv_backward(layer, cache, g);
  CHECK(max_abs_entry_diff(grads.grad_weights[0], testing::naive_matmul(transpose(h), g)) < 1e-15);
  CHECK(max_abs_entry_diff(grads.grad_bias, column_sums(g)) < 1e-15);
  CHECK(gconv_backward(layer, cache, g, false).grad_input.empty());
}

TEST_CASE("graph conv with several supports sums per-support products") {
  Rng rng(43);
  const auto s0 = std::make_shared<const CsrMatrix>(CsrMatrix::from_dense(random_dense(5, 5, rng, 0.5)));
  const auto s1 = std::make_shared<const CsrMatrix>(CsrMatrix::from_dense(random_dense(5, 5, rng, 0.5)));
  const GraphConvLayer layer = make_graph_conv({s0, s1}, 3, 2, Activation::identity, rng);
  const Dense2D h = random_dense(5, 3, rng);
  Dense2D expect = testing::naive_matmul(s0->to_dense(), testing::naive_matmul(h, layer.weights[0]));
  add_scaled(expect, testing::naive_matmul(s1->to_dense(), testing::naive_matmul(h, layer.weights[1])));
  CHECK(max_abs_entry_diff(gconv_forward(layer, h).output, expect) < 1e-14);
}

TEST_CASE("layer validation") {
  Rng rng(44);
  const auto eye = std::make_shared<const CsrMatrix>(CsrMatrix::identity(3));
  GraphConvLayer layer = make_graph_conv({eye}, 2, 2, Activation::relu, rng);
  CHECK_THROWS_AS(gconv_forward(layer, Dense2D(3, 5)), std::invalid_argument);
  CHECK_THROWS_AS(gconv_forward(layer, Dense2D(4, 2)), std::invalid_argument);
  layer.weights.push_back(Dense2D(2, 2));
  CHECK_THROWS_AS(layer.validate(), std::invalid_argument);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Dense2D w = Dense2D::from_rows({{1.5, -2.0}});
  std::vector<ParamRef> params{{"w", &w, true}};
  AdamState st = make_adam({}, params);
  for (int i = 0; i < 10; ++i) adam_step(st, params, {Dense2D(1, 2)});
  CHECK(w == Dense2D::from_rows({{1.5, -2.0}}));
}

TEST_CASE("adam: constant gradient step approaches lr * sign(g)") {
  Dense2D w = Dense2D::from_rows({{0.0, 0.0}});
  std::vector<ParamRef> params{{"w", &w, true}};
  AdamState st = make_adam({}, params);
  const Dense2D g = Dense2D::from_rows({{3.0, -0.2}});
  Dense2D prev = w;
  for (int i = 0; i < 200; ++i) {
    prev = w;
    adam_step(st, params, {g});
  }
  CHECK(w(0, 0) - prev(0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(w(0, 1) - prev(0, 1) == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("adam: scalar quadratic converges within 1e-4 in 500 steps") {
  // An independent float64 Adam replay first gets within 1e-4 at step 188.
  Dense2D x(1, 1, 2.0);
  std::vector<ParamRef> params{{"x", &x, true}};
  AdamState st = make_adam({}, params);
  const double target = 1.25;
  int first = -1;
  for (int i = 1; i <= 500; ++i) {
    adam_step(st, params, {Dense2D(1, 1, 2.0 * (x(0, 0) - target))});
    if (first < 0 && std::abs(x(0, 0) - target) < 1e-4) first = i;
  }
  CHECK(first == 188);
  CHECK(std::abs(x(0, 0) - target) < 1e-4);
}

TEST_CASE("adam: non-finite gradients are reported by name") {
  Dense2D w(1, 1);
  std::vector<ParamRef> params{{"conv1.W0", &w, true}};
  AdamState st = make_adam({}, params);
  try {
    adam_step(st, params, {Dense2D(1, 1, std::nan(""))});
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(std::string(e.what()).find("conv1.W0") != std::string::npos);
  }
  CHECK_THROWS_AS(adam_step(st, params, {Dense2D(2, 1)}), std::invalid_argument);
}

TEST_CASE("adam: weight decay applies only to flagged parameters") {
  Dense2D w(1, 1, 1.0), b(1, 1, 1.0);
  std::vector<ParamRef> params{{"w", &w, true}, {"b", &b, false}};
  AdamConfig cfg;
  cfg.weight_decay = 0.5;
  AdamState st = make_adam(cfg, params);
  adam_step(st, params, {Dense2D(1, 1), Dense2D(1, 1)});
  CHECK(w(0, 0) < 1.0);
  CHECK(b(0, 0) == 1.0);
}
