#include <doctest.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "helpers.hpp"
#include "modgcn/checkpoint.hpp"
#include "modgcn/harness.hpp"

using namespace modgcn;

namespace {

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_experiment_config(in, "t.cfg");
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(R"(# comment
dataset = synthetic
budgets = 5, 10
runs = 4
seed = 3
epochs = 50
alpha_grid = 0.25,0.75

[model]
encoder = gcn

[model]
name = Cheb
encoder = chebnet
cheb_order = 3
variant = aux
alpha = sweep
hidden = 8

[model]
encoder = ica
ica_max_iters = 4
)");
  const ExperimentConfig cfg = parse_experiment_config(in, "t.cfg");
  CHECK(cfg.dataset == "synthetic");
  CHECK(cfg.budgets == std::vector<std::size_t>{5, 10});
  CHECK(cfg.runs == 4);
  CHECK(cfg.seed == 3);
  CHECK(cfg.alpha_grid == std::vector<double>{0.25, 0.75});
  REQUIRE(cfg.models.size() == 3);
  CHECK(cfg.models[0].name == "GCN");
  CHECK(cfg.models[0].spec.epochs == 50);
  CHECK(cfg.models[1].name == "Cheb");
  CHECK(cfg.models[1].spec.encoder == EncoderKind::chebnet);
  CHECK(cfg.models[1].spec.cheb_order == 3);
  CHECK(cfg.models[1].spec.variant == Variant::aux);
  CHECK(cfg.models[1].spec.hidden_dim == 8);
  CHECK(cfg.models[1].sweep_alpha);
  CHECK(cfg.models[2].is_ica);
  CHECK(cfg.models[2].name == "ICA");
  CHECK(cfg.models[2].ica.max_iters == 4);
}

TEST_CASE("config errors carry the line number") {
  CHECK(error_of("runs = 2\nbogus = 1\n").rfind("t.cfg:2:", 0) == 0);
  CHECK(error_of("runs = two\n").rfind("t.cfg:1:", 0) == 0);
  CHECK(error_of("[model]\nencoder = gcn\nalpha = 1.5\n").rfind("t.cfg:", 0) == 0);
  CHECK(error_of("[model]\nencoder = gcn\nlr\n").rfind("t.cfg:3:", 0) == 0);
  CHECK(error_of("runs = 0\n").rfind("t.cfg:1:", 0) == 0);
  CHECK_THROWS(load_experiment_config("/nonexistent/dir/x.cfg"));
}

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng(3);
  auto g = std::make_shared<const Graph>(testing::random_graph(30, 0.2, rng, 3, 6));
  GraphContext ctx(g);
  for (EncoderKind enc : {EncoderKind::gcn, EncoderKind::chebnet})
    for (Variant v : {Variant::plain, Variant::aux}) {
      ModelSpec spec;
      spec.encoder = enc;
      spec.variant = v;
      spec.alpha = 0.3;
      spec.hidden_dim = 5;
      spec.cheb_order = 3;
      spec.seed = 77;
      spec.lr = 0.1 / 3.0;
      Model m = build_model(spec, ctx, 99);  // weights differ from a rebuild at spec.seed
      const auto dir = testing::temp_dir("ckpt");
      save_checkpoint(m, dir / "m.ckpt");
      Model back = load_checkpoint(dir / "m.ckpt", ctx);
      CHECK(back.spec() == m.spec());
      auto pa = m.parameters();
      auto pb = back.parameters();
      REQUIRE(pa.size() == pb.size());
      for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].name == pb[i].name);
        CHECK(*pa[i].value == *pb[i].value);
      }
      CHECK(back.forward(ctx.features()).probabilities() == m.forward(ctx.features()).probabilities());
    }
}

TEST_CASE("corrupt checkpoints are rejected") {
  Rng rng(4);
  auto g = std::make_shared<const Graph>(testing::random_graph(20, 0.2, rng));
  GraphContext ctx(g);
  const auto dir = testing::temp_dir("ckpt_bad");
  { std::ofstream(dir / "a.ckpt") << "NOT-A-CHECKPOINT\n"; }
  CHECK_THROWS(load_checkpoint(dir / "a.ckpt", ctx));
  ModelSpec spec;
  save_checkpoint(build_model(spec, ctx, 1), dir / "b.ckpt");
  std::ifstream in(dir / "b.ckpt");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  text.resize(text.size() / 2);
  { std::ofstream(dir / "c.ckpt") << text; }
  CHECK_THROWS(load_checkpoint(dir / "c.ckpt", ctx));
  CHECK_THROWS(load_checkpoint(dir / "missing.ckpt", ctx));
}
