// modgcn command-line entry point.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "modgcn/checkpoint.hpp"
#include "modgcn/datasets.hpp"
#include "modgcn/gradcheck.hpp"
#include "modgcn/harness.hpp"
#include "modgcn/kernels.hpp"

using namespace modgcn;

namespace {

struct DataOptions {
  std::string dataset = "cora";
  std::string features = "row_normalize";
  std::optional<std::string> cache_dir;
  std::optional<double> lambda_max;
  std::uint64_t synthetic_seed = 1;
};

struct SpecOptions {
  std::string model = "gcn";
  std::string variant = "plain";
  double alpha = 0.0;
  std::size_t cheb_order = 2;
  std::size_t hidden = 16;
  std::size_t k_aux = 0;
  std::size_t epochs = 100;
  double lr = 0.01;
  double dropout = 0.0;
  double weight_decay = 0.0;

  ModelSpec to_spec(std::uint64_t seed) const {
    ModelSpec s;
    s.encoder = parse_encoder(model);
    s.variant = parse_variant(variant);
    s.alpha = alpha;
    s.cheb_order = cheb_order;
    s.hidden_dim = hidden;
    s.k_aux = k_aux;
    s.epochs = epochs;
    s.lr = lr;
    s.seed = seed;
    s.dropout = dropout;
    s.weight_decay = weight_decay;
    s.validate();
    return s;
  }
};

void add_data_options(CLI::App* app, DataOptions& d) {
  app->add_option("--dataset", d.dataset,
                  "cora, citeseer, synthetic, or a path prefix to <prefix>.content/<prefix>.cites; "
                  "names resolve under $" + std::string(kDataDirEnv))
      ->capture_default_str();
  app->add_option("--features", d.features, "feature preprocessing: row_normalize or none")->capture_default_str();
  app->add_option("--cache-dir", d.cache_dir, "binary cache directory for parsed datasets");
  app->add_option("--lambda-max", d.lambda_max, "override the power-iteration estimate of lambda_max");
  app->add_option("--synthetic-seed", d.synthetic_seed, "generator seed for --dataset synthetic")->capture_default_str();
}

void add_spec_options(CLI::App* app, SpecOptions& s) {
  app->add_option("--model", s.model, "gcn or chebnet")->capture_default_str();
  app->add_option("--variant", s.variant, "plain, mod or aux")->capture_default_str();
  app->add_option("--alpha", s.alpha, "modularity trade-off in [0, 1]")->capture_default_str();
  app->add_option("--cheb-order", s.cheb_order, "Chebyshev order K")->capture_default_str();
  app->add_option("--hidden", s.hidden, "hidden width")->capture_default_str();
  app->add_option("--k-aux", s.k_aux, "aux head width (0 = number of classes)")->capture_default_str();
  app->add_option("--epochs", s.epochs, "training epochs")->capture_default_str();
  app->add_option("--lr", s.lr, "Adam learning rate")->capture_default_str();
  app->add_option("--dropout", s.dropout, "dropout on the hidden layer")->capture_default_str();
  app->add_option("--weight-decay", s.weight_decay, "L2 coefficient on weights")->capture_default_str();
}

std::shared_ptr<const Graph> load_graph(const DataOptions& d, FeatureMode mode) {
  Graph g;
  if (d.dataset == "synthetic") {
    SyntheticSpec spec;
    spec.seed = d.synthetic_seed;
    g = synthetic_citation_graph(spec);
  } else {
    LoadStats stats;
    std::optional<std::filesystem::path> cache;
    if (d.cache_dir) cache = *d.cache_dir;
    g = load_dataset(resolve_dataset(d.dataset), cache, &stats);
    if (stats.dropped_citations > 0)
      std::cerr << "warning: dropped " << stats.dropped_citations << " citations to unknown node ids\n";
  }
  return std::make_shared<const Graph>(preprocess_features(std::move(g), mode));
}

GraphContext make_context(const DataOptions& d, FeatureMode mode, std::vector<std::size_t> cheb_orders) {
  ContextOptions opts;
  opts.cheb_orders = std::move(cheb_orders);
  opts.lambda_max_override = d.lambda_max;
  GraphContext ctx(load_graph(d, mode), opts);
  const Graph& g = ctx.graph();
  std::cerr << "# graph: nodes=" << g.num_nodes() << " edges=" << g.num_edges << " features=" << g.num_features()
            << " classes=" << g.num_classes << " lambda_max=" << ctx.lambda_max()
            << (ctx.lambda_converged() ? "" : " (not converged)") << '\n';
  return ctx;
}

void print_defaults(const std::string& cmd, const DataOptions& d, std::uint64_t seed, std::size_t jobs) {
  std::cerr << "# modgcn " << cmd << ": dataset=" << d.dataset << " features=" << d.features << " seed=" << seed
            << " jobs=" << jobs << " kernels=" << kernels::backend_name(kernels::current_backend()) << '\n';
}

void print_spec(const ModelSpec& s, std::size_t labels_per_class, std::size_t test_size) {
  std::cerr << "# model: " << s.display_name() << " encoder=" << to_string(s.encoder) << " cheb_order=" << s.cheb_order
            << " variant=" << to_string(s.variant) << " alpha=" << s.alpha << " hidden=" << s.hidden_dim
            << " k_aux=" << s.k_aux << " epochs=" << s.epochs << " lr=" << s.lr << " dropout=" << s.dropout
            << " weight_decay=" << s.weight_decay << " adam=(0.9,0.999,1e-8)"
            << " labels_per_class=" << labels_per_class << " test_size=" << test_size << '\n';
}

std::vector<std::size_t> cheb_orders_of(const ExperimentConfig& cfg) {
  std::vector<std::size_t> orders;
  for (const auto& m : cfg.models)
    if (!m.is_ica && m.spec.encoder == EncoderKind::chebnet) orders.push_back(m.spec.cheb_order);
  return orders;
}

void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& res, const std::string& title) {
  const auto& dir = cfg.output_dir;
  write_results_csv(dir / "results.csv", res.runs);
  write_aggregates_csv(dir / "aggregates.csv", res.aggregates);
  write_summary_md(dir / "summary.md", res.aggregates, cfg.budgets, title);
  if (!res.sweep.empty()) write_sweep_csv(dir / "sweep.csv", res.sweep);
  std::size_t failed = 0;
  for (const auto& r : res.runs) failed += r.failed ? 1 : 0;
  std::cout << "runs=" << res.runs.size() << " failed=" << failed << " output=" << dir.string() << '\n';
  for (const auto& a : res.aggregates) {
    std::printf("%s @%zu: %.4f ± %.4f (n=%zu, alpha=%g)\n", a.model.c_str(), a.labels_per_class, a.mean_accuracy,
                a.standard_error, a.n_runs, a.alpha);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph convolutional networks with modularity regularization"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string kernel_name;
  std::string output_dir = ".";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "base seed for every random choice")->capture_default_str();
    sub->add_option("--jobs", jobs, "worker threads (1 = serial reference)")->capture_default_str();
    sub->add_option("--kernels", kernel_name, "scalar or avx2 (default: best available)");
    sub->add_option("--output-dir", output_dir, "directory for output files")->capture_default_str();
  };

  DataOptions data;
  SpecOptions spec_opts;
  std::size_t labels_per_class = 20;
  std::size_t test_size = 1000;

  auto* train = app.add_subcommand("train", "train one model and write training_log.csv");
  add_common(train);
  add_data_options(train, data);
  add_spec_options(train, spec_opts);
  train->add_option("--labels-per-class", labels_per_class, "labeled nodes per class")->capture_default_str();
  train->add_option("--test-size", test_size, "test nodes")->capture_default_str();
  std::string checkpoint_out;
  train->add_option("--save-checkpoint", checkpoint_out, "write the trained parameters here");

  auto* experiment = app.add_subcommand("experiment", "run an experiment matrix from a config file");
  add_common(experiment);
  std::string config_path;
  experiment->add_option("--config", config_path, "experiment config file")->required();
  std::optional<std::string> dataset_override;
  std::optional<std::size_t> runs_override;
  experiment->add_option("--dataset", dataset_override, "override the config dataset");
  experiment->add_option("--runs", runs_override, "override the number of runs per cell");

  auto* sweep = app.add_subcommand("sweep-alpha", "sweep alpha for every neural model in a config");
  add_common(sweep);
  sweep->add_option("--config", config_path, "experiment config file")->required();
  std::optional<std::string> grid_override;
  sweep->add_option("--dataset", dataset_override, "override the config dataset");
  sweep->add_option("--runs", runs_override, "override the number of runs per cell");
  sweep->add_option("--grid", grid_override, "comma-separated alpha grid");

  auto* exportc = app.add_subcommand("export-embeddings", "train (or load) a model and export node embeddings");
  add_common(exportc);
  add_data_options(exportc, data);
  add_spec_options(exportc, spec_opts);
  exportc->add_option("--labels-per-class", labels_per_class, "labeled nodes per class")->capture_default_str();
  exportc->add_option("--test-size", test_size, "test nodes")->capture_default_str();
  std::string layer_name = "hidden";
  std::string tag;
  std::string checkpoint_in;
  exportc->add_option("--layer", layer_name, "hidden, output or aux")->capture_default_str();
  exportc->add_option("--tag", tag, "file suffix: embeddings_<tag>.tsv (default derived from the model)");
  exportc->add_option("--checkpoint", checkpoint_in, "load parameters instead of training");

  auto* ica = app.add_subcommand("ica", "run the iterative classification baseline");
  add_common(ica);
  add_data_options(ica, data);
  IcaConfig ica_cfg;
  ica->add_option("--labels-per-class", labels_per_class, "labeled nodes per class")->capture_default_str();
  ica->add_option("--test-size", test_size, "test nodes")->capture_default_str();
  ica->add_option("--max-iters", ica_cfg.max_iters, "relational passes")->capture_default_str();

  auto* gradc = app.add_subcommand("check-gradients", "finite-difference check of every analytic gradient");
  add_common(gradc);
  GradCheckOptions gc;
  gradc->add_option("--instances", gc.instances, "random instances")->capture_default_str();
  gradc->add_option("--tolerance", gc.tolerance, "max relative error")->capture_default_str();
  bool verbose = false;
  gradc->add_flag("--verbose", verbose, "print every check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::cerr << "error: " << msg << '\n';
    return 2;
  }

  try {
    if (!kernel_name.empty()) kernels::set_backend(kernels::parse_backend(kernel_name));
    const FeatureMode mode = parse_feature_mode(data.features);

    if (train->parsed()) {
      print_defaults("train", data, seed, jobs);
      const ModelSpec spec = spec_opts.to_spec(seed);
      print_spec(spec, labels_per_class, test_size);
      const GraphContext ctx = make_context(data, mode, {spec.cheb_order});
      const Split split = stratified_split(ctx.graph(), {labels_per_class, test_size, seed});
      TrainedModel t = train_model(spec, ctx, split, init_seed_for(seed), true);
      const std::filesystem::path dir = output_dir;
      write_training_log_csv(dir / "training_log.csv", t.result.log);
      if (!checkpoint_out.empty()) save_checkpoint(t.model, checkpoint_out);
      if (t.result.failed) {
        std::cerr << "error: training failed: " << t.result.diagnostics << '\n';
        return 1;
      }
      std::printf("accuracy=%.6f epochs=%zu loss=%.6g supervised=%.6g modularity=%.6g\n", t.result.test_accuracy,
                  t.result.epochs_run, t.result.final_losses.total, t.result.final_losses.supervised,
                  t.result.final_losses.modularity_term);
      return 0;
    }

    if (experiment->parsed() || sweep->parsed()) {
      const bool is_sweep = sweep->parsed();
      ExperimentConfig cfg = load_experiment_config(config_path);
      if (dataset_override) cfg.dataset = *dataset_override;
      if (runs_override) cfg.runs = *runs_override;
      if (grid_override) {
        std::istringstream in("alpha_grid = " + *grid_override);
        cfg.alpha_grid = parse_experiment_config(in, "--grid").alpha_grid;
      }
      if (experiment->get_option("--seed")->count() > 0 || sweep->get_option("--seed")->count() > 0) cfg.seed = seed;
      if (experiment->get_option("--jobs")->count() > 0 || sweep->get_option("--jobs")->count() > 0) cfg.jobs = jobs;
      if (experiment->get_option("--output-dir")->count() > 0 || sweep->get_option("--output-dir")->count() > 0)
        cfg.output_dir = output_dir;
      DataOptions d;
      d.dataset = cfg.dataset;
      d.features = std::string(to_string(cfg.features));
      if (cfg.cache_dir) d.cache_dir = cfg.cache_dir->string();
      d.lambda_max = cfg.lambda_max;
      std::cerr << "# modgcn " << (is_sweep ? "sweep-alpha" : "experiment") << ": config=" << config_path
                << " dataset=" << cfg.dataset << " features=" << to_string(cfg.features) << " runs=" << cfg.runs
                << " test_size=" << cfg.test_size << " seed=" << cfg.seed << " jobs=" << cfg.jobs
                << " models=" << cfg.models.size() << " kernels=" << kernels::backend_name(kernels::current_backend()) << '\n';
      const GraphContext ctx = make_context(d, cfg.features, cheb_orders_of(cfg));
      const ExperimentResult res = is_sweep ? alpha_sweep(cfg, ctx) : run_matrix(cfg, ctx);
      write_experiment_outputs(cfg, res, "Accuracy on " + cfg.dataset);
      return 0;
    }

    if (exportc->parsed()) {
      print_defaults("export-embeddings", data, seed, jobs);
      const EmbeddingLayer layer = parse_embedding_layer(layer_name);
      ModelSpec spec = spec_opts.to_spec(seed);
      const GraphContext ctx = make_context(data, mode, {spec.cheb_order});
      std::optional<Model> model;
      if (!checkpoint_in.empty()) {
        model = load_checkpoint(checkpoint_in, ctx);
        spec = model->spec();
      } else {
        print_spec(spec, labels_per_class, test_size);
        const Split split = stratified_split(ctx.graph(), {labels_per_class, test_size, seed});
        TrainedModel t = train_model(spec, ctx, split, init_seed_for(seed));
        if (t.result.failed) throw std::runtime_error("training failed: " + t.result.diagnostics);
        std::printf("accuracy=%.6f\n", t.result.test_accuracy);
        model = std::move(t.model);
      }
      if (tag.empty()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s_a%g_%s", spec.display_name().c_str(), spec.effective_alpha(),
                      layer_name.c_str());
        tag = buf;
      }
      const Dense2D emb = embeddings(*model, ctx, layer);
      const auto path = std::filesystem::path(output_dir) / ("embeddings_" + tag + ".tsv");
      write_embeddings_tsv(path, ctx.graph(), emb);
      std::printf("wrote %s (%zu x %zu)\n", path.string().c_str(), emb.rows(), emb.cols() + 2);
      return 0;
    }

    if (ica->parsed()) {
      print_defaults("ica", data, seed, jobs);
      std::cerr << "# ica: max_iters=" << ica_cfg.max_iters << " classifier_epochs=" << ica_cfg.classifier_epochs
                << " lr=" << ica_cfg.lr << " l2=" << ica_cfg.l2 << " labels_per_class=" << labels_per_class
                << " test_size=" << test_size << '\n';
      const GraphContext ctx = make_context(data, mode, {});
      const Split split = stratified_split(ctx.graph(), {labels_per_class, test_size, seed});
      const IcaResult r = ica_train_predict(ctx.graph(), split.train_ids, split.test_ids, ica_cfg, seed);
      std::printf("accuracy=%.6f iterations=%zu converged=%s\n", r.test_accuracy, r.iterations,
                  r.converged ? "yes" : "no");
      return 0;
    }

    if (gradc->parsed()) {
      gc.seed = seed;
      std::cerr << "# check-gradients: seed=" << gc.seed << " instances=" << gc.instances << " step=" << gc.step
                << " tolerance=" << gc.tolerance << " max_nodes=" << gc.max_nodes << '\n';
      const GradCheckReport rep = run_gradient_suite(gc);
      std::size_t failed = 0;
      for (const auto& e : rep.entries) {
        if (!e.passed) ++failed;
        if (verbose || !e.passed)
          std::printf("%s %s rel_error=%.3e norm=%.3e\n", e.passed ? "ok  " : "FAIL", e.name.c_str(), e.rel_error,
                      e.analytic_norm);
      }
      std::printf("checks=%zu failed=%zu worst=%.3e instances=%zu\n", rep.entries.size(), failed, rep.worst(),
                  rep.instances);
      return rep.all_passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::cerr << "error: " << msg << '\n';
    return 1;
  }
  return 0;
}
