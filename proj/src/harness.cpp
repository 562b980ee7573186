#include "modgcn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace modgcn {
namespace {

constexpr std::uint64_t kInitSalt = 0x696e6974ULL;
constexpr std::uint64_t kDropoutSalt = 0x64726f70ULL;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string variant_label(const RunResult& r) {
  return r.is_ica ? "ica" : std::string(to_string(r.spec.variant));
}

}  // namespace

std::uint64_t split_seed_for(std::uint64_t base, std::size_t labels_per_class, std::size_t run_index) {
  return derive_seed(derive_seed(base, labels_per_class), run_index);
}

std::uint64_t init_seed_for(std::uint64_t split_seed) { return derive_seed(split_seed, kInitSalt); }

double accuracy(const Dense2D& probabilities, const Graph& g, const std::vector<std::size_t>& ids) {
  if (ids.empty()) return 0.0;
  std::size_t correct = 0;
  for (const std::size_t i : ids) {
    if (g.labels.at(i) >= 0 && argmax_row(probabilities, i) == static_cast<std::size_t>(g.labels[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ids.size());
}

TrainedModel train_model(const ModelSpec& spec, const GraphContext& ctx, const Split& split,
                         std::uint64_t init_seed, bool record_log) {
  spec.validate();
  const Graph& g = ctx.graph();
  TrainedModel out{build_model(spec, ctx, init_seed), RunResult{}};
  RunResult& r = out.result;
  r.model = spec.display_name();
  r.spec = spec;

  const LabelMask mask = make_label_mask(g, split.train_ids);
  std::vector<ParamRef> params = out.model.parameters();
  AdamState adam = make_adam({spec.lr, 0.9, 0.999, 1e-8, spec.weight_decay}, params);
  Rng dropout_rng(derive_seed(init_seed, kDropoutSalt));
  Rng* drop = spec.dropout > 0.0 ? &dropout_rng : nullptr;

  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    LossAndGradients lg = loss_and_gradients(out.model, ctx, mask, drop);
    if (!std::isfinite(lg.report.total)) {
      r.failed = true;
      r.diagnostics = "non-finite loss at epoch " + std::to_string(epoch) +
                      " (supervised=" + fmt17(lg.report.supervised) +
                      ", modularity=" + fmt17(lg.report.modularity_term) + ")";
      break;
    }
    if (record_log) {
      const Dense2D eval = drop ? out.model.forward(ctx.features()).probabilities() : lg.forward.probabilities();
      r.log.push_back({epoch, lg.report, accuracy(eval, g, split.train_ids), accuracy(eval, g, split.test_ids)});
    }
    try {
      adam_step(adam, params, lg.grads);
    } catch (const NonFiniteError& e) {
      r.failed = true;
      r.diagnostics = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    r.epochs_run = epoch + 1;
  }

  const ForwardPass fp = out.model.forward(ctx.features());
  r.test_accuracy = accuracy(fp.probabilities(), g, split.test_ids);
  r.final_losses = evaluate_loss(out.model, ctx, mask, spec.effective_alpha());
  if (!r.failed && !std::isfinite(r.final_losses.total)) {
    r.failed = true;
    r.diagnostics = "non-finite loss after training";
  }
  return out;
}

RunResult train_once(const ModelSpec& spec, const GraphContext& ctx, const Split& split,
                     std::uint64_t init_seed, bool record_log) {
  return train_model(spec, ctx, split, init_seed, record_log).result;
}

RunResult run_ica(const IcaConfig& cfg, const GraphContext& ctx, const Split& split) {
  RunResult r;
  r.model = "ICA";
  r.is_ica = true;
  const IcaResult ica = ica_train_predict(ctx.graph(), split.train_ids, split.test_ids, cfg);
  r.test_accuracy = ica.test_accuracy;
  r.epochs_run = ica.iterations;
  r.diagnostics = ica.converged ? "" : "ica stopped at max_iters";
  return r;
}

AggregateResult aggregate_runs(const std::vector<const RunResult*>& runs) {
  AggregateResult a;
  if (runs.empty()) return a;
  a.model = runs.front()->model;
  a.is_ica = runs.front()->is_ica;
  a.variant = runs.front()->spec.variant;
  a.alpha = runs.front()->spec.effective_alpha();
  a.labels_per_class = runs.front()->labels_per_class;
  std::vector<double> acc;
  for (const RunResult* r : runs) {
    if (r->failed) ++a.n_failed;
    else acc.push_back(r->test_accuracy);
  }
  a.n_runs = acc.size();
  if (acc.empty()) {
    a.mean_accuracy = std::nan("");
    a.standard_error = std::nan("");
    return a;
  }
  const double n = static_cast<double>(acc.size());
  double sum = 0.0;
  for (const double x : acc) sum += x;
  a.mean_accuracy = sum / n;
  if (acc.size() > 1) {
    double ss = 0.0;
    for (const double x : acc) ss += (x - a.mean_accuracy) * (x - a.mean_accuracy);
    a.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return a;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

namespace {

struct Job {
  std::size_t model = 0;
  std::size_t budget = 0;  // index into cfg.budgets
  std::size_t run = 0;
  double alpha = 0.0;
};

ExperimentResult run_jobs(const ExperimentConfig& cfg, const GraphContext& ctx, bool force_sweep) {
  const std::size_t nb = cfg.budgets.size();
  std::vector<Split> splits(nb * cfg.runs);
  std::vector<std::uint64_t> seeds(nb * cfg.runs);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t r = 0; r < cfg.runs; ++r) {
      const std::uint64_t s = split_seed_for(cfg.seed, cfg.budgets[b], r);
      seeds[b * cfg.runs + r] = s;
      splits[b * cfg.runs + r] = stratified_split(ctx.graph(), {cfg.budgets[b], cfg.test_size, s});
    }
  }

  auto swept = [&](const ModelEntry& m) { return !m.is_ica && (force_sweep || m.sweep_alpha); };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < cfg.models.size(); ++m) {
    const ModelEntry& entry = cfg.models[m];
    if (force_sweep && entry.is_ica) continue;
    const std::vector<double> alphas = swept(entry) ? cfg.alpha_grid : std::vector<double>{entry.spec.alpha};
    for (std::size_t b = 0; b < nb; ++b)
      for (const double a : alphas)
        for (std::size_t r = 0; r < cfg.runs; ++r) jobs.push_back({m, b, r, a});
  }

  ExperimentResult out;
  out.runs.resize(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t i) {
    const Job& j = jobs[i];
    const ModelEntry& entry = cfg.models[j.model];
    const std::size_t slot = j.budget * cfg.runs + j.run;
    RunResult r;
    if (entry.is_ica) {
      r = run_ica(entry.ica, ctx, splits[slot]);
    } else {
      ModelSpec spec = entry.spec;
      spec.alpha = j.alpha;
      spec.seed = init_seed_for(seeds[slot]);
      r = train_once(spec, ctx, splits[slot], spec.seed);
    }
    r.model = entry.name;
    r.labels_per_class = cfg.budgets[j.budget];
    r.run_index = j.run;
    r.split_seed = seeds[slot];
    out.runs[i] = std::move(r);
  });

  // Runs are contiguous per (model, budget, alpha) in job order.
  for (std::size_t m = 0; m < cfg.models.size(); ++m) {
    for (std::size_t b = 0; b < nb; ++b) {
      std::map<double, std::vector<const RunResult*>> by_alpha;
      std::vector<double> order;
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].model != m || jobs[i].budget != b) continue;
        auto [it, inserted] = by_alpha.try_emplace(jobs[i].alpha);
        if (inserted) order.push_back(jobs[i].alpha);
        it->second.push_back(&out.runs[i]);
      }
      if (order.empty()) continue;
      if (!swept(cfg.models[m])) {
        out.aggregates.push_back(aggregate_runs(by_alpha.begin()->second));
        continue;
      }
      std::size_t best = out.sweep.size();
      for (const double a : order) {
        const AggregateResult agg = aggregate_runs(by_alpha[a]);
        out.sweep.push_back({cfg.models[m].name, cfg.budgets[b], a, agg.mean_accuracy, agg.standard_error,
                             agg.n_runs, false});
        // Highest mean wins; ties keep the earlier grid point.
        if (!std::isnan(agg.mean_accuracy) &&
            (std::isnan(out.sweep[best].mean_accuracy) || agg.mean_accuracy > out.sweep[best].mean_accuracy))
          best = out.sweep.size() - 1;
      }
      out.sweep[best].best = true;
      AggregateResult agg = aggregate_runs(by_alpha[out.sweep[best].alpha]);
      agg.alpha = out.sweep[best].alpha;
      out.aggregates.push_back(agg);
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_matrix(const ExperimentConfig& cfg, const GraphContext& ctx) {
  if (cfg.models.empty()) throw std::invalid_argument("experiment lists no models");
  for (const auto& m : cfg.models)
    if (m.sweep_alpha && cfg.alpha_grid.empty()) throw std::invalid_argument("alpha sweep requested with an empty grid");
  return run_jobs(cfg, ctx, false);
}

ExperimentResult alpha_sweep(const ExperimentConfig& cfg, const GraphContext& ctx) {
  if (cfg.alpha_grid.empty()) throw std::invalid_argument("empty alpha grid");
  for (const double a : cfg.alpha_grid)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha grid value outside [0, 1]");
  if (std::none_of(cfg.models.begin(), cfg.models.end(), [](const ModelEntry& m) { return !m.is_ica; }))
    throw std::invalid_argument("alpha sweep needs at least one neural model");
  return run_jobs(cfg, ctx, true);
}

EmbeddingLayer parse_embedding_layer(std::string_view s) {
  if (s == "hidden") return EmbeddingLayer::hidden;
  if (s == "output") return EmbeddingLayer::output;
  if (s == "aux") return EmbeddingLayer::aux;
  throw std::invalid_argument("unknown embedding layer '" + std::string(s) + "' (expected hidden, output or aux)");
}

Dense2D embeddings(const Model& model, const GraphContext& ctx, EmbeddingLayer layer) {
  if (layer == EmbeddingLayer::aux && !model.has_aux())
    throw std::invalid_argument("aux embeddings requested on a model without an aux head");
  ForwardPass fp = model.forward(ctx.features());
  switch (layer) {
    case EmbeddingLayer::hidden: return fp.hidden.output;
    case EmbeddingLayer::output: return fp.output.output;
    case EmbeddingLayer::aux: return fp.aux->output;
  }
  throw std::logic_error("unreachable");
}

void write_embeddings_tsv(const std::filesystem::path& path, const Graph& g, const Dense2D& emb) {
  if (emb.rows() != g.num_nodes()) throw std::invalid_argument("embedding rows do not match node count");
  std::ofstream out = open_out(path);
  out << "node_id\ttrue_label";
  for (std::size_t j = 0; j < emb.cols(); ++j) out << "\tdim" << j;
  out << '\n';
  for (std::size_t i = 0; i < emb.rows(); ++i) {
    out << (g.node_names.empty() ? std::to_string(i) : g.node_names[i]) << '\t';
    const int y = g.labels[i];
    if (y < 0) out << "unlabeled";
    else if (!g.class_names.empty()) out << g.class_names[static_cast<std::size_t>(y)];
    else out << y;
    for (const double v : emb.row(i)) out << '\t' << fmt17(v);
    out << '\n';
  }
}

void write_results_csv(const std::filesystem::path& path, const std::vector<RunResult>& runs) {
  std::ofstream out = open_out(path);
  out << "model,variant,alpha,labels_per_class,run_index,split_seed,accuracy,epochs\n";
  for (const RunResult& r : runs) {
    out << r.model << ',' << variant_label(r) << ',' << fmt17(r.spec.effective_alpha()) << ','
        << r.labels_per_class << ',' << r.run_index << ',' << r.split_seed << ','
        << (r.failed ? std::string("nan") : fmt17(r.test_accuracy)) << ',' << r.epochs_run << '\n';
  }
}

std::vector<RunResult> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "model,variant,alpha,labels_per_class,run_index,split_seed,accuracy,epochs")
    throw std::runtime_error(path.string() + ": unexpected header");
  std::vector<RunResult> runs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 8 fields");
    RunResult r;
    r.model = f[0];
    r.is_ica = f[1] == "ica";
    if (!r.is_ica) r.spec.variant = parse_variant(f[1]);
    r.spec.alpha = std::stod(f[2]);
    r.labels_per_class = std::stoull(f[3]);
    r.run_index = std::stoull(f[4]);
    r.split_seed = std::stoull(f[5]);
    r.failed = f[6] == "nan";
    r.test_accuracy = r.failed ? 0.0 : std::stod(f[6]);
    r.epochs_run = std::stoull(f[7]);
    runs.push_back(std::move(r));
  }
  return runs;
}

void write_training_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out = open_out(path);
  out << "epoch,total,supervised,modularity_term,train_acc,test_acc\n";
  for (const EpochLog& e : log) {
    out << e.epoch << ',' << fmt17(e.loss.total) << ',' << fmt17(e.loss.supervised) << ','
        << fmt17(e.loss.modularity_term) << ',' << fmt17(e.train_accuracy) << ',' << fmt17(e.test_accuracy) << '\n';
  }
}

void write_aggregates_csv(const std::filesystem::path& path, const std::vector<AggregateResult>& aggs) {
  std::ofstream out = open_out(path);
  out << "model,variant,alpha,labels_per_class,mean_accuracy,standard_error,n_runs,n_failed\n";
  for (const AggregateResult& a : aggs) {
    out << a.model << ',' << (a.is_ica ? std::string("ica") : std::string(to_string(a.variant))) << ','
        << fmt17(a.alpha) << ',' << a.labels_per_class << ',' << fmt17(a.mean_accuracy) << ','
        << fmt17(a.standard_error) << ',' << a.n_runs << ',' << a.n_failed << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& sweep) {
  std::ofstream out = open_out(path);
  out << "model,labels_per_class,alpha,mean_accuracy,standard_error,n_runs,best\n";
  for (const SweepPoint& p : sweep) {
    out << p.model << ',' << p.labels_per_class << ',' << fmt17(p.alpha) << ',' << fmt17(p.mean_accuracy) << ','
        << fmt17(p.standard_error) << ',' << p.n_runs << ',' << (p.best ? 1 : 0) << '\n';
  }
}

void write_summary_md(const std::filesystem::path& path, const std::vector<AggregateResult>& aggs,
                      const std::vector<std::size_t>& budgets, const std::string& title) {
  std::vector<std::string> models;
  for (const auto& a : aggs)
    if (std::find(models.begin(), models.end(), a.model) == models.end()) models.push_back(a.model);

  std::ofstream out = open_out(path);
  out << "# " << title << "\n\nAccuracy (mean ± standard error) by labels per class.\n\n| Model |";
  for (const std::size_t b : budgets) out << ' ' << b << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < budgets.size(); ++i) out << "---|";
  out << '\n';
  bool any_failed = false;
  for (const auto& m : models) {
    out << "| " << m << " |";
    for (const std::size_t b : budgets) {
      const auto it = std::find_if(aggs.begin(), aggs.end(),
                                   [&](const AggregateResult& a) { return a.model == m && a.labels_per_class == b; });
      if (it == aggs.end() || it->n_runs == 0) {
        out << " - |";
        continue;
      }
      char cell[64];
      std::snprintf(cell, sizeof cell, " %.3f ± %.3f", it->mean_accuracy, it->standard_error);
      out << cell;
      if (it->variant != Variant::plain && !it->is_ica) {
        std::snprintf(cell, sizeof cell, " (α=%.2g)", it->alpha);
        out << cell;
      }
      if (it->n_failed > 0) {
        out << " [" << it->n_failed << " failed]";
        any_failed = true;
      }
      out << " |";
    }
    out << '\n';
  }
  if (any_failed) out << "\nFailed runs (non-finite loss) are excluded from the mean.\n";
}

std::vector<std::string> model_order(const ExperimentConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& m : cfg.models) names.push_back(m.name);
  return names;
}

}  // namespace modgcn
