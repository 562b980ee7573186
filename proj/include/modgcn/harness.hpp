#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "modgcn/datasets.hpp"
#include "modgcn/ica.hpp"
#include "modgcn/model.hpp"
#include "modgcn/objectives.hpp"

namespace modgcn {

struct EpochLog {
  std::size_t epoch = 0;
  LossReport loss;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct RunResult {
  std::string model;  // display name, e.g. "ChebNet-mod" or "ICA"
  bool is_ica = false;
  ModelSpec spec;
  std::size_t labels_per_class = 0;
  std::size_t run_index = 0;
  std::uint64_t split_seed = 0;
  double test_accuracy = 0.0;  // correct / |test_ids|
  LossReport final_losses;
  std::size_t epochs_run = 0;
  bool failed = false;
  std::string diagnostics;
  std::vector<EpochLog> log;  // filled only when requested
};

struct AggregateResult {
  std::string model;
  bool is_ica = false;
  Variant variant = Variant::plain;
  double alpha = 0.0;
  std::size_t labels_per_class = 0;
  double mean_accuracy = 0.0;
  double standard_error = 0.0;  // sample stddev / sqrt(n_runs)
  std::size_t n_runs = 0;       // successful runs aggregated
  std::size_t n_failed = 0;
};

// One row of the experiment matrix.
struct ModelEntry {
  std::string name;
  bool is_ica = false;
  ModelSpec spec;
  IcaConfig ica;
  // Sweep config.alpha_grid per budget and keep the best mean accuracy.
  bool sweep_alpha = false;
};

struct ExperimentConfig {
  std::string dataset = "cora";
  FeatureMode features = FeatureMode::row_normalize;
  std::vector<std::size_t> budgets{5, 8, 11, 14, 17, 20};
  std::size_t runs = 20;
  std::size_t test_size = 1000;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::vector<double> alpha_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::optional<double> lambda_max;
  std::filesystem::path output_dir = ".";
  std::optional<std::filesystem::path> cache_dir;
  ModelSpec defaults;  // inherited by every [model] section
  std::vector<ModelEntry> models;
};

// Parses the key = value / [model] section format documented in the README.
// Throws std::runtime_error("<origin>:<line>: ...") on errors.
ExperimentConfig parse_experiment_config(std::istream& in, const std::string& origin = "config");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Seeds shared by every model at the same (budget, run) so comparisons are paired.
std::uint64_t split_seed_for(std::uint64_t base, std::size_t labels_per_class, std::size_t run_index);
std::uint64_t init_seed_for(std::uint64_t split_seed);

double accuracy(const Dense2D& probabilities, const Graph& g, const std::vector<std::size_t>& ids);

struct TrainedModel {
  Model model;
  RunResult result;
};

// Full-batch training for spec.epochs epochs, no early stopping; accuracy is
// measured after the last update.
TrainedModel train_model(const ModelSpec& spec, const GraphContext& ctx, const Split& split,
                         std::uint64_t init_seed, bool record_log = false);
RunResult train_once(const ModelSpec& spec, const GraphContext& ctx, const Split& split,
                     std::uint64_t init_seed, bool record_log = false);

RunResult run_ica(const IcaConfig& cfg, const GraphContext& ctx, const Split& split);

AggregateResult aggregate_runs(const std::vector<const RunResult*>& runs);

struct SweepPoint {
  std::string model;
  std::size_t labels_per_class = 0;
  double alpha = 0.0;
  double mean_accuracy = 0.0;
  double standard_error = 0.0;
  std::size_t n_runs = 0;
  bool best = false;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::vector<AggregateResult> aggregates;  // one per (model, budget)
  std::vector<SweepPoint> sweep;            // full curves for swept models
};

// Invokes fn(i) for i in [0, count) on `jobs` worker threads. Results must be
// written to slot i so the outcome is independent of scheduling.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

ExperimentResult run_matrix(const ExperimentConfig& cfg, const GraphContext& ctx);

// Every non-ICA model in cfg swept over cfg.alpha_grid. Throws on an empty grid.
ExperimentResult alpha_sweep(const ExperimentConfig& cfg, const GraphContext& ctx);

enum class EmbeddingLayer { hidden, output, aux };
EmbeddingLayer parse_embedding_layer(std::string_view s);
// Throws std::invalid_argument for aux on a model without the aux head.
Dense2D embeddings(const Model& model, const GraphContext& ctx, EmbeddingLayer layer);

// node_id, true_label, coordinates...
void write_embeddings_tsv(const std::filesystem::path& path, const Graph& g, const Dense2D& emb);
// model,variant,alpha,labels_per_class,run_index,split_seed,accuracy,epochs
void write_results_csv(const std::filesystem::path& path, const std::vector<RunResult>& runs);
std::vector<RunResult> read_results_csv(const std::filesystem::path& path);
// epoch,total,supervised,modularity_term,train_acc,test_acc
void write_training_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log);
// model,variant,alpha,labels_per_class,mean_accuracy,standard_error,n_runs,n_failed
void write_aggregates_csv(const std::filesystem::path& path, const std::vector<AggregateResult>& aggs);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& sweep);
// Markdown table: one row per model, one column per label budget.
void write_summary_md(const std::filesystem::path& path, const std::vector<AggregateResult>& aggs,
                      const std::vector<std::size_t>& budgets, const std::string& title);

std::vector<std::string> model_order(const ExperimentConfig& cfg);

}  // namespace modgcn
