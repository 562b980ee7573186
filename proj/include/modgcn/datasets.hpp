#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modgcn/graph.hpp"

namespace modgcn {

// A LINQS citation dataset: <name>.content and <name>.cites.
struct DatasetSource {
  std::string name;
  std::filesystem::path content_path;
  std::filesystem::path cites_path;
};

// Environment variable naming the directory that holds <name>/<name>.content.
inline constexpr const char* kDataDirEnv = "MODGCN_DATA_DIR";

// "cora" / "citeseer" resolve against $MODGCN_DATA_DIR (or ./data); anything
// else is a path: a directory containing <dir-name>.content, or a prefix to
// which .content / .cites are appended. Throws std::runtime_error if the
// files do not exist.
DatasetSource resolve_dataset(std::string_view spec);

struct LoadStats {
  std::size_t content_lines = 0;
  std::size_t citation_lines = 0;
  std::size_t dropped_citations = 0;  // referencing ids missing from .content
};

// Node order follows the .content file; class ids follow the lexicographic
// order of class names. Citations are treated as undirected.
// Throws std::runtime_error on malformed lines or empty files.
Graph load_linqs(const DatasetSource& src, LoadStats* stats = nullptr);

// Writes a graph in LINQS format (used for fixtures and synthetic data).
void write_linqs(const Graph& g, const std::filesystem::path& prefix);

enum class FeatureMode { none, row_normalize };
FeatureMode parse_feature_mode(std::string_view s);
std::string_view to_string(FeatureMode m);

// row_normalize divides each feature row by its L1 norm; zero rows stay zero.
Graph preprocess_features(Graph g, FeatureMode mode);

struct SplitSpec {
  std::size_t labels_per_class = 20;
  std::size_t test_size = 1000;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::size_t> train_ids;  // grouped by class, ascending within a class draw order
  std::vector<std::size_t> test_ids;

  friend bool operator==(const Split&, const Split&) = default;
};

// Uniformly samples labels_per_class nodes from every class, then test_size
// further labeled nodes from the remainder. Throws std::invalid_argument if a
// class is too small or too few nodes remain.
Split stratified_split(const Graph& g, const SplitSpec& spec);

// FNV-1a over both files' bytes.
std::uint64_t content_hash(const DatasetSource& src);

// Binary graph cache keyed by content hash.
void save_graph_cache(const Graph& g, std::uint64_t hash, const std::filesystem::path& path);
// nullopt if the file is missing, malformed or was written for another hash.
std::optional<Graph> load_graph_cache(const std::filesystem::path& path, std::uint64_t hash);

// load_linqs through the cache at cache_dir/<name>-<hash>.bin when given.
Graph load_dataset(const DatasetSource& src, const std::optional<std::filesystem::path>& cache_dir,
                   LoadStats* stats = nullptr);

// Planted-partition citation-like graph: balanced classes, intra-class edge
// density above inter-class, and binary bag-of-words features drawn from
// class-specific topic words mixed with shared noise words.
struct SyntheticSpec {
  std::size_t num_nodes = 600;
  std::size_t num_classes = 4;
  std::size_t vocab = 200;
  std::size_t words_per_node = 12;
  double topic_fraction = 0.35;  // share of a node's words drawn from its class topic
  double avg_degree_in = 3.0;
  double avg_degree_out = 1.0;
  std::uint64_t seed = 1;
};
Graph synthetic_citation_graph(const SyntheticSpec& spec);

}  // namespace modgcn
