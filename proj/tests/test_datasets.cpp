#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include "helpers.hpp"
#include "modgcn/datasets.hpp"

using namespace modgcn;

namespace {

DatasetSource write_fixture(const std::filesystem::path& dir, const std::string& content, const std::string& cites) {
  std::ofstream(dir / "fx.content") << content;
  std::ofstream(dir / "fx.cites") << cites;
  return {"fx", dir / "fx.content", dir / "fx.cites"};
}

}  // namespace

TEST_CASE("three-node fixture") {
  const auto dir = testing::temp_dir("fixture3");
  const auto src = write_fixture(dir, "p10\t1\t0\t1\tTheory\np20\t0\t1\t0\tAI\np30\t1\t1\t0\tTheory\n", "p10\tp20\n");
  LoadStats stats;
  const Graph g = load_linqs(src, &stats);
  CHECK(g.num_nodes() == 3);
  CHECK(g.num_edges == 1);
  CHECK(g.num_features() == 3);
  CHECK(g.num_classes == 2);
  // Lexicographic class order: AI = 0, Theory = 1.
  CHECK(g.class_names == std::vector<std::string>{"AI", "Theory"});
  CHECK(g.labels == std::vector<int>{1, 0, 1});
  CHECK(g.node_names == std::vector<std::string>{"p10", "p20", "p30"});
  CHECK(g.adjacency.at(0, 1) == 1.0);
  CHECK(g.adjacency.at(1, 0) == 1.0);
  CHECK(g.features(2, 1) == 1.0);
  CHECK(stats.content_lines == 3);
  CHECK(stats.dropped_citations == 0);
}

TEST_CASE("unknown citation ids are dropped and counted") {
  const auto dir = testing::temp_dir("unknown");
  const auto src = write_fixture(dir, "a 1 X\nb 0 Y\n", "a b\na ghost\n");
  LoadStats stats;
  const Graph g = load_linqs(src, &stats);
  CHECK(g.num_edges == 1);
  CHECK(stats.dropped_citations == 1);
  CHECK(stats.citation_lines == 2);
}

TEST_CASE("malformed files are rejected") {
  const auto dir = testing::temp_dir("malformed");
  CHECK_THROWS_AS(load_linqs(write_fixture(dir, "a 1 0 X\nb 1 Y\n", "")), std::runtime_error);
  CHECK_THROWS_AS(load_linqs(write_fixture(dir, "a 1 X\na 0 Y\n", "")), std::runtime_error);
  CHECK_THROWS_AS(load_linqs(write_fixture(dir, "", "")), std::runtime_error);
  CHECK_THROWS_AS(load_linqs(write_fixture(dir, "a 1 X\nb 0 Y\n", "a\n")), std::runtime_error);
  CHECK_THROWS_AS(load_linqs(write_fixture(dir, "a q X\n", "")), std::runtime_error);
}

TEST_CASE("resolve_dataset uses the data directory variable") {
  const auto dir = testing::temp_dir("resolve");
  std::filesystem::create_directories(dir / "cora");
  std::ofstream(dir / "cora" / "cora.content") << "a 1 X\n";
  std::ofstream(dir / "cora" / "cora.cites") << "";
  ::setenv(kDataDirEnv, dir.c_str(), 1);
  const DatasetSource src = resolve_dataset("cora");
  CHECK(src.content_path == dir / "cora" / "cora.content");
  CHECK_THROWS_AS(resolve_dataset("citeseer"), std::runtime_error);
  CHECK(resolve_dataset((dir / "cora" / "cora").string()).cites_path == dir / "cora" / "cora.cites");
  CHECK(resolve_dataset((dir / "cora").string()).content_path == dir / "cora" / "cora.content");
  CHECK_THROWS_AS(resolve_dataset((dir / "missing").string()), std::runtime_error);
  ::unsetenv(kDataDirEnv);
}

TEST_CASE("feature preprocessing") {
  Graph g = build_graph(3, {}, Dense2D::from_rows({{1, 1, 2}, {0, 0, 0}, {0, 3, 0}}), {0, 0, 0}, 1);
  const Graph none = preprocess_features(g, FeatureMode::none);
  CHECK(none.features == g.features);
  const Graph row = preprocess_features(g, FeatureMode::row_normalize);
  CHECK(row.features == Dense2D::from_rows({{0.25, 0.25, 0.5}, {0, 0, 0}, {0, 1, 0}}));
  CHECK(parse_feature_mode("none") == FeatureMode::none);
  CHECK_THROWS_AS(parse_feature_mode("l2"), std::invalid_argument);
}

TEST_CASE("stratified split: 7 classes, 5 per class") {
  SyntheticSpec syn;
  syn.num_nodes = 700;
  syn.num_classes = 7;
  const Graph g = synthetic_citation_graph(syn);
  const Split s = stratified_split(g, {5, 300, 42});
  CHECK(s.train_ids.size() == 35);
  CHECK(s.test_ids.size() == 300);
  std::set<std::size_t> train(s.train_ids.begin(), s.train_ids.end());
  for (std::size_t t : s.test_ids) CHECK(train.count(t) == 0);
  CHECK(stratified_split(g, {5, 300, 42}) == s);
  CHECK_FALSE(stratified_split(g, {5, 300, 43}) == s);
}

TEST_CASE("split balance and disjointness hold for 1000 seeds") {
  SyntheticSpec syn;
  syn.num_nodes = 200;
  syn.num_classes = 4;
  syn.seed = 3;
  const Graph g = synthetic_citation_graph(syn);
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 1000 && ok; ++seed) {
    const std::size_t per_class = 1 + seed % 10;
    const Split s = stratified_split(g, {per_class, 100, seed});
    std::vector<std::size_t> counts(4, 0);
    for (std::size_t i : s.train_ids) ++counts[static_cast<std::size_t>(g.labels[i])];
    ok = ok && std::all_of(counts.begin(), counts.end(), [&](std::size_t c) { return c == per_class; });
    std::vector<char> seen(g.num_nodes(), 0);
    for (std::size_t i : s.train_ids) ok = ok && !seen[i]++;
    for (std::size_t i : s.test_ids) ok = ok && !seen[i]++ && g.labels[i] != kUnlabeled;
    ok = ok && s.test_ids.size() == 100;
  }
  CHECK(ok);
}

TEST_CASE("split errors") {
  const Graph g = build_graph(4, {}, Dense2D(4, 1), {0, 0, 1, kUnlabeled}, 2);
  CHECK_THROWS_AS(stratified_split(g, {2, 0, 1}), std::invalid_argument);  // class 1 has one node
  CHECK_THROWS_AS(stratified_split(g, {1, 5, 1}), std::invalid_argument);  // not enough test nodes
  const Split s = stratified_split(g, {1, 1, 1});
  CHECK(s.test_ids.size() == 1);
  CHECK(g.labels[s.test_ids[0]] != kUnlabeled);
}

TEST_CASE("graph cache round trip") {
  const auto dir = testing::temp_dir("cache");
  SyntheticSpec syn;
  syn.num_nodes = 120;
  Graph g = synthetic_citation_graph(syn);
  write_linqs(g, dir / "syn");
  const DatasetSource src{"syn", dir / "syn.content", dir / "syn.cites"};
  const Graph loaded = load_linqs(src);
  const std::uint64_t h = content_hash(src);
  save_graph_cache(loaded, h, dir / "graph.bin");
  const auto back = load_graph_cache(dir / "graph.bin", h);
  REQUIRE(back.has_value());
  CHECK(*back == loaded);
  CHECK_FALSE(load_graph_cache(dir / "graph.bin", h + 1).has_value());
  CHECK_FALSE(load_graph_cache(dir / "nope.bin", h).has_value());

  const Graph via_cache1 = load_dataset(src, dir / "cache");
  const Graph via_cache2 = load_dataset(src, dir / "cache");
  CHECK(via_cache1 == loaded);
  CHECK(via_cache2 == loaded);
  CHECK(loaded.num_edges == g.num_edges);
  CHECK(loaded.features == g.features);
}

TEST_CASE("synthetic citation graph") {
  SyntheticSpec syn;
  const Graph a = synthetic_citation_graph(syn);
  CHECK(a == synthetic_citation_graph(syn));
  CHECK(a.num_nodes() == syn.num_nodes);
  CHECK(a.num_classes == syn.num_classes);
  std::size_t intra = 0, total = 0;
  for (std::size_t i = 0; i < a.num_nodes(); ++i)
    for (auto j : a.adjacency.row_cols(i)) {
      ++total;
      intra += a.labels[i] == a.labels[j];
    }
  CHECK(static_cast<double>(intra) / static_cast<double>(total) > 0.6);
  for (std::size_t i = 0; i < a.num_nodes(); ++i) {
    double s = 0.0;
    for (double v : a.features.row(i)) s += v;
    CHECK(s > 0.0);
  }
}
