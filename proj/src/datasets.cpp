#include "modgcn/datasets.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "modgcn/rng.hpp"

namespace modgcn {
namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_number(std::string_view tok, const fs::path& file, std::size_t line_no) {
  std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw std::runtime_error(file.string() + ":" + std::to_string(line_no) +
                             ": expected a number, got '" + s + "'");
  }
  return v;
}

DatasetSource source_from_prefix(const fs::path& prefix, std::string name) {
  DatasetSource src{std::move(name), prefix, prefix};
  src.content_path += ".content";
  src.cites_path += ".cites";
  return src;
}

}  // namespace

DatasetSource resolve_dataset(std::string_view spec) {
  DatasetSource src;
  if (spec == "cora" || spec == "citeseer") {
    const char* env = std::getenv(kDataDirEnv);
    const fs::path root = env != nullptr && *env != '\0' ? fs::path(env) : fs::path("data");
    src = source_from_prefix(root / spec / spec, std::string(spec));
  } else {
    const fs::path p(spec);
    if (fs::is_directory(p)) {
      const std::string name = p.filename().empty() ? p.parent_path().filename().string()
                                                    : p.filename().string();
      src = source_from_prefix(p / name, name);
    } else {
      src = source_from_prefix(p, p.filename().string());
    }
  }
  for (const auto& f : {src.content_path, src.cites_path}) {
    if (!fs::exists(f)) {
      throw std::runtime_error("dataset file not found: " + f.string() + " (set " + kDataDirEnv +
                               " or pass a path)");
    }
  }
  return src;
}

Graph load_linqs(const DatasetSource& src, LoadStats* stats) {
  LoadStats local;
  std::ifstream content(src.content_path);
  if (!content) throw std::runtime_error("cannot open " + src.content_path.string());

  std::vector<std::string> ids;
  std::vector<std::string> class_of;
  std::vector<double> feats;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(content, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 3) {
      throw std::runtime_error(src.content_path.string() + ":" + std::to_string(line_no) +
                               ": expected '<id> <features...> <class>'");
    }
    if (width == 0) width = toks.size();
    if (toks.size() != width) {
      throw std::runtime_error(src.content_path.string() + ":" + std::to_string(line_no) +
                               ": " + std::to_string(toks.size()) + " columns, expected " +
                               std::to_string(width));
    }
    ids.emplace_back(toks.front());
    class_of.emplace_back(toks.back());
    for (std::size_t t = 1; t + 1 < toks.size(); ++t)
      feats.push_back(parse_number(toks[t], src.content_path, line_no));
  }
  if (ids.empty()) throw std::runtime_error(src.content_path.string() + ": empty file");
  local.content_lines = ids.size();

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index.emplace(ids[i], i).second) {
      throw std::runtime_error(src.content_path.string() + ": duplicate node id '" + ids[i] + "'");
    }
  }
  const std::set<std::string> class_set(class_of.begin(), class_of.end());
  const std::vector<std::string> class_names(class_set.begin(), class_set.end());
  std::vector<int> labels(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    labels[i] = static_cast<int>(std::lower_bound(class_names.begin(), class_names.end(), class_of[i]) -
                                 class_names.begin());
  }

  std::ifstream cites(src.cites_path);
  if (!cites) throw std::runtime_error("cannot open " + src.cites_path.string());
  std::vector<Edge> edges;
  line_no = 0;
  while (std::getline(cites, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) {
      throw std::runtime_error(src.cites_path.string() + ":" + std::to_string(line_no) +
                               ": expected '<cited> <citing>'");
    }
    ++local.citation_lines;
    const auto a = index.find(std::string(toks[0]));
    const auto b = index.find(std::string(toks[1]));
    if (a == index.end() || b == index.end()) {
      ++local.dropped_citations;
      continue;
    }
    edges.emplace_back(a->second, b->second);
  }
  if (local.citation_lines == 0) throw std::runtime_error(src.cites_path.string() + ": empty file");

  const std::size_t n = ids.size();
  Graph g = build_graph(n, edges, Dense2D(n, width - 2, std::move(feats)), std::move(labels),
                        class_names.size());
  g.node_names = std::move(ids);
  g.class_names = class_names;
  if (stats != nullptr) *stats = local;
  return g;
}

void write_linqs(const Graph& g, const fs::path& prefix) {
  auto name_of = [&](std::size_t i) {
    return g.node_names.empty() ? "n" + std::to_string(i) : g.node_names[i];
  };
  auto class_of = [&](int c) {
    return g.class_names.empty() ? "class_" + std::to_string(c) : g.class_names[static_cast<std::size_t>(c)];
  };
  fs::path content = prefix, cites = prefix;
  content += ".content";
  cites += ".cites";
  std::ofstream c(content);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    c << name_of(i);
    for (double v : g.features.row(i)) {
      std::ostringstream os;
      os.precision(17);
      os << v;
      c << '\t' << os.str();
    }
    c << '\t' << class_of(g.labels[i]) << '\n';
  }
  std::ofstream e(cites);
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    for (Index j : g.adjacency.row_cols(i))
      if (i < j) e << name_of(i) << '\t' << name_of(j) << '\n';
  if (!c || !e) throw std::runtime_error("failed to write dataset at " + prefix.string());
}

FeatureMode parse_feature_mode(std::string_view s) {
  if (s == "none") return FeatureMode::none;
  if (s == "row_normalize") return FeatureMode::row_normalize;
  throw std::invalid_argument("unknown feature mode '" + std::string(s) + "'");
}

std::string_view to_string(FeatureMode m) {
  return m == FeatureMode::none ? "none" : "row_normalize";
}

Graph preprocess_features(Graph g, FeatureMode mode) {
  if (mode == FeatureMode::none) return g;
  for (std::size_t i = 0; i < g.features.rows(); ++i) {
    auto row = g.features.row(i);
    double l1 = 0.0;
    for (double v : row) l1 += std::abs(v);
    if (l1 == 0.0) continue;
    for (double& v : row) v /= l1;
  }
  return g;
}

Split stratified_split(const Graph& g, const SplitSpec& spec) {
  std::vector<std::vector<std::size_t>> by_class(g.num_classes);
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    if (g.labels[i] != kUnlabeled) by_class[static_cast<std::size_t>(g.labels[i])].push_back(i);

  Rng rng(spec.seed);
  Split split;
  std::vector<char> used(g.num_nodes(), 0);
  for (std::size_t c = 0; c < g.num_classes; ++c) {
    auto& members = by_class[c];
    if (members.size() < spec.labels_per_class) {
      throw std::invalid_argument("stratified_split: class " + std::to_string(c) + " has " +
                                  std::to_string(members.size()) + " nodes, need " +
                                  std::to_string(spec.labels_per_class));
    }
    // Partial Fisher-Yates: the first labels_per_class slots are a uniform sample.
    for (std::size_t t = 0; t < spec.labels_per_class; ++t) {
      const std::size_t j = t + static_cast<std::size_t>(rng.below(members.size() - t));
      std::swap(members[t], members[j]);
      split.train_ids.push_back(members[t]);
      used[members[t]] = 1;
    }
  }

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    if (!used[i] && g.labels[i] != kUnlabeled) pool.push_back(i);
  if (pool.size() < spec.test_size) {
    throw std::invalid_argument("stratified_split: only " + std::to_string(pool.size()) +
                                " labeled nodes left for a test set of " +
                                std::to_string(spec.test_size));
  }
  for (std::size_t t = 0; t < spec.test_size; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(rng.below(pool.size() - t));
    std::swap(pool[t], pool[j]);
    split.test_ids.push_back(pool[t]);
  }
  return split;
}

std::uint64_t content_hash(const DatasetSource& src) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& path : {src.content_path, src.cites_path}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char buf[1 << 16];
    while (in) {
      in.read(buf, sizeof buf);
      for (std::streamsize i = 0; i < in.gcount(); ++i) {
        h ^= static_cast<unsigned char>(buf[i]);
        h *= 0x100000001b3ull;
      }
    }
    h ^= 0xff;  // file separator
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

constexpr char kCacheMagic[8] = {'M', 'G', 'C', 'N', 'G', 'R', 'P', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void put_vec(std::ostream& os, const std::vector<T>& v) {
  put<std::uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}
void put_strings(std::ostream& os, const std::vector<std::string>& v) {
  put<std::uint64_t>(os, v.size());
  for (const auto& s : v) {
    put<std::uint64_t>(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
}

template <class T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}
template <class T>
bool get_vec(std::istream& is, std::vector<T>& v) {
  std::uint64_t n = 0;
  if (!get(is, n) || n > (std::uint64_t{1} << 34)) return false;
  v.resize(n);
  return static_cast<bool>(is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))));
}
bool get_strings(std::istream& is, std::vector<std::string>& v) {
  std::uint64_t n = 0;
  if (!get(is, n) || n > (std::uint64_t{1} << 32)) return false;
  v.resize(n);
  for (auto& s : v) {
    std::uint64_t len = 0;
    if (!get(is, len) || len > (1u << 20)) return false;
    s.resize(len);
    if (!is.read(s.data(), static_cast<std::streamsize>(len))) return false;
  }
  return true;
}

}  // namespace

void save_graph_cache(const Graph& g, std::uint64_t hash, const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write graph cache " + path.string());
  os.write(kCacheMagic, sizeof kCacheMagic);
  put(os, hash);
  put<std::uint64_t>(os, g.num_nodes());
  put<std::uint64_t>(os, g.num_classes);
  put<std::uint64_t>(os, g.features.cols());
  put_vec(os, g.adjacency.row_offsets());
  put_vec(os, g.adjacency.col_indices());
  put_vec(os, g.adjacency.values());
  put_vec(os, g.features.values());
  put_vec(os, g.labels);
  put_strings(os, g.node_names);
  put_strings(os, g.class_names);
  if (!os) throw std::runtime_error("failed writing graph cache " + path.string());
}

std::optional<Graph> load_graph_cache(const fs::path& path, std::uint64_t hash) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[sizeof kCacheMagic];
  std::uint64_t stored = 0, n = 0, k = 0, c = 0;
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) return std::nullopt;
  if (!get(is, stored) || stored != hash || !get(is, n) || !get(is, k) || !get(is, c)) return std::nullopt;
  std::vector<std::size_t> offsets;
  std::vector<Index> cols;
  std::vector<double> vals, feats;
  std::vector<int> labels;
  Graph g;
  if (!get_vec(is, offsets) || !get_vec(is, cols) || !get_vec(is, vals) || !get_vec(is, feats) ||
      !get_vec(is, labels) || !get_strings(is, g.node_names) || !get_strings(is, g.class_names)) {
    return std::nullopt;
  }
  try {
    g.adjacency = CsrMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
    g.features = Dense2D(n, c, std::move(feats));
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  if (labels.size() != n) return std::nullopt;
  g.labels = std::move(labels);
  g.num_classes = k;
  g.num_edges = g.adjacency.nnz() / 2;
  return g;
}

Graph load_dataset(const DatasetSource& src, const std::optional<fs::path>& cache_dir,
                   LoadStats* stats) {
  if (!cache_dir) return load_linqs(src, stats);
  const std::uint64_t h = content_hash(src);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  const fs::path path = *cache_dir / (src.name + "-" + hex + ".bin");
  if (auto cached = load_graph_cache(path, h)) return std::move(*cached);
  Graph g = load_linqs(src, stats);
  fs::create_directories(*cache_dir);
  save_graph_cache(g, h, path);
  return g;
}

Graph synthetic_citation_graph(const SyntheticSpec& spec) {
  if (spec.num_classes == 0 || spec.num_nodes < spec.num_classes) {
    throw std::invalid_argument("synthetic_citation_graph: need at least one node per class");
  }
  Rng rng(spec.seed);
  const std::size_t n = spec.num_nodes;
  const std::size_t k = spec.num_classes;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % k);
  rng.shuffle(std::span<int>(labels));

  const double class_size = static_cast<double>(n) / static_cast<double>(k);
  const double p_in = std::min(1.0, spec.avg_degree_in / std::max(1.0, class_size - 1.0));
  const double p_out = std::min(1.0, spec.avg_degree_out / std::max(1.0, static_cast<double>(n) - class_size));
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < (labels[i] == labels[j] ? p_in : p_out)) edges.emplace_back(i, j);

  // Vocabulary: k disjoint topic blocks followed by shared noise words.
  const std::size_t topic_words = spec.vocab / (2 * k);
  const std::size_t noise_start = topic_words * k;
  Dense2D x(n, spec.vocab);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = static_cast<std::size_t>(labels[i]);
    for (std::size_t w = 0; w < spec.words_per_node; ++w) {
      std::size_t word;
      if (topic_words > 0 && rng.uniform() < spec.topic_fraction) {
        word = c * topic_words + static_cast<std::size_t>(rng.below(topic_words));
      } else {
        word = static_cast<std::size_t>(rng.below(spec.vocab));
        if (word < noise_start && rng.uniform() < 0.5) word = noise_start + word % (spec.vocab - noise_start);
      }
      x(i, word) = 1.0;
    }
  }
  return build_graph(n, edges, std::move(x), std::move(labels), k);
}

}  // namespace modgcn
