#include "modgcn/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace modgcn {
namespace {

constexpr const char* kMagic = "MODGCN-CKPT v1";

std::string hex(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error("checkpoint: bad number '" + s + "'");
  return d;
}

}  // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  const ModelSpec& s = model.spec();
  out << kMagic << '\n'
      << "encoder " << to_string(s.encoder) << '\n'
      << "cheb_order " << s.cheb_order << '\n'
      << "variant " << to_string(s.variant) << '\n'
      << "hidden_dim " << s.hidden_dim << '\n'
      << "alpha " << hex(s.alpha) << '\n'
      << "k_aux " << s.k_aux << '\n'
      << "epochs " << s.epochs << '\n'
      << "lr " << hex(s.lr) << '\n'
      << "seed " << s.seed << '\n'
      << "dropout " << hex(s.dropout) << '\n'
      << "weight_decay " << hex(s.weight_decay) << '\n';
  Model copy = model;
  for (const ParamRef& p : copy.parameters()) {
    const Dense2D& m = *p.value;
    out << "param " << p.name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto row = m.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << hex(row[j]);
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path, const GraphContext& ctx) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw std::runtime_error("checkpoint: missing header in " + path.string());

  ModelSpec spec;
  std::map<std::string, Dense2D> params;
  bool ended = false;
  std::string key;
  while (!ended && in >> key) {
    if (key == "end") ended = true;
    else if (key == "param") {
      std::string name;
      std::size_t rows = 0, cols = 0;
      if (!(in >> name >> rows >> cols)) throw std::runtime_error("checkpoint: bad param header");
      Dense2D m(rows, cols);
      for (double& v : m.values()) {
        std::string tok;
        if (!(in >> tok)) throw std::runtime_error("checkpoint: truncated param " + name);
        v = parse_double(tok);
      }
      params.emplace(name, std::move(m));
    } else {
      std::string value;
      if (!(in >> value)) throw std::runtime_error("checkpoint: missing value for " + key);
      if (key == "encoder") spec.encoder = parse_encoder(value);
      else if (key == "cheb_order") spec.cheb_order = std::stoull(value);
      else if (key == "variant") spec.variant = parse_variant(value);
      else if (key == "hidden_dim") spec.hidden_dim = std::stoull(value);
      else if (key == "alpha") spec.alpha = parse_double(value);
      else if (key == "k_aux") spec.k_aux = std::stoull(value);
      else if (key == "epochs") spec.epochs = std::stoull(value);
      else if (key == "lr") spec.lr = parse_double(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else if (key == "dropout") spec.dropout = parse_double(value);
      else if (key == "weight_decay") spec.weight_decay = parse_double(value);
      else throw std::runtime_error("checkpoint: unknown key " + key);
    }
  }
  if (!ended) throw std::runtime_error("checkpoint: truncated file " + path.string());

  Model model = build_model(spec, ctx, spec.seed);
  auto refs = model.parameters();
  if (refs.size() != params.size()) throw std::runtime_error("checkpoint: parameter count mismatch");
  for (const ParamRef& p : refs) {
    const auto it = params.find(p.name);
    if (it == params.end()) throw std::runtime_error("checkpoint: missing parameter " + p.name);
    if (!it->second.same_shape(*p.value))
      throw std::runtime_error("checkpoint: shape mismatch for " + p.name + ": file " + it->second.shape_string() +
                               ", model " + p.value->shape_string());
    *p.value = std::move(it->second);
  }
  return model;
}

}  // namespace modgcn
