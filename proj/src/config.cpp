#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "modgcn/harness.hpp"

namespace modgcn {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class LineError {
 public:
  LineError(const std::string& origin, std::size_t line) : prefix_(origin + ":" + std::to_string(line) + ": ") {}
  [[noreturn]] void fail(const std::string& msg) const { throw std::runtime_error(prefix_ + msg); }

  double real(const std::string& v) const {
    std::size_t pos = 0;
    double d = 0.0;
    try {
      d = std::stod(v, &pos);
    } catch (const std::exception&) {
      fail("expected a number, got '" + v + "'");
    }
    if (pos != v.size()) fail("expected a number, got '" + v + "'");
    return d;
  }

  std::uint64_t count(const std::string& v) const {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) fail("expected a non-negative integer, got '" + v + "'");
    return x;
  }

  template <class T, class F>
  std::vector<T> list(const std::string& v, F&& parse) const {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(parse(item));
    }
    return out;
  }

 private:
  std::string prefix_;
};

// Keys valid both globally (as defaults) and inside [model].
bool apply_spec_key(ModelSpec& spec, const std::string& key, const std::string& value, const LineError& at) {
  if (key == "encoder") spec.encoder = parse_encoder(value);
  else if (key == "variant") spec.variant = parse_variant(value);
  else if (key == "cheb_order") spec.cheb_order = at.count(value);
  else if (key == "hidden") spec.hidden_dim = at.count(value);
  else if (key == "k_aux") spec.k_aux = at.count(value);
  else if (key == "epochs") spec.epochs = at.count(value);
  else if (key == "lr") spec.lr = at.real(value);
  else if (key == "dropout") spec.dropout = at.real(value);
  else if (key == "weight_decay") spec.weight_decay = at.real(value);
  else return false;
  return true;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, const std::string& origin) {
  ExperimentConfig cfg;
  struct Pending {
    ModelEntry entry;
    std::vector<std::pair<std::string, std::string>> keys;
    std::size_t line;
  };
  std::vector<Pending> sections;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const LineError at(origin, line_no);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t != "[model]") at.fail("unknown section '" + t + "'");
      sections.push_back({ModelEntry{}, {}, line_no});
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) at.fail("expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (value.empty()) at.fail("missing value for '" + key + "'");
    if (!sections.empty()) {
      sections.back().keys.emplace_back(key, value);
      continue;
    }
    try {
      if (apply_spec_key(cfg.defaults, key, value, at)) continue;
      if (key == "dataset") cfg.dataset = value;
      else if (key == "features") cfg.features = parse_feature_mode(value);
      else if (key == "budgets") cfg.budgets = at.list<std::size_t>(value, [&](const std::string& s) { return at.count(s); });
      else if (key == "runs") {
        cfg.runs = at.count(value);
        if (cfg.runs == 0) at.fail("runs must be positive");
      }
      else if (key == "test_size") cfg.test_size = at.count(value);
      else if (key == "seed") cfg.seed = at.count(value);
      else if (key == "jobs") cfg.jobs = at.count(value);
      else if (key == "alpha_grid") cfg.alpha_grid = at.list<double>(value, [&](const std::string& s) { return at.real(s); });
      else if (key == "lambda_max") cfg.lambda_max = at.real(value);
      else if (key == "output_dir") cfg.output_dir = value;
      else if (key == "cache_dir") cfg.cache_dir = value;
      else at.fail("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      at.fail(e.what());
    }
  }

  // Model sections inherit the global defaults regardless of where they appear.
  for (auto& sec : sections) {
    ModelEntry& m = sec.entry;
    m.spec = cfg.defaults;
    std::optional<std::string> alpha;
    for (const auto& [key, value] : sec.keys) {
      const LineError at(origin, sec.line);
      try {
        if (key == "name") m.name = value;
        else if (key == "encoder" && value == "ica") m.is_ica = true;
        else if (key == "alpha") alpha = value;
        else if (key == "ica_max_iters") m.ica.max_iters = at.count(value);
        else if (!apply_spec_key(m.spec, key, value, at)) at.fail("unknown model key '" + key + "'");
      } catch (const std::invalid_argument& e) {
        at.fail(e.what());
      }
    }
    const LineError at(origin, sec.line);
    if (alpha) {
      if (*alpha == "sweep") m.sweep_alpha = true;
      else m.spec.alpha = at.real(*alpha);
    }
    if (m.name.empty()) m.name = m.is_ica ? "ICA" : m.spec.display_name();
    if (!m.is_ica) {
      try {
        m.spec.validate();
      } catch (const std::invalid_argument& e) {
        at.fail(e.what());
      }
    }
    cfg.models.push_back(std::move(m));
  }
  if (cfg.runs == 0) throw std::runtime_error(origin + ": runs must be positive");
  if (cfg.jobs == 0) cfg.jobs = 1;
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  return parse_experiment_config(in, path.string());
}

}  // namespace modgcn
