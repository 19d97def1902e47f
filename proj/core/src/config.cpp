#include "sparsegan/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "sparsegan/error.hpp"

namespace sparsegan {
namespace {

struct RawValue {
  std::string text;
  int line = 0;
  bool used = false;
};

struct RawConfig {
  std::string name;
  std::map<std::string, RawValue> values;

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const auto it = values.find(key);
    const int line = it == values.end() ? 0 : it->second.line;
    std::ostringstream os;
    os << name << ":" << line << ": key '" << key << "': " << msg;
    throw ConfigError(os.str());
  }

  bool has(const std::string& key) const { return values.count(key) != 0; }

  const std::string* get(const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return nullptr;
    it->second.used = true;
    return &it->second.text;
  }
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

RawConfig tokenize(std::string_view text, const std::string& name) {
  RawConfig raw;
  raw.name = name;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                          : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;

    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      std::ostringstream os;
      os << name << ":" << line_no << ": expected 'key = value', got '" << stripped << "'";
      throw ConfigError(os.str());
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty() || value.empty()) {
      std::ostringstream os;
      os << name << ":" << line_no << ": empty key or value";
      throw ConfigError(os.str());
    }
    if (raw.values.count(key)) {
      std::ostringstream os;
      os << name << ":" << line_no << ": duplicate key '" << key << "'";
      throw ConfigError(os.str());
    }
    raw.values[key] = RawValue{value, line_no, false};
  }
  return raw;
}

double parse_double(RawConfig& raw, const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty() || !std::isfinite(d))
    raw.fail(key, "expected a finite number, got '" + v + "'");
  return d;
}

std::uint64_t parse_u64(RawConfig& raw, const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    raw.fail(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

double get_double(RawConfig& raw, const std::string& key, double fallback) {
  const std::string* v = raw.get(key);
  return v ? parse_double(raw, key, *v) : fallback;
}

std::uint64_t get_u64(RawConfig& raw, const std::string& key, std::uint64_t fallback) {
  const std::string* v = raw.get(key);
  return v ? parse_u64(raw, key, *v) : fallback;
}

std::string get_string(RawConfig& raw, const std::string& key, const std::string& fallback) {
  const std::string* v = raw.get(key);
  return v ? unquote(*v) : fallback;
}

std::vector<std::size_t> get_u64_list(RawConfig& raw, const std::string& key,
                                      const std::vector<std::size_t>& fallback) {
  const std::string* v = raw.get(key);
  if (!v) return fallback;
  std::string s = trim(*v);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    raw.fail(key, "expected a list like [64, 64]");
  s = s.substr(1, s.size() - 2);
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    const std::string item = trim(std::string_view(s).substr(
        start, comma == std::string::npos ? s.size() - start : comma - start));
    if (!item.empty()) out.push_back(static_cast<std::size_t>(parse_u64(raw, key, item)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) raw.fail(key, "list must not be empty");
  return out;
}

ControllerKind parse_controller(RawConfig& raw, const std::string& text) {
  if (text == "static") return ControllerKind::Static;
  if (text == "sdst") return ControllerKind::Sdst;
  if (text == "dst_both") return ControllerKind::DstBoth;
  if (text == "dda") return ControllerKind::DdaStatic;
  if (text == "adapt_relax") return ControllerKind::AdaptRelax;
  if (text == "adapt_strict") return ControllerKind::AdaptStrict;
  if (text == "posthoc") return ControllerKind::Posthoc;
  raw.fail("controller", "unknown controller '" + text +
                             "' (expected static, sdst, dst_both, dda, adapt_relax, "
                             "adapt_strict or posthoc)");
}

void check_fraction(RawConfig& raw, const std::string& key, double v) {
  if (!(v > 0.0) || v > 1.0) raw.fail(key, "must be in (0, 1]");
}

}  // namespace

std::vector<std::size_t> ExperimentConfig::generator_dims() const {
  std::vector<std::size_t> dims;
  dims.push_back(latent_dim);
  dims.insert(dims.end(), g_widths.begin(), g_widths.end());
  dims.push_back(2);
  return dims;
}

std::vector<std::size_t> ExperimentConfig::discriminator_dims() const {
  std::vector<std::size_t> dims;
  dims.push_back(2);
  dims.insert(dims.end(), d_widths.begin(), d_widths.end());
  dims.push_back(1);
  return dims;
}

std::uint64_t ExperimentConfig::total_iterations() const {
  return controller == ControllerKind::Posthoc ? iterations + iterations / 2 : iterations;
}

ExperimentConfig parse_config(std::string_view text, const std::string& name) {
  RawConfig raw = tokenize(text, name);
  ExperimentConfig cfg;

  // Controller first: several defaults depend on it.
  {
    const std::string* v = raw.get("controller");
    if (!v) raw.fail("controller", "required key is missing");
    cfg.controller = parse_controller(raw, unquote(*v));
  }

  {
    const std::string kind = get_string(raw, "dataset", "ring");
    if (kind == "ring") {
      cfg.dataset.kind = DatasetSpec::Kind::Ring;
      cfg.dataset.count = static_cast<std::size_t>(get_u64(raw, "ring_k", 8));
      cfg.dataset.scale = get_double(raw, "ring_radius", 2.0);
      cfg.dataset.sigma = get_double(raw, "ring_sigma", 0.05);
    } else if (kind == "grid") {
      cfg.dataset.kind = DatasetSpec::Kind::Grid;
      cfg.dataset.count = static_cast<std::size_t>(get_u64(raw, "grid_m", 5));
      cfg.dataset.scale = get_double(raw, "grid_spacing", 1.0);
      cfg.dataset.sigma = get_double(raw, "grid_sigma", 0.05);
    } else {
      raw.fail("dataset", "unknown dataset '" + kind + "' (expected ring or grid)");
    }
    if (cfg.dataset.count == 0) raw.fail("dataset", "center count must be positive");
    if (!(cfg.dataset.scale > 0.0)) raw.fail("dataset", "scale must be positive");
    if (!(cfg.dataset.sigma > 0.0)) raw.fail("dataset", "sigma must be positive");
  }

  cfg.latent_dim = static_cast<std::size_t>(get_u64(raw, "latent_dim", 2));
  if (cfg.latent_dim == 0) raw.fail("latent_dim", "must be positive");
  cfg.g_widths = get_u64_list(raw, "g_widths", {64, 64});
  cfg.d_widths = get_u64_list(raw, "d_widths", {64, 64});
  for (std::size_t w : cfg.g_widths)
    if (w == 0) raw.fail("g_widths", "layer widths must be positive");
  for (std::size_t w : cfg.d_widths)
    if (w == 0) raw.fail("d_widths", "layer widths must be positive");

  {
    const std::string v = get_string(raw, "loss", "hinge");
    if (v == "hinge") cfg.loss = LossKind::Hinge;
    else if (v == "js") cfg.loss = LossKind::Js;
    else if (v == "wasserstein") cfg.loss = LossKind::Wasserstein;
    else raw.fail("loss", "unknown loss '" + v + "' (expected hinge, js or wasserstein)");
  }

  {
    const std::string v = get_string(raw, "alloc_mode", "er");
    if (v == "er") cfg.alloc_mode = AllocMode::Er;
    else if (v == "erk") cfg.alloc_mode = AllocMode::Erk;
    else if (v == "uniform") cfg.alloc_mode = AllocMode::Uniform;
    else raw.fail("alloc_mode", "unknown mode '" + v + "' (expected er, erk or uniform)");
  }
  {
    const std::string v = get_string(raw, "grow_mode", "gradient");
    if (v == "gradient") cfg.grow_mode = GrowMode::Gradient;
    else if (v == "random") cfg.grow_mode = GrowMode::Random;
    else raw.fail("grow_mode", "unknown mode '" + v + "' (expected gradient or random)");
  }
  {
    const std::string v = get_string(raw, "density_strategy", "balance");
    if (v == "balance") cfg.density_strategy = DensityStrategy::Balance;
    else if (v == "strong") cfg.density_strategy = DensityStrategy::Strong;
    else raw.fail("density_strategy", "unknown strategy '" + v + "' (expected balance or strong)");
  }

  if (!raw.has("d_g")) raw.fail("d_g", "required key is missing");
  cfg.d_g = get_double(raw, "d_g", 0.0);
  check_fraction(raw, "d_g", cfg.d_g);

  cfg.delta_d = get_double(raw, "delta_d", 0.05);
  if (!(cfg.delta_d > 1e-6) || cfg.delta_d >= 1.0)
    raw.fail("delta_d", "must be in (1e-6, 1)");

  cfg.d_max = get_double(raw, "d_max", 1.0);
  check_fraction(raw, "d_max", cfg.d_max);
  cfg.d_min = get_double(raw, "d_min", cfg.delta_d);
  check_fraction(raw, "d_min", cfg.d_min);
  if (cfg.d_min > cfg.d_max) raw.fail("d_min", "must not exceed d_max");

  switch (cfg.controller) {
    case ControllerKind::AdaptStrict:
      if (!raw.has("d_max"))
        raw.fail("d_max", "adapt_strict requires an explicit density cap");
      if (cfg.d_max >= 1.0)
        raw.fail("d_max", "adapt_strict caps the discriminator strictly below 1.0");
      break;
    case ControllerKind::AdaptRelax:
      if (cfg.d_max != 1.0)
        raw.fail("d_max", "adapt_relax always allows densification to 1.0");
      break;
    default:
      break;
  }

  if (raw.has("d_d_init")) {
    cfg.d_d_init = get_double(raw, "d_d_init", 0.0);
    check_fraction(raw, "d_d_init", cfg.d_d_init);
    if (cfg.controller == ControllerKind::Posthoc && cfg.d_d_init != 1.0)
      raw.fail("d_d_init", "posthoc keeps the discriminator dense");
  } else {
    switch (cfg.controller) {
      case ControllerKind::Posthoc:
        cfg.d_d_init = 1.0;
        break;
      case ControllerKind::DdaStatic:
      case ControllerKind::AdaptRelax:
      case ControllerKind::AdaptStrict:
        cfg.d_d_init = cfg.d_g;
        break;
      default:
        cfg.d_d_init =
            cfg.density_strategy == DensityStrategy::Strong ? cfg.d_max : cfg.d_g;
        break;
    }
  }
  switch (cfg.controller) {
    case ControllerKind::DdaStatic:
    case ControllerKind::AdaptRelax:
    case ControllerKind::AdaptStrict:
      if (cfg.d_d_init < cfg.d_min || cfg.d_d_init > cfg.d_max)
        raw.fail("d_d_init", "must lie within [d_min, d_max] for density controllers");
      break;
    default:
      break;
  }

  cfg.delta_t_g = get_u64(raw, "delta_t_g", 500);
  cfg.delta_t_d = get_u64(raw, "delta_t_d", 1000);
  if (cfg.delta_t_g == 0) raw.fail("delta_t_g", "must be positive");
  if (cfg.delta_t_d == 0) raw.fail("delta_t_d", "must be positive");

  cfg.gamma = get_double(raw, "gamma", 0.5);
  check_fraction(raw, "gamma", cfg.gamma);
  cfg.b_lo = get_double(raw, "b_lo", 0.45);
  cfg.b_hi = get_double(raw, "b_hi", 0.55);
  if (!(cfg.b_lo > 0.0) || !(cfg.b_lo < 1.0)) raw.fail("b_lo", "must be in (0, 1)");
  if (!(cfg.b_hi > 0.0) || !(cfg.b_hi < 1.0)) raw.fail("b_hi", "must be in (0, 1)");
  if (!(cfg.b_lo < cfg.b_hi)) raw.fail("b_lo", "must be strictly below b_hi");

  cfg.br_window = static_cast<std::size_t>(get_u64(raw, "br_window", 1000));
  if (cfg.br_window == 0) raw.fail("br_window", "must be positive");
  cfg.br_eval_interval = get_u64(raw, "br_eval_interval", 1);
  if (cfg.br_eval_interval == 0) raw.fail("br_eval_interval", "must be positive");

  cfg.adam.lr = get_double(raw, "lr", 2e-4);
  if (!(cfg.adam.lr > 0.0)) raw.fail("lr", "must be positive");
  cfg.adam.beta1 = get_double(raw, "beta1", 0.0);
  cfg.adam.beta2 = get_double(raw, "beta2", 0.9);
  if (cfg.adam.beta1 < 0.0 || cfg.adam.beta1 >= 1.0) raw.fail("beta1", "must be in [0, 1)");
  if (cfg.adam.beta2 < 0.0 || cfg.adam.beta2 >= 1.0) raw.fail("beta2", "must be in [0, 1)");
  cfg.adam.eps = get_double(raw, "eps", 1e-8);
  if (!(cfg.adam.eps > 0.0)) raw.fail("eps", "must be positive");

  cfg.n_dis = get_u64(raw, "n_dis", 5);
  if (cfg.n_dis == 0) raw.fail("n_dis", "must be positive");
  cfg.batch_g = static_cast<std::size_t>(get_u64(raw, "batch_g", 128));
  cfg.batch_d = static_cast<std::size_t>(get_u64(raw, "batch_d", 64));
  if (cfg.batch_g == 0) raw.fail("batch_g", "must be positive");
  if (cfg.batch_d == 0) raw.fail("batch_d", "must be positive");

  cfg.iterations = get_u64(raw, "iterations", 20000);
  if (cfg.iterations == 0) raw.fail("iterations", "must be positive");
  if (cfg.iterations < cfg.delta_t_g)
    raw.fail("iterations", "must cover at least one generator topology interval");

  cfg.ema_beta = get_double(raw, "ema_beta", 0.999);
  if (!(cfg.ema_beta > 0.0) || !(cfg.ema_beta < 1.0)) raw.fail("ema_beta", "must be in (0, 1)");

  cfg.seed = get_u64(raw, "seed", 1);
  cfg.eval_interval = get_u64(raw, "eval_interval", 500);
  if (cfg.eval_interval == 0) raw.fail("eval_interval", "must be positive");
  cfg.metric_samples = static_cast<std::size_t>(get_u64(raw, "metric_samples", 4096));
  if (cfg.metric_samples < 2) raw.fail("metric_samples", "need at least 2 samples");

  cfg.out = get_string(raw, "out", "");

  for (const auto& [key, value] : raw.values) {
    if (!value.used) {
      std::ostringstream os;
      os << name << ":" << value.line << ": unknown key '" << key << "'";
      throw ConfigError(os.str());
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path.filename().string());
}

const char* controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Static: return "static";
    case ControllerKind::Sdst: return "sdst";
    case ControllerKind::DstBoth: return "dst_both";
    case ControllerKind::DdaStatic: return "dda";
    case ControllerKind::AdaptRelax: return "adapt_relax";
    case ControllerKind::AdaptStrict: return "adapt_strict";
    case ControllerKind::Posthoc: return "posthoc";
  }
  return "?";
}

const char* loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::Hinge: return "hinge";
    case LossKind::Js: return "js";
    case LossKind::Wasserstein: return "wasserstein";
  }
  return "?";
}

const char* alloc_mode_name(AllocMode mode) {
  switch (mode) {
    case AllocMode::Er: return "er";
    case AllocMode::Erk: return "erk";
    case AllocMode::Uniform: return "uniform";
  }
  return "?";
}

const char* grow_mode_name(GrowMode mode) {
  switch (mode) {
    case GrowMode::Gradient: return "gradient";
    case GrowMode::Random: return "random";
  }
  return "?";
}

}  // namespace sparsegan
