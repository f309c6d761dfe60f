#include "mcppi/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <toml.hpp>

#include "mcppi/errors.hpp"

namespace mcppi {

const char* ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kNone: return "none";
    case Ablation::kNoMask: return "no_mask";
    case Ablation::kMlm: return "mlm";
    case Ablation::kMhm: return "mhm";
    case Ablation::kNoVq: return "no_vq";
  }
  return "?";
}

Ablation parse_ablation(const std::string& s) {
  if (s == "none") return Ablation::kNone;
  if (s == "no_mask") return Ablation::kNoMask;
  if (s == "mlm") return Ablation::kMlm;
  if (s == "mhm") return Ablation::kMhm;
  if (s == "no_vq") return Ablation::kNoVq;
  throw ConfigError("unknown ablation '" + s + "' (expected none|no_mask|mlm|mhm|no_vq)");
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(seq_window >= 1, "d_s must be >= 1");
  require(radius > 0.0, "d_r must be > 0");
  require(knn >= 1, "K must be >= 1");
  require(layers >= 1, "L must be >= 1");
  require(hidden >= 1, "F must be >= 1");
  require(codebook_size >= 1, "codebook_size must be >= 1");
  require(mask_ratio > 0.0 && mask_ratio < 1.0, "mask_ratio must be in (0, 1)");
  require(beta >= 0.0, "beta must be >= 0");
  require(gamma > 0.0, "gamma must be > 0");
  require(eta >= 0.0, "eta must be >= 0");
  require(ppi_layers >= 1, "L_s must be >= 1");
  require(ppi_hidden >= 1, "hidden_ppi must be >= 1");
  require(lr > 0.0, "lr must be > 0");
  require(pretrain_lr >= 0.0, "lr_pre must be >= 0");
  require(weight_decay >= 0.0, "weight_decay must be >= 0");
  require(num_classes == kNumInteractionTypes, "C must be 7");
}

RunConfig RunConfig::desk() {
  RunConfig c;
  c.layers = 1;
  c.hidden = 32;
  c.codebook_size = 64;
  c.ppi_hidden = 128;
  c.lr = 5e-3;
  c.pretrain_lr = 2e-3;
  c.pretrain_epochs = 60;
  c.ppi_epochs = 200;
  return c;
}

namespace {

template <typename T>
T read_value(const toml::node& node, const std::string& key) {
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node.value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node.value_exact<std::string>()) return *v;
  } else {
    if (auto v = node.value_exact<std::int64_t>()) {
      if (*v < 0) throw ConfigError("'" + key + "' must be non-negative");
      return static_cast<T>(*v);
    }
  }
  throw ConfigError("'" + key + "' has the wrong type");
}

using Setter = std::function<void(const toml::node&, const std::string&)>;

template <typename T>
Setter bind(T& field) {
  return [&field](const toml::node& n, const std::string& key) { field = read_value<T>(n, key); };
}

void apply_table(const toml::table& table, const std::map<std::string, Setter>& setters, const std::string& where) {
  for (const auto& [k, node] : table) {
    const std::string key(k.str());
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + where + key + "'");
    it->second(node, key);
  }
}

}  // namespace

ConfigFile parse_config_toml(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }

  ConfigFile cfg;
  RunConfig& r = cfg.run;
  std::string scheme = scheme_name(r.scheme), ablation = ablation_name(r.ablation);
  std::map<std::string, Setter> run_keys = {
      {"d_s", bind(r.seq_window)},
      {"d_r", bind(r.radius)},
      {"K", bind(r.knn)},
      {"L", bind(r.layers)},
      {"F", bind(r.hidden)},
      {"codebook_size", bind(r.codebook_size)},
      {"mask_ratio", bind(r.mask_ratio)},
      {"beta", bind(r.beta)},
      {"gamma", bind(r.gamma)},
      {"eta", bind(r.eta)},
      {"L_s", bind(r.ppi_layers)},
      {"hidden_ppi", bind(r.ppi_hidden)},
      {"lr", bind(r.lr)},
      {"lr_pre", bind(r.pretrain_lr)},
      {"weight_decay", bind(r.weight_decay)},
      {"E_pre", bind(r.pretrain_epochs)},
      {"E", bind(r.ppi_epochs)},
      {"C", bind(r.num_classes)},
      {"scheme", bind(scheme)},
      {"seed", bind(r.seed)},
      {"ablation", bind(ablation)},
  };

  SynthConfig& s = cfg.synth;
  std::map<std::string, Setter> synth_keys = {
      {"n_proteins", bind(s.n_proteins)}, {"n_classes", bind(s.n_classes)}, {"n_edges", bind(s.n_edges)},
      {"min_len", bind(s.length.min)},    {"max_len", bind(s.length.max)},  {"trait_dim", bind(s.trait_dim)},
      {"homophily", bind(s.homophily)},   {"seed", bind(s.seed)},
  };

  toml::table top;
  for (const auto& [k, node] : root) {
    if (k.str() == "synth") {
      const auto* t = node.as_table();
      if (!t) throw ConfigError("'synth' must be a table");
      apply_table(*t, synth_keys, "synth.");
    } else {
      top.insert(k, node);
    }
  }
  apply_table(top, run_keys, "");
  r.scheme = parse_scheme(scheme);
  r.ablation = parse_ablation(ablation);
  r.validate();
  return cfg;
}

ConfigFile load_config_toml(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_toml(ss.str());
}

std::string config_to_toml(const ConfigFile& cfg) {
  const RunConfig& r = cfg.run;
  auto u = [](std::size_t v) { return static_cast<std::int64_t>(v); };
  toml::table run{
      {"d_s", u(r.seq_window)},
      {"d_r", r.radius},
      {"K", u(r.knn)},
      {"L", u(r.layers)},
      {"F", u(r.hidden)},
      {"codebook_size", u(r.codebook_size)},
      {"mask_ratio", r.mask_ratio},
      {"beta", r.beta},
      {"gamma", r.gamma},
      {"eta", r.eta},
      {"L_s", u(r.ppi_layers)},
      {"hidden_ppi", u(r.ppi_hidden)},
      {"lr", r.lr},
      {"lr_pre", r.pretrain_lr},
      {"weight_decay", r.weight_decay},
      {"E_pre", u(r.pretrain_epochs)},
      {"E", u(r.ppi_epochs)},
      {"C", u(r.num_classes)},
      {"scheme", scheme_name(r.scheme)},
      {"seed", static_cast<std::int64_t>(r.seed)},
      {"ablation", ablation_name(r.ablation)},
  };
  const SynthConfig& s = cfg.synth;
  run.insert("synth", toml::table{
                          {"n_proteins", u(s.n_proteins)},
                          {"n_classes", u(s.n_classes)},
                          {"n_edges", u(s.n_edges)},
                          {"min_len", u(s.length.min)},
                          {"max_len", u(s.length.max)},
                          {"trait_dim", u(s.trait_dim)},
                          {"homophily", s.homophily},
                          {"seed", static_cast<std::int64_t>(s.seed)},
                      });
  std::ostringstream os;
  os << run << '\n';
  return os.str();
}

}  // namespace mcppi
