#pragma once

// Run configuration: one TOML file plus `section.key=value` overrides.
// Unknown sections or keys are rejected so typos do not pass silently.
// Every error names the offending field path.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "dualgnn/featurize.hpp"
#include "dualgnn/netdyn.hpp"
#include "dualgnn/nn.hpp"
#include "dualgnn/synth.hpp"
#include "dualgnn/train.hpp"

namespace dualgnn {

inline constexpr const char* kConfigEnvVar = "DUALGNN_CONFIG";

struct PathsConfig {
  std::string cohort = "out/cohort";
  std::string features = "out/features";
  std::string out = "out/reports";
};

struct PlvConfig {
  DynamicsOptions dynamics;
  bool svg = false;
  int svg_nodes = 20;
};

struct RunConfig {
  std::uint64_t seed = 0;  // copied into every module seed by resolve()
  int threads = 1;
  SynthConfig synth;
  WindowSpec window;
  FeaturizeOptions featurize;
  nn::ModelConfig model;
  TrainConfig train;
  int k = 10;
  double train_frac = 0.6;
  int fold = 0;  // k-fold split used by train, search and ablations
  SearchSpace search;
  PlvConfig plv;
  PathsConfig paths;

  // Propagates the global seed and thread count into module configs.
  void resolve() {
    synth.seed = seed;
    featurize.seed = seed;
    model.seed = seed;
    train.seed = seed;
    search.seed = seed;
  }

  ExperimentConfig experiment() const {
    ExperimentConfig e;
    e.model = model;
    e.train = train;
    e.k = k;
    e.train_frac = train_frac;
    e.split_seed = seed;
    e.threads = threads;
    e.ablation_fold = fold;
    return e;
  }

  void validate() const {
    if (threads < 1) throw ConfigError("threads", "must be >= 1");
    synth.validate();
    try {
      window.validate();
    } catch (const ValidationError& e) {
      throw ConfigError("window", e.what());
    }
    if (featurize.target_fs <= 0) throw ConfigError("featurize.target_fs", "must be > 0");
    if (synth.fs % featurize.target_fs != 0)
      throw ConfigError("featurize.target_fs", "must divide synth.fs");
    if (!(featurize.tau >= 0.0 && featurize.tau < 1.0)) throw ConfigError("featurize.tau", "must be in [0, 1)");
    if (featurize.n_rand < 1) throw ConfigError("featurize.n_rand", "must be >= 1");
    if (window.samples_per_window(featurize.target_fs) < static_cast<std::size_t>(featurize.nperseg))
      throw ConfigError("window.length_s", "window shorter than one Welch segment after downsampling");
    experiment().validate();
    search.validate();
    if (!(plv.dynamics.window_s > 0.0)) throw ConfigError("plv.window_s", "must be > 0");
    if (!(plv.dynamics.theta >= 0.0 && plv.dynamics.theta < 1.0)) throw ConfigError("plv.theta", "must be in [0, 1)");
    if (plv.svg_nodes < 1) throw ConfigError("plv.svg_nodes", "must be >= 1");
  }
};

namespace detail {

class TomlSection {
 public:
  TomlSection(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  std::string path(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  template <typename T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    if (!table_) return;
    const toml::node* node = table_->get(key);
    if (!node) return;
    read(*node, path(key), out);
  }

  template <typename T>
  void get_pair(const std::string& key, T& lo, T& hi) {
    used_.insert(key);
    if (!table_) return;
    const toml::node* node = table_->get(key);
    if (!node) return;
    const auto* arr = node->as_array();
    if (!arr || arr->size() != 2) throw ConfigError(path(key), "expected a two-element array [lo, hi]");
    read(*arr->get(0), path(key) + "[0]", lo);
    read(*arr->get(1), path(key) + "[1]", hi);
  }

  void check_unknown() const {
    if (!table_) return;
    for (auto&& [k, v] : *table_) {
      const std::string key(k.str());
      if (!used_.count(key) && !v.is_table()) throw ConfigError(path(key), "unknown key");
    }
  }

 private:
  static void read(const toml::node& n, const std::string& p, double& out) {
    if (auto v = n.value<double>()) {
      out = *v;
      return;
    }
    throw ConfigError(p, "expected a number");
  }
  static void read(const toml::node& n, const std::string& p, int& out) {
    if (n.is_integer()) {
      const auto v = *n.value<std::int64_t>();
      if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(p, "integer out of range");
      out = static_cast<int>(v);
      return;
    }
    throw ConfigError(p, "expected an integer");
  }
  static void read(const toml::node& n, const std::string& p, std::uint64_t& out) {
    if (n.is_integer()) {
      const auto v = *n.value<std::int64_t>();
      if (v < 0) throw ConfigError(p, "must be non-negative");
      out = static_cast<std::uint64_t>(v);
      return;
    }
    throw ConfigError(p, "expected a non-negative integer");
  }
  static void read(const toml::node& n, const std::string& p, bool& out) {
    if (n.is_boolean()) {
      out = *n.value<bool>();
      return;
    }
    throw ConfigError(p, "expected true or false");
  }
  static void read(const toml::node& n, const std::string& p, std::string& out) {
    if (n.is_string()) {
      out = *n.value<std::string>();
      return;
    }
    throw ConfigError(p, "expected a string");
  }
  static void read(const toml::node& n, const std::string& p, std::vector<int>& out) {
    const auto* arr = n.as_array();
    if (!arr) throw ConfigError(p, "expected an array of integers");
    out.clear();
    for (std::size_t i = 0; i < arr->size(); ++i) {
      int v = 0;
      read(*arr->get(i), p + "[" + std::to_string(i) + "]", v);
      out.push_back(v);
    }
  }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> used_;
};

inline const std::set<std::string>& known_sections() {
  static const std::set<std::string> s{"synth", "window", "featurize", "model", "train",
                                       "cv",    "search", "plv",       "paths"};
  return s;
}

}  // namespace detail

inline RunConfig config_from_toml(const toml::table& root) {
  RunConfig c;
  for (auto&& [k, v] : root) {
    const std::string key(k.str());
    if (v.is_table() && !detail::known_sections().count(key)) throw ConfigError(key, "unknown section");
  }
  detail::TomlSection top(&root, "");
  top.get("seed", c.seed);
  top.get("threads", c.threads);
  top.check_unknown();

  auto section = [&](const char* name) { return detail::TomlSection(root[name].as_table(), name); };

  auto s = section("synth");
  s.get("n_patients", c.synth.n_patients);
  s.get("n_seizure_free", c.synth.n_seizure_free);
  s.get_pair("channels", c.synth.channels_min, c.synth.channels_max);
  s.get("soz_fraction", c.synth.soz_fraction);
  s.get_pair("seizures", c.synth.seizures_min, c.synth.seizures_max);
  s.get("duration_s", c.synth.duration_s);
  s.get("fs", c.synth.fs);
  s.get("class0_plv", c.synth.class0_plv);
  s.get("class1_plv", c.synth.class1_plv);
  s.get("plv_spread", c.synth.plv_spread);
  s.get_pair("burst_band_hz", c.synth.burst_lo_hz, c.synth.burst_hi_hz);
  s.get("burst_amplitude", c.synth.burst_amplitude);
  s.get("jitter_bandwidth_hz", c.synth.jitter_bandwidth_hz);
  s.get("noise_exponent", c.synth.noise_exponent);
  s.check_unknown();

  auto w = section("window");
  w.get("length_s", c.window.length_s);
  w.get("overlap_s", c.window.overlap_s);
  w.check_unknown();

  auto f = section("featurize");
  f.get("target_fs", c.featurize.target_fs);
  f.get("tau", c.featurize.tau);
  f.get("n_rand", c.featurize.n_rand);
  f.check_unknown();

  auto m = section("model");
  m.get("hidden_dim", c.model.hidden_dim);
  m.get("dropout", c.model.dropout);
  m.get("alpha", c.model.alpha);
  m.check_unknown();

  auto t = section("train");
  t.get("epochs", c.train.epochs);
  t.get("learning_rate", c.train.learning_rate);
  t.get("batch_size", c.train.batch_size);
  t.get("patience", c.train.patience);
  t.check_unknown();

  auto cv = section("cv");
  cv.get("k", c.k);
  cv.get("train_frac", c.train_frac);
  cv.get("fold", c.fold);
  cv.check_unknown();

  auto se = section("search");
  se.get_pair("lr", c.search.lr_lo, c.search.lr_hi);
  se.get("hidden_dims", c.search.hidden_dims);
  se.get_pair("alpha", c.search.alpha_lo, c.search.alpha_hi);
  se.get_pair("dropout", c.search.dropout_lo, c.search.dropout_hi);
  se.get("n_trials", c.search.n_trials);
  se.check_unknown();

  auto p = section("plv");
  p.get("window_s", c.plv.dynamics.window_s);
  p.get("theta", c.plv.dynamics.theta);
  p.get("svg", c.plv.svg);
  p.get("svg_nodes", c.plv.svg_nodes);
  p.check_unknown();

  auto pa = section("paths");
  pa.get("cohort", c.paths.cohort);
  pa.get("features", c.paths.features);
  pa.get("out", c.paths.out);
  pa.check_unknown();

  c.resolve();
  return c;
}

// Applies "section.key=value" (or "key=value" at top level). The value is
// parsed as a TOML value; anything that does not parse is taken as a string.
inline void apply_override(toml::table& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like section.key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  toml::table parsed;
  try {
    parsed = toml::parse("v = " + raw);
  } catch (const toml::parse_error&) {
    parsed = toml::table{{"v", raw}};
  }
  toml::node* value = parsed.get("v");
  const auto dot = path.find('.');
  if (dot == std::string::npos) {
    root.insert_or_assign(path, *value);
    return;
  }
  const std::string sec = path.substr(0, dot), key = path.substr(dot + 1);
  if (key.empty() || key.find('.') != std::string::npos) throw ConfigError(path, "expected section.key");
  if (!root.contains(sec)) root.insert(sec, toml::table{});
  auto* tbl = root[sec].as_table();
  if (!tbl) throw ConfigError(sec, "not a section");
  tbl->insert_or_assign(key, *value);
}

inline toml::table parse_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("config file not found: " + path.string());
  try {
    return toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    const auto& src = e.source();
    throw ConfigError(path.string() + ":" + std::to_string(src.begin.line) + ":" + std::to_string(src.begin.column),
                      std::string(e.description()));
  }
}

// Empty path means built-in defaults.
inline RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
  toml::table root = path.empty() ? toml::table{} : parse_config_file(path);
  for (const auto& o : overrides) apply_override(root, o);
  RunConfig c = config_from_toml(root);
  c.validate();
  return c;
}

// Effective configuration, for hashing and for the run manifest.
inline nlohmann::ordered_json config_json(const RunConfig& c) {
  using oj = nlohmann::ordered_json;
  return oj{{"seed", c.seed},
            {"threads", c.threads},
            {"synth",
             {{"n_patients", c.synth.n_patients},
              {"n_seizure_free", c.synth.n_seizure_free},
              {"channels", {c.synth.channels_min, c.synth.channels_max}},
              {"soz_fraction", c.synth.soz_fraction},
              {"seizures", {c.synth.seizures_min, c.synth.seizures_max}},
              {"duration_s", c.synth.duration_s},
              {"fs", c.synth.fs},
              {"class0_plv", c.synth.class0_plv},
              {"class1_plv", c.synth.class1_plv},
              {"plv_spread", c.synth.plv_spread},
              {"burst_band_hz", {c.synth.burst_lo_hz, c.synth.burst_hi_hz}},
              {"burst_amplitude", c.synth.burst_amplitude},
              {"jitter_bandwidth_hz", c.synth.jitter_bandwidth_hz},
              {"noise_exponent", c.synth.noise_exponent}}},
            {"window", {{"length_s", c.window.length_s}, {"overlap_s", c.window.overlap_s}}},
            {"featurize",
             {{"target_fs", c.featurize.target_fs}, {"tau", c.featurize.tau}, {"n_rand", c.featurize.n_rand}}},
            {"model", {{"hidden_dim", c.model.hidden_dim}, {"dropout", c.model.dropout}, {"alpha", c.model.alpha}}},
            {"train",
             {{"epochs", c.train.epochs},
              {"learning_rate", c.train.learning_rate},
              {"batch_size", c.train.batch_size},
              {"patience", c.train.patience}}},
            {"cv", {{"k", c.k}, {"train_frac", c.train_frac}, {"fold", c.fold}}},
            {"search",
             {{"lr", {c.search.lr_lo, c.search.lr_hi}},
              {"hidden_dims", c.search.hidden_dims},
              {"alpha", {c.search.alpha_lo, c.search.alpha_hi}},
              {"dropout", {c.search.dropout_lo, c.search.dropout_hi}},
              {"n_trials", c.search.n_trials}}},
            {"plv",
             {{"window_s", c.plv.dynamics.window_s},
              {"theta", c.plv.dynamics.theta},
              {"svg", c.plv.svg},
              {"svg_nodes", c.plv.svg_nodes}}},
            {"paths", {{"cohort", c.paths.cohort}, {"features", c.paths.features}, {"out", c.paths.out}}}};
}

}  // namespace dualgnn
