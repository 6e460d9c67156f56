// dualgnn command-line driver.
//
//   dualgnn synth      -> cohort directory
//   dualgnn featurize  -> feature cache
//   dualgnn train      -> checkpoint + metrics JSON
//   dualgnn cv         -> k-fold or leave-one-patient-out report
//   dualgnn search     -> random-search trial table + best config
//   dualgnn ablate     -> additive or leave-one-out ablation table + SVG
//   dualgnn plv        -> PLV network-dynamics table (+ optional SVGs)
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error,
// 3 missing or unreadable input.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "dualgnn/checkpoint.hpp"
#include "dualgnn/config.hpp"
#include "dualgnn/feature_cache.hpp"
#include "dualgnn/recording_io.hpp"
#include "dualgnn/report.hpp"
#include "dualgnn/synth.hpp"
#include "dualgnn/version.hpp"

namespace fs = std::filesystem;
using namespace dualgnn;
using ojson = nlohmann::ordered_json;

namespace {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

// Hash of a set of files: sha256 over "relative-path\0file-sha256\n" lines in
// the given order.
std::string files_sha256(const fs::path& root, const std::vector<std::string>& rel) {
  std::string lines;
  for (const auto& r : rel) lines += r + '\0' + sha256_hex(io::read_file(root / r)) + "\n";
  return sha256_hex(lines);
}

std::vector<std::string> cohort_files(const fs::path& dir) {
  std::vector<std::string> files{"cohort.json"};
  for (const auto& m : cohort_manifest_names(dir)) {
    files.push_back(m);
    files.push_back(fs::path(m).replace_extension(".f32").string());
  }
  return files;
}

std::vector<std::string> feature_files(const fs::path& dir) {
  std::vector<std::string> files{"index.json"};
  const auto index = nlohmann::json::parse(io::read_file(dir / "index.json"));
  for (const auto& r : index.at("records")) files.push_back(r.at("file").get<std::string>());
  return files;
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  const char* env = std::getenv(kConfigEnvVar);
  c.config_path = env ? env : "";
  cmd->add_option("-c,--config", c.config_path,
                  std::string("TOML config file (default: $") + kConfigEnvVar + ", else built-in defaults)")
      ->capture_default_str();
  cmd->add_option("--set", c.overrides, "Override a config field, e.g. --set train.epochs=10 (repeatable)");
  cmd->add_option("--seed", c.seed, "Override the global seed")->default_str("config");
  cmd->add_option("--threads", c.threads, "Maximum worker threads")->default_str("config");
  if (with_out) cmd->add_option("-o,--out", c.out, "Output directory")->default_str("derived from [paths]");
}

RunConfig resolve_config(const Common& c) {
  auto overrides = c.overrides;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  if (c.threads) overrides.push_back("threads=" + std::to_string(*c.threads));
  if (!c.config_path.empty() && !fs::exists(c.config_path))
    throw IoError("config file not found: " + c.config_path);
  return load_config(c.config_path, overrides);
}

class Run {
 public:
  Run(std::string command, const RunConfig& cfg, fs::path out_dir)
      : command_(std::move(command)), cfg_(cfg), out_(std::move(out_dir)), start_(std::chrono::steady_clock::now()) {}

  const fs::path& out() const { return out_; }

  void input(const std::string& label, const fs::path& root, const std::vector<std::string>& files) {
    inputs_.push_back(ojson{{"label", label}, {"path", root.string()}, {"sha256", files_sha256(root, files)}});
  }

  // Reports are staged in memory and written only after the command succeeded.
  void stage(const std::string& name, std::string content) { staged_.emplace_back(name, std::move(content)); }

  void commit() {
    fs::create_directories(out_);
    ojson outputs = ojson::array();
    for (const auto& [name, content] : staged_) {
      io::write_file_atomic(out_ / name, content);
      outputs.push_back(ojson{{"file", name}, {"sha256", sha256_hex(content)}});
    }
    const auto cfg_json = config_json(cfg_);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    ojson manifest{{"format", "dualgnn-run-manifest"},
                   {"version", 1},
                   {"command", command_},
                   {"dualgnn_version", kVersion},
                   {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                   {"fftw_version", std::string(fftw_version)},
                   {"config_sha256", sha256_hex(cfg_json.dump())},
                   {"config", cfg_json},
                   {"inputs", inputs_},
                   {"outputs", outputs},
                   {"wall_time_s", wall}};
    io::write_file_atomic(out_ / (command_ + ".manifest.json"), manifest.dump(2) + "\n");
  }

 private:
  std::string command_;
  RunConfig cfg_;
  fs::path out_;
  std::chrono::steady_clock::time_point start_;
  ojson inputs_ = ojson::array();
  std::vector<std::pair<std::string, std::string>> staged_;
};

fs::path out_dir(const Common& c, const RunConfig& cfg, const std::string& sub) {
  return c.out.empty() ? fs::path(cfg.paths.out) / sub : fs::path(c.out);
}

void require_dir(const fs::path& p, const std::string& marker) {
  if (!fs::exists(p / marker)) throw IoError("missing input: " + (p / marker).string());
}

std::vector<GraphSample> load_features(const fs::path& dir, Run& run) {
  require_dir(dir, "index.json");
  run.input("features", dir, feature_files(dir));
  auto samples = read_feature_cache(dir);
  if (samples.empty()) throw EmptyResultError("feature cache is empty: " + dir.string());
  return samples;
}

// ---------------------------------------------------------------------------

int cmd_synth(const Common& c) {
  const RunConfig cfg = resolve_config(c);
  const fs::path dir = c.out.empty() ? fs::path(cfg.paths.cohort) : fs::path(c.out);
  fs::create_directories(dir);
  Run run("synth", cfg, dir);
  std::vector<std::string> names;
  std::size_t n_windows = 0;
  for (int p = 0; p < cfg.synth.n_patients; ++p) {
    for (const auto& rec : generate_patient(cfg.synth, p)) {
      names.push_back(recording_stem(rec) + ".json");
      save_recording(rec, dir / names.back());
      n_windows += window_count(rec.n_samples(), rec.fs, cfg.window);
    }
  }
  write_cohort_index(dir, names);
  run.commit();
  std::cout << "wrote " << names.size() << " recordings from " << cfg.synth.n_patients << " patients (" << n_windows
            << " windows of " << cfg.window.length_s << " s) to " << dir.string() << "\n";
  return 0;
}

int cmd_featurize(const Common& c, const std::string& cohort_arg) {
  const RunConfig cfg = resolve_config(c);
  const fs::path cohort = cohort_arg.empty() ? fs::path(cfg.paths.cohort) : fs::path(cohort_arg);
  require_dir(cohort, "cohort.json");
  const fs::path dir = c.out.empty() ? fs::path(cfg.paths.features) : fs::path(c.out);
  Run run("featurize", cfg, dir);
  run.input("cohort", cohort, cohort_files(cohort));
  std::vector<GraphSample> samples;
  std::map<std::string, int> outcome;
  for_each_recording(cohort, [&](const Recording& rec) {
    auto [it, fresh] = outcome.emplace(rec.patient_id, rec.outcome);
    if (!fresh && it->second != rec.outcome)
      throw ValidationError("patient " + rec.patient_id + " has inconsistent outcome labels");
    for (auto& s : featurize_recording(rec, cfg.window, cfg.featurize, cfg.threads)) samples.push_back(std::move(s));
  });
  write_feature_cache(dir, samples, cfg.featurize);
  run.commit();
  std::cout << "featurized " << samples.size() << " windows into " << dir.string() << "\n";
  return 0;
}

nlohmann::json normalizer_json(const Normalizer& nz) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"node_mean", vec(nz.node_mean)},   {"node_std", vec(nz.node_std)},
          {"graph_mean", vec(nz.graph_mean)}, {"graph_std", vec(nz.graph_std)},
          {"input_checksum", nz.input_checksum}};
}

int cmd_train(const Common& c, const std::string& features_arg) {
  const RunConfig cfg = resolve_config(c);
  Run run("train", cfg, out_dir(c, cfg, "train"));
  const auto samples = load_features(features_arg.empty() ? fs::path(cfg.paths.features) : fs::path(features_arg), run);
  const auto exp = cfg.experiment();
  const auto splits = kfold_split(sources_of(samples), exp.k, exp.train_frac, exp.split_seed);
  const auto& split = splits.at(static_cast<std::size_t>(cfg.fold));
  const auto fr = run_fold(samples, split.train, split.val, split.test, exp, "fold-" + std::to_string(cfg.fold));

  std::vector<const GraphSample*> train_ptrs;
  for (auto i : split.train) train_ptrs.push_back(&samples[i]);
  const auto nz = fit_normalizer(std::span<const GraphSample* const>(train_ptrs));

  nn::ModelConfig mc = cfg.model;
  mc.class_weights_node = fr.node_weights;
  mc.class_weights_graph = fr.graph_weights;
  run.stage("model.ckpt", nn::encode_checkpoint(fr.params, mc));
  run.stage("normalizer.json", normalizer_json(nz).dump(2) + "\n");
  ojson metrics{{"format", "dualgnn-train"}, {"version", 1}, {"fold", report::fold_json(fr)},
                {"history", report::history_json(fr.history)}};
  run.stage("metrics.json", metrics.dump(2) + "\n");
  run.commit();
  for (const auto& w : fr.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "fold " << cfg.fold << ": best epoch " << fr.best_epoch << ", test graph acc "
            << report::fixed(fr.test.graph.accuracy, 4) << ", node acc " << report::fixed(fr.test.node.accuracy, 4)
            << "\n";
  return 0;
}

int cmd_cv(const Common& c, const std::string& features_arg, const std::string& mode) {
  const RunConfig cfg = resolve_config(c);
  Run run("cv", cfg, out_dir(c, cfg, "cv-" + mode));
  const auto samples = load_features(features_arg.empty() ? fs::path(cfg.paths.features) : fs::path(features_arg), run);
  const auto result = mode == "kfold" ? run_kfold(samples, cfg.experiment()) : run_loocv(samples, cfg.experiment());
  const std::string title =
      mode == "kfold" ? std::to_string(cfg.k) + "-fold window-level cross-validation" : "Leave-one-patient-out";
  const std::string table = report::metrics_table(result.aggregate, title);
  run.stage("metrics.json", report::cv_json(result).dump(2) + "\n");
  run.stage("table.md", table);
  run.commit();
  for (const auto& f : result.folds)
    for (const auto& w : f.warnings) std::cerr << "warning: " << f.name << ": " << w << "\n";
  std::cout << table;
  return 0;
}

int cmd_search(const Common& c, const std::string& features_arg) {
  const RunConfig cfg = resolve_config(c);
  Run run("search", cfg, out_dir(c, cfg, "search"));
  const auto samples = load_features(features_arg.empty() ? fs::path(cfg.paths.features) : fs::path(features_arg), run);
  const auto res = hyper_search(samples, cfg.experiment(), cfg.search);
  if (res.best_trial < 0) throw DivergenceError("search: every trial diverged");
  const auto& best = res.trials[static_cast<std::size_t>(res.best_trial)];
  std::string toml = "# Best trial " + std::to_string(best.trial) + " (validation total loss " +
                     report::num(best.best_val_loss) + ")\n[model]\nhidden_dim = " + std::to_string(best.hidden_dim) +
                     "\nalpha = " + report::num(best.alpha) + "\ndropout = " + report::num(best.dropout) +
                     "\n\n[train]\nlearning_rate = " + report::num(best.learning_rate) + "\n";
  run.stage("trials.csv", report::trials_csv(res));
  run.stage("best_config.toml", toml);
  run.commit();
  std::cout << res.trials.size() << " trials; best trial " << best.trial << ": lr=" << best.learning_rate
            << " hidden_dim=" << best.hidden_dim << " alpha=" << best.alpha << " dropout=" << best.dropout
            << " val_loss=" << best.best_val_loss << "\n";
  return 0;
}

int cmd_ablate(const Common& c, const std::string& features_arg, const std::string& mode) {
  const RunConfig cfg = resolve_config(c);
  Run run("ablate", cfg, out_dir(c, cfg, "ablate-" + mode));
  const auto samples = load_features(features_arg.empty() ? fs::path(cfg.paths.features) : fs::path(features_arg), run);
  const auto res = mode == "additive" ? ablation_additive(samples, cfg.experiment())
                                      : ablation_leave_one_out(samples, cfg.experiment());
  run.stage("arms.csv", report::ablation_csv(res));
  run.stage("arms.json", report::ablation_json(res).dump(2) + "\n");
  run.stage("arms.svg", report::ablation_svg(res));
  run.commit();
  std::cout << report::ablation_csv(res);
  return 0;
}

int cmd_plv(const Common& c, const std::string& recording_arg, const std::string& cohort_arg) {
  const RunConfig cfg = resolve_config(c);
  Run run("plv", cfg, out_dir(c, cfg, "plv"));
  std::vector<fs::path> manifests;
  if (!recording_arg.empty()) {
    if (!fs::exists(recording_arg)) throw IoError("missing input: " + recording_arg);
    const fs::path p(recording_arg);
    run.input("recording", p.parent_path(), {p.filename().string(), fs::path(p.filename()).replace_extension(".f32").string()});
    manifests.push_back(p);
  } else {
    const fs::path cohort = cohort_arg.empty() ? fs::path(cfg.paths.cohort) : fs::path(cohort_arg);
    require_dir(cohort, "cohort.json");
    run.input("cohort", cohort, cohort_files(cohort));
    for (const auto& m : cohort_manifest_names(cohort)) manifests.push_back(cohort / m);
  }

  std::string summary = "patient_id,seizure_id,outcome,n_windows,density,avg_clustering,avg_soz_degree,avg_soz_plv\n";
  std::array<WindowNetworkMetrics, 2> class_sum{};
  std::array<int, 2> class_n{0, 0};
  for (const auto& path : manifests) {
    const Recording rec = load_recording(path);
    std::vector<PLVNetwork> nets;
    const auto rows = dynamics_report(rec, cfg.plv.dynamics, [&](std::size_t, const PLVNetwork& net) {
      if (cfg.plv.svg) nets.push_back(net);
    });
    const std::string stem = recording_stem(rec);
    run.stage(stem + ".csv", report::dynamics_csv(rows));
    if (cfg.plv.svg) {
      const auto nodes = top_degree_nodes(nets, cfg.plv.svg_nodes);
      for (std::size_t w = 0; w < nets.size(); ++w)
        run.stage(stem + "_W" + std::to_string(w + 1) + ".svg",
                  network_svg(nets[w], nodes, stem + " W" + std::to_string(w + 1) + " (class " +
                                                  std::to_string(rec.outcome) + ")"));
    }
    const auto m = mean_metrics(rows);
    summary += rec.patient_id + "," + rec.seizure_id + "," + std::to_string(rec.outcome) + "," +
               std::to_string(rows.size()) + "," + report::fixed(m.density, 6) + "," +
               report::fixed(m.avg_clustering, 6) + "," + report::fixed(m.avg_soz_degree, 6) + "," +
               report::fixed(m.avg_soz_plv, 6) + "\n";
    auto& acc = class_sum[static_cast<std::size_t>(rec.outcome)];
    acc.density += m.density;
    acc.avg_clustering += m.avg_clustering;
    acc.avg_soz_degree += m.avg_soz_degree;
    acc.avg_soz_plv += m.avg_soz_plv;
    ++class_n[static_cast<std::size_t>(rec.outcome)];
  }
  std::string by_class = "class,n_recordings,density,avg_clustering,avg_soz_degree,avg_soz_plv\n";
  for (int k = 0; k < 2; ++k) {
    const double n = std::max(class_n[static_cast<std::size_t>(k)], 1);
    const auto& s = class_sum[static_cast<std::size_t>(k)];
    by_class += std::to_string(k) + "," + std::to_string(class_n[static_cast<std::size_t>(k)]) + "," +
                report::fixed(s.density / n, 6) + "," + report::fixed(s.avg_clustering / n, 6) + "," +
                report::fixed(s.avg_soz_degree / n, 6) + "," + report::fixed(s.avg_soz_plv / n, 6) + "\n";
  }
  run.stage("recordings.csv", summary);
  run.stage("classes.csv", by_class);
  run.commit();
  std::cout << by_class;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-task graph neural network pipeline for multichannel recordings"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;
  std::string cohort, features, recording, mode;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled cohort");
  add_common(synth, common);

  auto* featurize = app.add_subcommand("featurize", "Segment a cohort and build the feature cache");
  add_common(featurize, common);
  featurize->add_option("--cohort", cohort, "Cohort directory")->default_str("[paths].cohort");

  auto* train = app.add_subcommand("train", "Train on one k-fold split and write a checkpoint");
  add_common(train, common);
  train->add_option("--features", features, "Feature cache directory")->default_str("[paths].features");

  auto* cv = app.add_subcommand("cv", "Cross-validate (k-fold or leave-one-patient-out)");
  add_common(cv, common);
  cv->add_option("--features", features, "Feature cache directory")->default_str("[paths].features");
  std::string cv_mode = "kfold";
  cv->add_option("--mode", cv_mode, "Protocol")->check(CLI::IsMember({"kfold", "loocv"}))->capture_default_str();

  auto* search = app.add_subcommand("search", "Random hyperparameter search on one fold");
  add_common(search, common);
  search->add_option("--features", features, "Feature cache directory")->default_str("[paths].features");

  auto* ablate = app.add_subcommand("ablate", "Feature-group ablation study");
  add_common(ablate, common);
  ablate->add_option("--features", features, "Feature cache directory")->default_str("[paths].features");
  std::string ablate_mode = "additive";
  ablate->add_option("--mode", ablate_mode, "Study design")
      ->check(CLI::IsMember({"additive", "loo"}))
      ->capture_default_str();

  auto* plv = app.add_subcommand("plv", "PLV network dynamics per recording");
  add_common(plv, common);
  plv->add_option("--recording", recording, "Single recording manifest (.json)")->default_str("none");
  plv->add_option("--cohort", cohort, "Cohort directory, used when --recording is absent")
      ->default_str("[paths].cohort");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) return cmd_synth(common);
    if (featurize->parsed()) return cmd_featurize(common, cohort);
    if (train->parsed()) return cmd_train(common, features);
    if (cv->parsed()) return cmd_cv(common, features, cv_mode);
    if (search->parsed()) return cmd_search(common, features);
    if (ablate->parsed()) return cmd_ablate(common, features, ablate_mode);
    if (plv->parsed()) return cmd_plv(common, recording, cohort);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
