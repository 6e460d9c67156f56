#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dualgnn/core_data.hpp"
#include "dualgnn/featurize.hpp"
#include "dualgnn/metrics.hpp"
#include "dualgnn/nn.hpp"
#include "dualgnn/parallel.hpp"

namespace dualgnn {

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 8;
  int patience = 10;  // epochs without validation improvement before stopping
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw ConfigError("train.epochs", "must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate", "must be > 0");
    if (batch_size < 1) throw ConfigError("train.batch_size", "must be >= 1");
    if (patience < 1) throw ConfigError("train.patience", "must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("train.beta1", "must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("train.beta2", "must be in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("train.epsilon", "must be > 0");
  }
};

struct ClassWeights {
  std::array<double, 2> w{1.0, 1.0};
  std::optional<std::string> warning;
};

// w_c = total / (2 * count_c), rescaled so the two weights average to 1.
// If a class is missing both weights are 1 and a warning is attached.
inline ClassWeights class_weights(std::span<const int> labels) {
  ClassWeights out;
  std::array<double, 2> count{0.0, 0.0};
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("class_weights: labels must be 0 or 1");
    count[static_cast<std::size_t>(y)] += 1.0;
  }
  if (count[0] == 0.0 || count[1] == 0.0) {
    out.warning = "class " + std::string(count[0] == 0.0 ? "0" : "1") +
                  " absent from training labels; using unit class weights";
    return out;
  }
  const double total = count[0] + count[1];
  std::array<double, 2> w{total / (2.0 * count[0]), total / (2.0 * count[1])};
  const double mean = 0.5 * (w[0] + w[1]);
  out.w = {w[0] / mean, w[1] / mean};
  return out;
}

// Adam with bias correction and a constant learning rate.
class Adam {
 public:
  Adam(Eigen::Index n, const TrainConfig& cfg)
      : cfg_(cfg), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    params.array() -= cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
  }

 private:
  TrainConfig cfg_;
  Eigen::VectorXd m_, v_;
  int t_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean total loss over the epoch's batches (train mode)
  double train_graph_acc = 0.0;
  double train_node_acc = 0.0;
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  double val_graph_acc = std::numeric_limits<double>::quiet_NaN();
  double val_node_acc = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  nn::ModelParams params;  // parameters of the selected epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
};

using InputSpan = std::span<const nn::GraphInput* const>;

namespace detail {
inline double accuracy(std::span<const int> truth, std::span<const int> pred) {
  if (truth.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += truth[i] == pred[i];
  return static_cast<double>(ok) / static_cast<double>(truth.size());
}
}  // namespace detail

// Adam on the combined loss. Windows are reshuffled every epoch; the returned
// parameters come from the epoch with the lowest validation total loss (the
// last epoch when there is no validation set). Training stops early after
// `patience` epochs without improvement.
inline TrainResult train_model(InputSpan train, InputSpan val, const nn::ModelConfig& model_cfg,
                               const TrainConfig& cfg) {
  model_cfg.validate();
  cfg.validate();
  if (train.empty()) throw ValidationError("train_model: empty training split");

  TrainResult res;
  nn::ModelParams params = nn::init_params(model_cfg);
  Adam opt(params.flat.size(), cfg);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const nn::GraphInput*> batch;
  int since_best = 0;
  std::uint64_t step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    std::vector<int> gy, gp, ny, np;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      batch.clear();
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      const InputSpan bs(batch);
      const auto fwd = nn::forward(params, bs, model_cfg, true, derive_seed(cfg.seed ^ 0xD80Full, step++));
      const auto grad = nn::backward(params, fwd, bs, model_cfg);
      if (!std::isfinite(grad.loss.total) || !grad.flat.allFinite())
        throw DivergenceError("train_model: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(n_batches) + " (lr=" + std::to_string(cfg.learning_rate) + ")");
      opt.step(params.flat, grad.flat);
      loss_sum += grad.loss.total;
      ++n_batches;
      const auto pred = nn::predict(fwd);
      const auto yg = nn::graph_labels(bs);
      const auto yn = nn::concat_node_labels(bs);
      gy.insert(gy.end(), yg.begin(), yg.end());
      gp.insert(gp.end(), pred.graph_classes.begin(), pred.graph_classes.end());
      ny.insert(ny.end(), yn.begin(), yn.end());
      np.insert(np.end(), pred.node_classes.begin(), pred.node_classes.end());
    }
    rec.train_loss = loss_sum / static_cast<double>(n_batches);
    rec.train_graph_acc = detail::accuracy(gy, gp);
    rec.train_node_acc = detail::accuracy(ny, np);

    if (!val.empty()) {
      const auto fwd = nn::forward(params, val, model_cfg, false);
      const auto loss = nn::compute_loss(fwd, val, model_cfg);
      const auto pred = nn::predict(fwd);
      rec.val_loss = loss.total;
      rec.val_graph_acc = detail::accuracy(nn::graph_labels(val), pred.graph_classes);
      rec.val_node_acc = detail::accuracy(nn::concat_node_labels(val), pred.node_classes);
      if (!std::isfinite(loss.total))
        throw DivergenceError("train_model: non-finite validation loss at epoch " + std::to_string(epoch));
      if (loss.total < res.best_val_loss) {
        res.best_val_loss = loss.total;
        res.best_epoch = epoch;
        res.params = params;
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      res.best_epoch = epoch;
      res.params = params;
    }
    res.history.push_back(rec);
    if (!val.empty() && since_best >= cfg.patience) break;
  }
  return res;
}

// Test-set metrics in eval mode; graphs are evaluated in chunks.
inline MetricsReport evaluate(const nn::ModelParams& params, InputSpan test, const nn::ModelConfig& model_cfg) {
  if (test.empty()) throw EmptyResultError("evaluate: empty test set");
  std::vector<int> gy, gp, ny, np;
  constexpr std::size_t kChunk = 64;
  for (std::size_t start = 0; start < test.size(); start += kChunk) {
    const auto chunk = test.subspan(start, std::min(kChunk, test.size() - start));
    const auto pred = nn::predict(nn::forward(params, chunk, model_cfg, false));
    const auto yg = nn::graph_labels(chunk);
    const auto yn = nn::concat_node_labels(chunk);
    gy.insert(gy.end(), yg.begin(), yg.end());
    gp.insert(gp.end(), pred.graph_classes.begin(), pred.graph_classes.end());
    ny.insert(ny.end(), yn.begin(), yn.end());
    np.insert(np.end(), pred.node_classes.begin(), pred.node_classes.end());
  }
  return {classification_metrics(gy, gp), classification_metrics(ny, np)};
}

// ---------------------------------------------------------------------------
// Experiment protocols

struct ExperimentConfig {
  nn::ModelConfig model;
  TrainConfig train;
  int k = 10;
  double train_frac = 0.6;
  std::uint64_t split_seed = 0;
  int threads = 1;
  FeatureGroupSet groups = FeatureGroupSet::all();
  bool zero_graph_features = false;
  int ablation_fold = 0;  // fold of the k-fold split used by ablations and search

  void validate() const {
    model.validate();
    train.validate();
    if (k < 2) throw ConfigError("cv.k", "must be >= 2");
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("cv.train_frac", "must be in (0, 1)");
    if (threads < 1) throw ConfigError("threads", "must be >= 1");
    if (ablation_fold < 0 || ablation_fold >= k) throw ConfigError("cv.ablation_fold", "must be in [0, k)");
  }
};

struct FoldResult {
  std::string name;  // "fold-3" or the held-out patient id
  MetricsReport test;
  std::size_t n_train = 0, n_val = 0, n_test = 0;
  std::uint64_t normalizer_checksum = 0;  // checksum of the windows the normalizer was fitted on
  std::array<double, 2> node_weights{1.0, 1.0};
  std::array<double, 2> graph_weights{1.0, 1.0};
  std::vector<std::string> warnings;
  int best_epoch = 0;
  std::vector<EpochRecord> history;
  nn::ModelParams params;
};

// Fits the normalizer on train only, applies masking, derives class weights
// from training labels, trains, and evaluates on the test indices.
inline FoldResult run_fold(std::span<const GraphSample> samples, const std::vector<std::size_t>& train_idx,
                           const std::vector<std::size_t>& val_idx, const std::vector<std::size_t>& test_idx,
                           const ExperimentConfig& cfg, std::string name) {
  FoldResult fr;
  fr.name = std::move(name);
  fr.n_train = train_idx.size();
  fr.n_val = val_idx.size();
  fr.n_test = test_idx.size();
  if (train_idx.empty()) throw ValidationError("run_fold: empty training split");

  std::vector<const GraphSample*> train_ptrs;
  for (auto i : train_idx) train_ptrs.push_back(&samples[i]);
  const Normalizer nz = fit_normalizer(std::span<const GraphSample* const>(train_ptrs));
  fr.normalizer_checksum = nz.input_checksum;

  auto prepare = [&](const std::vector<std::size_t>& idx) {
    std::vector<nn::GraphInput> out;
    out.reserve(idx.size());
    for (auto i : idx) {
      GraphSample s = mask_feature_groups(apply_normalizer(samples[i], nz), cfg.groups);
      if (cfg.zero_graph_features) s = zero_graph_features(s);
      out.push_back(nn::make_input(s));
    }
    return out;
  };
  const auto train_in = prepare(train_idx);
  const auto val_in = prepare(val_idx);
  const auto test_in = prepare(test_idx);
  auto ptrs = [](const std::vector<nn::GraphInput>& v) {
    std::vector<const nn::GraphInput*> p;
    for (const auto& g : v) p.push_back(&g);
    return p;
  };
  const auto train_p = ptrs(train_in), val_p = ptrs(val_in), test_p = ptrs(test_in);

  nn::ModelConfig mc = cfg.model;
  const auto nw = class_weights(nn::concat_node_labels(train_p));
  const auto gw = class_weights(nn::graph_labels(train_p));
  mc.class_weights_node = nw.w;
  mc.class_weights_graph = gw.w;
  if (nw.warning) fr.warnings.push_back("node: " + *nw.warning);
  if (gw.warning) fr.warnings.push_back("graph: " + *gw.warning);
  fr.node_weights = nw.w;
  fr.graph_weights = gw.w;

  auto trained = train_model(train_p, val_p, mc, cfg.train);
  fr.best_epoch = trained.best_epoch;
  fr.history = std::move(trained.history);
  if (!test_p.empty()) fr.test = evaluate(trained.params, test_p, mc);
  fr.params = std::move(trained.params);
  return fr;
}

struct CvResult {
  std::string mode;  // "kfold" or "loocv"
  std::vector<FoldResult> folds;
  AggregateReport aggregate;
};

inline std::vector<WindowSource> sources_of(std::span<const GraphSample> samples) {
  std::vector<WindowSource> s;
  s.reserve(samples.size());
  for (const auto& x : samples) s.push_back(x.source);
  return s;
}

inline AggregateReport aggregate_folds(const std::vector<FoldResult>& folds) {
  std::vector<MetricsReport> reports;
  for (const auto& f : folds) reports.push_back(f.test);
  return aggregate(reports);
}

// Window-level k-fold cross-validation with 60/20/20 splits.
inline CvResult run_kfold(std::span<const GraphSample> samples, const ExperimentConfig& cfg) {
  cfg.validate();
  const auto keys = sources_of(samples);
  const auto splits = kfold_split(keys, cfg.k, cfg.train_frac, cfg.split_seed);
  CvResult r;
  r.mode = "kfold";
  r.folds.resize(splits.size());
  parallel_for(splits.size(), cfg.threads, [&](std::size_t f) {
    ExperimentConfig fc = cfg;
    fc.model.seed = derive_seed(cfg.model.seed, f);
    fc.train.seed = derive_seed(cfg.train.seed, f);
    r.folds[f] = run_fold(samples, splits[f].train, splits[f].val, splits[f].test, fc, "fold-" + std::to_string(f));
  });
  r.aggregate = aggregate_folds(r.folds);
  return r;
}

// Leave-one-patient-out. Early stopping uses a seeded 20% window-level
// validation slice carved from the training patients.
inline CvResult run_loocv(std::span<const GraphSample> samples, const ExperimentConfig& cfg) {
  cfg.validate();
  const auto keys = sources_of(samples);
  const auto splits = leave_one_patient_out(keys);
  CvResult r;
  r.mode = "loocv";
  r.folds.resize(splits.size());
  parallel_for(splits.size(), cfg.threads, [&](std::size_t f) {
    const auto& s = splits[f];
    // Canonical order of the training windows, then a seeded shuffle.
    std::vector<std::size_t> train = s.train;
    std::sort(train.begin(), train.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    Rng rng(derive_seed(cfg.split_seed, "loocv-val-" + s.test_patient));
    std::shuffle(train.begin(), train.end(), rng);
    const std::size_t n_val = train.size() / 5;
    std::vector<std::size_t> val(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> fit(train.begin() + static_cast<std::ptrdiff_t>(n_val), train.end());
    std::sort(val.begin(), val.end());
    std::sort(fit.begin(), fit.end());
    ExperimentConfig fc = cfg;
    fc.model.seed = derive_seed(cfg.model.seed, f);
    fc.train.seed = derive_seed(cfg.train.seed, f);
    r.folds[f] = run_fold(samples, fit, val, s.test, fc, s.test_patient);
  });
  r.aggregate = aggregate_folds(r.folds);
  return r;
}

// ---------------------------------------------------------------------------
// Hyperparameter search

struct SearchSpace {
  double lr_lo = 1e-4;
  double lr_hi = 1e-2;
  std::vector<int> hidden_dims{32, 64, 128};
  double alpha_lo = 0.1, alpha_hi = 0.9;
  double dropout_lo = 0.0, dropout_hi = 0.5;
  int n_trials = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lr_lo > 0.0 && lr_lo <= lr_hi)) throw ConfigError("search.lr", "need 0 < lr_lo <= lr_hi");
    if (hidden_dims.empty()) throw ConfigError("search.hidden_dims", "must not be empty");
    for (int d : hidden_dims)
      if (d < 1) throw ConfigError("search.hidden_dims", "entries must be >= 1");
    if (!(alpha_lo >= 0.0 && alpha_lo <= alpha_hi && alpha_hi <= 1.0))
      throw ConfigError("search.alpha", "need 0 <= alpha_lo <= alpha_hi <= 1");
    if (!(dropout_lo >= 0.0 && dropout_lo <= dropout_hi && dropout_hi < 1.0))
      throw ConfigError("search.dropout", "need 0 <= dropout_lo <= dropout_hi < 1");
    if (n_trials < 1) throw ConfigError("search.n_trials", "must be >= 1");
  }
};

struct TrialRecord {
  int trial = 0;
  double learning_rate = 0.0;
  int hidden_dim = 0;
  double alpha = 0.0;
  double dropout = 0.0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  double val_graph_acc = 0.0;
  double val_node_acc = 0.0;
  std::string status = "ok";
};

struct SearchResult {
  std::vector<TrialRecord> trials;
  int best_trial = -1;
  ExperimentConfig best;
};

// Seeded random search; every trial trains `cfg.train.epochs` epochs on the
// same fold and is scored by its best validation total loss.
inline SearchResult hyper_search(std::span<const GraphSample> samples, const ExperimentConfig& cfg,
                                 const SearchSpace& space) {
  cfg.validate();
  space.validate();
  const auto keys = sources_of(samples);
  const auto splits = kfold_split(keys, cfg.k, cfg.train_frac, cfg.split_seed);
  const auto& split = splits[static_cast<std::size_t>(cfg.ablation_fold)];

  SearchResult res;
  res.trials.resize(static_cast<std::size_t>(space.n_trials));
  std::vector<ExperimentConfig> trial_cfg(res.trials.size(), cfg);
  Rng rng(derive_seed(space.seed, "search"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_dim(0, space.hidden_dims.size() - 1);
  for (std::size_t t = 0; t < res.trials.size(); ++t) {
    auto& tr = res.trials[t];
    tr.trial = static_cast<int>(t);
    tr.learning_rate = std::exp(std::log(space.lr_lo) + unit(rng) * (std::log(space.lr_hi) - std::log(space.lr_lo)));
    tr.hidden_dim = space.hidden_dims[pick_dim(rng)];
    tr.alpha = space.alpha_lo + unit(rng) * (space.alpha_hi - space.alpha_lo);
    tr.dropout = space.dropout_lo + unit(rng) * (space.dropout_hi - space.dropout_lo);
    auto& c = trial_cfg[t];
    c.train.learning_rate = tr.learning_rate;
    c.model.hidden_dim = tr.hidden_dim;
    c.model.alpha = tr.alpha;
    c.model.dropout = tr.dropout;
  }

  parallel_for(res.trials.size(), cfg.threads, [&](std::size_t t) {
    auto& tr = res.trials[t];
    try {
      const auto fr = run_fold(samples, split.train, split.val, split.test, trial_cfg[t], "trial-" + std::to_string(t));
      const auto& best = fr.history.at(static_cast<std::size_t>(fr.best_epoch));
      tr.best_val_loss = best.val_loss;
      tr.best_epoch = fr.best_epoch;
      tr.val_graph_acc = best.val_graph_acc;
      tr.val_node_acc = best.val_node_acc;
    } catch (const DivergenceError&) {
      tr.status = "diverged";
    }
  });

  for (const auto& tr : res.trials)
    if (tr.status == "ok" && std::isfinite(tr.best_val_loss) &&
        (res.best_trial < 0 || tr.best_val_loss < res.trials[static_cast<std::size_t>(res.best_trial)].best_val_loss))
      res.best_trial = tr.trial;
  if (res.best_trial >= 0) res.best = trial_cfg[static_cast<std::size_t>(res.best_trial)];
  return res;
}

// ---------------------------------------------------------------------------
// Ablations

struct AblationArm {
  std::string name;
  FeatureGroupSet groups;
  bool graph_features = true;
  MetricsReport test;
};

struct AblationResult {
  std::string mode;   // "additive" or "loo"
  AblationArm base;   // all node groups and G
  std::vector<AblationArm> arms;
};

namespace detail {
inline AblationArm run_arm(std::span<const GraphSample> samples, const SplitIndices& split, const ExperimentConfig& cfg,
                           std::string name, FeatureGroupSet groups, bool graph_features) {
  ExperimentConfig c = cfg;
  c.groups = groups;
  c.zero_graph_features = !graph_features;
  AblationArm arm{std::move(name), groups, graph_features, {}};
  arm.test = run_fold(samples, split.train, split.val, split.test, c, arm.name).test;
  return arm;
}

inline AblationResult run_arms(std::span<const GraphSample> samples, const ExperimentConfig& cfg, std::string mode,
                               const std::vector<std::tuple<std::string, FeatureGroupSet, bool>>& specs) {
  cfg.validate();
  const auto keys = sources_of(samples);
  const auto splits = kfold_split(keys, cfg.k, cfg.train_frac, cfg.split_seed);
  const auto& split = splits[static_cast<std::size_t>(cfg.ablation_fold)];
  AblationResult r;
  r.mode = std::move(mode);
  r.arms.resize(specs.size());
  // Slot 0 is the base run; the rest are the arms.
  parallel_for(specs.size() + 1, cfg.threads, [&](std::size_t i) {
    if (i == 0) {
      r.base = run_arm(samples, split, cfg, "base", FeatureGroupSet::all(), true);
    } else {
      const auto& [name, groups, g] = specs[i - 1];
      r.arms[i - 1] = run_arm(samples, split, cfg, name, groups, g);
    }
  });
  return r;
}
}  // namespace detail

// Arms: PSD, +Moments, +Hjorth, +Wavelet, +LocalGraph (cumulative).
inline AblationResult ablation_additive(std::span<const GraphSample> samples, const ExperimentConfig& cfg) {
  std::vector<std::tuple<std::string, FeatureGroupSet, bool>> specs;
  FeatureGroupSet acc;
  for (auto g : kAllFeatureGroups) {
    acc.insert(g);
    specs.emplace_back(acc.describe(), acc, true);
  }
  return detail::run_arms(samples, cfg, "additive", specs);
}

// Arms: all minus each node group in turn, then all node groups with G zeroed.
inline AblationResult ablation_leave_one_out(std::span<const GraphSample> samples, const ExperimentConfig& cfg) {
  std::vector<std::tuple<std::string, FeatureGroupSet, bool>> specs;
  for (auto g : kAllFeatureGroups) {
    auto s = FeatureGroupSet::all();
    s.erase(g);
    specs.emplace_back(std::string("all-minus-") + to_string(g), s, true);
  }
  specs.emplace_back("no-graph-features", FeatureGroupSet::all(), false);
  return detail::run_arms(samples, cfg, "loo", specs);
}

}  // namespace dualgnn
