// Acceptance suite: one PASS/FAIL line per criterion.
//
//   dualgnn_acceptance            run every criterion
//   dualgnn_acceptance --only 8   run a single criterion
//
// Exit status is non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "dualgnn/binary_io.hpp"
#include "dualgnn/config.hpp"
#include "dualgnn/dsp.hpp"
#include "dualgnn/featurize.hpp"
#include "dualgnn/netdyn.hpp"
#include "dualgnn/nn.hpp"
#include "dualgnn/synth.hpp"
#include "dualgnn/train.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace dualgnn;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED[" << what << "]";
    }
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Feature dimensionality and layout

void feature_dimensionality(Outcome& out) {
  SynthConfig cfg;
  cfg.n_patients = 2;
  cfg.n_seizure_free = 1;
  cfg.channels_min = 6;
  cfg.channels_max = 9;
  cfg.seizures_min = cfg.seizures_max = 1;
  cfg.duration_s = 20.0;
  std::size_t rows = 0;
  for (const auto& rec : generate_cohort(cfg)) {
    for (const auto& s : featurize_recording(rec, WindowSpec{}, FeaturizeOptions{})) {
      out.check(s.x.cols() == 142, "142 columns");
      out.check(s.g.size() == 6, "6 graph features");
      out.check(s.x.rows() == static_cast<Eigen::Index>(rec.n_channels()), "one row per channel");
      out.check(s.x.allFinite(), "finite");
      rows += static_cast<std::size_t>(s.x.rows());
    }
    // Layout: recompute channel 0 of the first window group by group.
    const auto w = segment_windows(rec, WindowSpec{}).front();
    const auto s = assemble_sample(w);
    std::vector<double> raw(w.n_samples());
    for (std::size_t t = 0; t < raw.size(); ++t) raw[t] = w.data(0, static_cast<Eigen::Index>(t));
    const auto ds = dsp::downsample(raw, w.fs, 128);
    const auto psd = dsp::welch_psd(ds, 128);
    const auto m = dsp::statistical_moments(ds);
    const auto h = dsp::hjorth(ds);
    const auto e = dsp::dwt_energies(ds);
    const auto adj = threshold_adjacency(pearson_matrix(w), 0.3);
    std::vector<double> expect(psd.power.begin(), psd.power.end());
    for (double v : {m.mean, m.std, m.skewness, m.kurtosis, h.activity, h.mobility, h.complexity}) expect.push_back(v);
    for (double v : e.detail) expect.push_back(v);
    expect.push_back(node_strength(adj)(0));
    expect.push_back(local_clustering(adj)(0));
    out.check(expect.size() == 142, "expected row length");
    bool same = true;
    for (std::size_t c = 0; c < expect.size(); ++c) same = same && s.x(0, static_cast<Eigen::Index>(c)) == expect[c];
    out.check(same, "group layout PSD|Moments|Hjorth|Wavelet|LocalGraph");
  }
  int total = 0, prev_end = 0;
  for (auto g : kAllFeatureGroups) {
    const auto r = FeatureLayout::range(g);
    out.check(r.begin == prev_end, "contiguous groups");
    prev_end = r.end;
    total += r.size();
  }
  out.check(total == 142, "group sizes sum to 142");
  out.detail << rows << " node rows x 142, G in R^6, layout 129+4+3+4+2";
}

// ---------------------------------------------------------------------------
// 2. DSP oracles

void dsp_oracles(Outcome& out) {
  const double fs = 128.0;
  // Welch peak bin for pure tones on the 0.5 Hz grid.
  int peaks_ok = 0;
  for (double f : {2.0, 5.5, 10.0, 20.0, 33.5, 50.0}) {
    std::vector<double> x(4096);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = std::sin(2.0 * std::numbers::pi * f * t / fs);
    const auto psd = dsp::welch_psd(x, fs);
    const auto peak = std::max_element(psd.power.begin(), psd.power.end()) - psd.power.begin();
    const bool ok = psd.freqs[static_cast<std::size_t>(peak)] == f;
    peaks_ok += ok;
    out.check(ok, "Welch peak at " + fmt(f) + " Hz");
  }
  // DWT Parseval.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_parseval = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x(1280);
    for (double& v : x) v = normal(rng) * (trial + 1) + trial;
    const auto e = dsp::dwt_energies(x);
    double total = e.approx, sum_sq = 0.0;
    for (double d : e.detail) total += d;
    for (double v : x) sum_sq += v * v;
    worst_parseval = std::max(worst_parseval, std::abs(total - sum_sq) / sum_sq);
  }
  out.check(worst_parseval <= 1e-6, "DWT Parseval");
  // Hjorth closed forms.
  double worst_mob = 0.0;
  for (double f : {3.0, 7.0, 12.0, 25.0}) {
    const double w = 2.0 * std::numbers::pi * f;
    std::vector<double> x(1280);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = std::cos(w * t / fs + 0.3);
    const double expect = 2.0 * std::sin(w / (2.0 * fs));
    worst_mob = std::max(worst_mob, std::abs(dsp::hjorth(x).mobility - expect) / expect);
  }
  out.check(worst_mob <= 0.01, "sine mobility within 1%");
  std::vector<double> white(1 << 16);
  for (double& v : white) v = normal(rng);
  const double white_err = std::abs(dsp::hjorth(white).mobility - std::sqrt(2.0)) / std::sqrt(2.0);
  out.check(white_err <= 0.05, "white-noise mobility within 5%");
  // Analytic signal real part.
  double worst_re = 0.0;
  for (std::size_t n : {std::size_t{1000}, std::size_t{1001}, std::size_t{1280}}) {
    std::vector<double> x(n);
    for (double& v : x) v = normal(rng);
    const auto a = dsp::analytic_signal(x);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      num = std::max(num, std::abs(a[t].real() - x[t]));
      den = std::max(den, std::abs(x[t]));
    }
    worst_re = std::max(worst_re, num / den);
  }
  out.check(worst_re <= 1e-9, "analytic real part");
  out.detail << "peaks " << peaks_ok << "/6 exact; Parseval rel " << fmt(worst_parseval, 2) << "; sine mobility rel "
             << fmt(worst_mob, 2) << "; white mobility rel " << fmt(white_err, 2) << "; Re(analytic) rel "
             << fmt(worst_re, 2);
}

// ---------------------------------------------------------------------------
// 3. Graph metrics vs brute force

void graph_metric_equivalence(Outcome& out) {
  std::size_t graphs = 0;
  double worst = 0.0;
  int greedy_violations = 0;
  const std::vector<std::size_t> expected_counts{1, 2, 4, 11, 34, 156};
  for (int n = 1; n <= 6; ++n) {
    const auto all = oracle::nonisomorphic_graphs(n);
    out.check(all.size() == expected_counts[static_cast<std::size_t>(n - 1)], "graph count n=" + std::to_string(n));
    for (const auto& a : all) {
      ++graphs;
      auto cmp = [&](double lib, double ref) { worst = std::max(worst, oracle::rel_err(lib, ref)); };
      const auto s = node_strength(a);
      const auto c = local_clustering(a);
      const auto so = oracle::strength(a);
      const auto co = oracle::local_clustering(a);
      for (int i = 0; i < n; ++i) {
        cmp(s(i), so[static_cast<std::size_t>(i)]);
        cmp(c(i), co[static_cast<std::size_t>(i)]);
      }
      cmp(global_efficiency(a), oracle::global_efficiency(a));
      cmp(char_path_length(a), oracle::char_path_length(a));
      cmp(avg_clustering(a), oracle::avg_clustering(a));
      const auto mod = modularity_greedy(a);
      cmp(mod.q, oracle::modularity(a, mod.community));
      if (mod.q < -1e-12 || mod.q > oracle::best_modularity(a) + 1e-12) ++greedy_violations;
      cmp(small_world_index(a, 20, 3), oracle::small_world(a, 20, 3));
      cmp(assortativity(a), oracle::assortativity(a));
    }
  }
  out.check(worst <= 1e-9, "rel err <= 1e-9");
  out.check(greedy_violations == 0, "0 <= greedy Q <= exhaustive optimum");
  out.detail << graphs << " non-isomorphic graphs (N<=6), 8 metrics, max rel err " << fmt(worst, 2)
             << ", greedy-Q bound violations " << greedy_violations;
}

// ---------------------------------------------------------------------------
// 4. Gradient check

void gradient_check(Outcome& out) {
  std::mt19937_64 rng(11);
  int checked = 0, skipped = 0, graphs = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    nn::ModelConfig cfg;
    cfg.in_dim = 12;
    cfg.hidden_dim = 16;
    cfg.alpha = 0.3 + 0.1 * trial;
    cfg.dropout = trial % 2 ? 0.25 : 0.0;
    cfg.class_weights_node = {0.7, 1.9};
    cfg.class_weights_graph = {1.2, 0.8};
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto p = nn::init_params(cfg);
    std::vector<nn::GraphInput> batch;
    const int n_graphs = trial < 4 ? 1 : 3;  // last two trials check batched graphs
    for (int b = 0; b < n_graphs; ++b) batch.push_back(oracle::random_graph_input(5 + 2 * trial + b, 12, 0.4, rng));
    std::vector<const nn::GraphInput*> ptrs;
    for (const auto& g : batch) ptrs.push_back(&g);
    graphs += n_graphs;
    const auto gc = oracle::gradient_check(p, ptrs, cfg, 40, rng, 1e-5, cfg.dropout > 0.0, 99 + trial);
    checked += gc.checked;
    skipped += gc.skipped_kinks;
    worst = std::max(worst, gc.max_rel_err);
  }
  out.check(checked >= 200, ">= 200 coordinates");
  out.check(graphs >= 5, ">= 5 graphs");
  out.check(worst < 1e-4, "rel err < 1e-4");
  out.detail << checked << " coordinates over " << graphs << " graphs (" << skipped
             << " ReLU-kink draws resampled), max rel err " << fmt(worst, 3);
}

// ---------------------------------------------------------------------------
// 5. Loss identities

void loss_identities(Outcome& out) {
  out.check(nn::combined_loss(0.37, 0.91, 0.0) == 0.91, "alpha=0 -> graph loss");
  out.check(nn::combined_loss(0.37, 0.91, 1.0) == 0.37, "alpha=1 -> node loss");
  Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(7, 2, 0.25);
  const std::vector<int> labels{0, 1, 1, 0, 1, 0, 0};
  const double ce = nn::weighted_cross_entropy(uniform, labels, {2.0, 0.5});
  out.check(std::abs(ce - std::log(2.0)) <= 1e-12, "uniform logits -> ln 2");

  std::mt19937_64 rng(5);
  nn::ModelConfig cfg;
  cfg.in_dim = 10;
  cfg.hidden_dim = 8;
  cfg.dropout = 0.2;
  const auto p = nn::init_params(cfg);
  auto g = oracle::random_graph_input(9, 10, 0.5, rng);
  const nn::GraphInput* ptr = &g;
  const std::span<const nn::GraphInput* const> one(&ptr, 1);
  bool graph_zero = true, node_zero = true;
  cfg.alpha = 1.0;
  {
    const auto grad = nn::loss_and_gradient(p, one, cfg, true, 3);
    for (auto id : {nn::ParamLayout::kWG1, nn::ParamLayout::kBG1, nn::ParamLayout::kWG2, nn::ParamLayout::kBG2}) {
      const auto& b = p.layout[id];
      graph_zero = graph_zero && (grad.flat.segment(b.offset, b.size()).array() == 0.0).all();
    }
    const auto o = nn::forward(p, one, cfg, true, 3);
    const auto l = nn::compute_loss(o, one, cfg);
    out.check(l.total == l.node, "alpha=1 total == node loss");
  }
  cfg.alpha = 0.0;
  {
    const auto grad = nn::loss_and_gradient(p, one, cfg, true, 3);
    for (auto id : {nn::ParamLayout::kWNode, nn::ParamLayout::kBNode}) {
      const auto& b = p.layout[id];
      node_zero = node_zero && (grad.flat.segment(b.offset, b.size()).array() == 0.0).all();
    }
    const auto l = nn::eval_loss(p, one, cfg);
    out.check(l.total == l.graph, "alpha=0 total == graph loss");
  }
  out.check(graph_zero, "alpha=1 -> graph-head gradient exactly 0");
  out.check(node_zero, "alpha=0 -> node-head gradient exactly 0");
  out.detail << "endpoints exact; uniform CE - ln2 = " << fmt(ce - std::log(2.0), 2)
             << "; graph-head grad at alpha=1 all zero: " << (graph_zero ? "yes" : "no");
}

// ---------------------------------------------------------------------------
// 6. Model symmetries

void model_symmetries(Outcome& out) {
  std::mt19937_64 rng(21);
  double worst_node = 0.0, worst_graph = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    nn::ModelConfig cfg;
    cfg.in_dim = 142;
    cfg.hidden_dim = 32;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto p = nn::init_params(cfg);
    const int n = 10 + 5 * trial;
    // Build from an edge list so the permuted copy can be rebuilt the same way.
    std::bernoulli_distribution edge(0.3);
    std::normal_distribution<double> normal(0.0, 1.0);
    EdgeIndex e;
    e.n_nodes = n;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (edge(rng)) e.edges.push_back({i, j, 1.0});
    nn::GraphInput g;
    g.x = Eigen::MatrixXd::NullaryExpr(n, 142, [&] { return normal(rng); });
    g.a_hat = nn::gcn_normalize(e, n);
    g.g = Eigen::VectorXd::NullaryExpr(6, [&] { return normal(rng); });
    g.node_labels.assign(static_cast<std::size_t>(n), 0);

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);  // new index of node i is perm[i]
    EdgeIndex pe;
    pe.n_nodes = n;
    for (const auto& ed : e.edges) {
      const int a = perm[static_cast<std::size_t>(ed.i)], b = perm[static_cast<std::size_t>(ed.j)];
      pe.edges.push_back({std::min(a, b), std::max(a, b), 1.0});
    }
    nn::GraphInput pg = g;
    for (int i = 0; i < n; ++i) pg.x.row(perm[static_cast<std::size_t>(i)]) = g.x.row(i);
    pg.a_hat = nn::gcn_normalize(pe, n);

    const auto o = nn::forward(p, g, cfg, false);
    const auto po = nn::forward(p, pg, cfg, false);
    for (int i = 0; i < n; ++i)
      worst_node = std::max(worst_node,
                            (o.node_logits.row(i) - po.node_logits.row(perm[static_cast<std::size_t>(i)])).cwiseAbs().maxCoeff());
    worst_graph = std::max(worst_graph, (o.graph_logits - po.graph_logits).cwiseAbs().maxCoeff());
  }
  out.check(worst_node <= 1e-9, "node logits equivariant");
  out.check(worst_graph <= 1e-9, "graph logits invariant");
  out.detail << "5 random graphs (N=10..30), max node-logit deviation " << fmt(worst_node, 2)
             << ", max graph-logit deviation " << fmt(worst_graph, 2);
}

// ---------------------------------------------------------------------------
// 7. PLV properties

void plv_properties(Outcome& out) {
  const double fs = 256.0;
  const int t_len = 2048;
  Eigen::MatrixXd x(3, t_len);
  for (int t = 0; t < t_len; ++t) {
    const double ph = 2.0 * std::numbers::pi * 7.0 * t / fs;
    x(0, t) = std::cos(ph);
    x(1, t) = 3.0 * std::cos(ph);
    x(2, t) = std::sin(ph);
  }
  const auto plv = plv_matrix(x);
  out.check(plv(0, 0) == 1.0 && plv(1, 1) == 1.0 && plv(2, 2) == 1.0, "diagonal 1");
  out.check(std::abs(plv(0, 1) - 1.0) < 1e-12, "self/scaled PLV = 1");
  out.check(plv(0, 2) >= 0.999, "constant-lag PLV >= 0.999");

  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n_null = 10000;
  double worst_null = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd y(2, n_null);
    for (int c = 0; c < 2; ++c)
      for (int t = 0; t < n_null; ++t) y(c, t) = normal(rng);
    worst_null = std::max(worst_null, plv_matrix(y)(0, 1));
  }
  out.check(worst_null < 0.05, "independent null PLV < 0.05");
  out.detail << "self " << fmt(plv(0, 1), 12) << ", quadrature-lag " << fmt(plv(0, 2), 6) << ", null max over 5 draws (T=1e4) "
             << fmt(worst_null, 3);
}

// ---------------------------------------------------------------------------
// Shared default-cohort fixture for criteria 8-10.

struct CohortData {
  std::vector<GraphSample> samples;
  std::array<WindowNetworkMetrics, 2> class_mean{};
  std::array<int, 2> class_recordings{0, 0};
  double synth_s = 0.0, featurize_s = 0.0, netdyn_s = 0.0;
};

CohortData build_default_cohort(const RunConfig& cfg, bool featurize, bool netdyn) {
  CohortData d;
  for (int p = 0; p < cfg.synth.n_patients; ++p) {
    auto t0 = std::chrono::steady_clock::now();
    const auto recs = generate_patient(cfg.synth, p);
    d.synth_s += seconds_since(t0);
    for (const auto& rec : recs) {
      if (featurize) {
        t0 = std::chrono::steady_clock::now();
        for (auto& s : featurize_recording(rec, cfg.window, cfg.featurize, cfg.threads)) d.samples.push_back(std::move(s));
        d.featurize_s += seconds_since(t0);
      }
      if (netdyn) {
        t0 = std::chrono::steady_clock::now();
        const auto rows = dynamics_report(rec, cfg.plv.dynamics);
        const auto m = mean_metrics(rows);
        auto& acc = d.class_mean[static_cast<std::size_t>(rec.outcome)];
        acc.density += m.density;
        acc.avg_clustering += m.avg_clustering;
        acc.avg_soz_degree += m.avg_soz_degree;
        acc.avg_soz_plv += m.avg_soz_plv;
        ++d.class_recordings[static_cast<std::size_t>(rec.outcome)];
        d.netdyn_s += seconds_since(t0);
      }
    }
  }
  for (int k = 0; k < 2; ++k) {
    const double n = std::max(d.class_recordings[static_cast<std::size_t>(k)], 1);
    auto& m = d.class_mean[static_cast<std::size_t>(k)];
    m.density /= n;
    m.avg_clustering /= n;
    m.avg_soz_degree /= n;
    m.avg_soz_plv /= n;
  }
  return d;
}

RunConfig default_config() { return load_config(""); }

void end_to_end(Outcome& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = default_config();
  const auto data = build_default_cohort(cfg, true, false);
  const auto exp = cfg.experiment();
  const auto kf = run_kfold(data.samples, exp);
  const double kfold_s = seconds_since(t0);
  const auto lo = run_loocv(data.samples, exp);
  const double total = seconds_since(t0);
  const auto& kg = kf.aggregate.graph.accuracy;
  const auto& kn = kf.aggregate.node.accuracy;
  const auto& lg = lo.aggregate.graph.accuracy;
  const auto& ln = lo.aggregate.node.accuracy;
  out.check(kf.folds.size() == 10, "10 folds");
  out.check(lo.folds.size() == static_cast<std::size_t>(cfg.synth.n_patients), "one LOOCV fold per patient");
  out.check(kg.mean >= 0.90, "k-fold graph acc >= 0.90");
  out.check(kn.mean >= 0.90, "k-fold node acc >= 0.90");
  out.check(lg.mean >= 0.75, "LOOCV graph acc >= 0.75");
  out.check(ln.mean >= 0.75, "LOOCV node acc >= 0.75");
  out.check(lg.std > kg.std, "LOOCV graph-acc std > k-fold std");
  out.check(total <= 15 * 60.0, "runtime <= 15 min");
  out.detail << data.samples.size() << " windows; 10-fold graph " << fmt(kg.mean) << "±" << fmt(kg.std, 3) << ", node "
             << fmt(kn.mean) << "±" << fmt(kn.std, 3) << "; LOOCV graph " << fmt(lg.mean) << "±" << fmt(lg.std, 3)
             << ", node " << fmt(ln.mean) << "±" << fmt(ln.std, 3) << "; synth " << fmt(data.synth_s, 3) << " s, featurize "
             << fmt(data.featurize_s, 3) << " s, total " << fmt(total, 3) << " s (k-fold done at " << fmt(kfold_s, 3)
             << " s)";
}

void ablation_harness(Outcome& out) {
  const RunConfig cfg = default_config();
  const auto data = build_default_cohort(cfg, true, false);
  const auto exp = cfg.experiment();
  const auto add = ablation_additive(data.samples, exp);
  const auto loo = ablation_leave_one_out(data.samples, exp);
  const std::vector<std::string> add_names{"PSD", "PSD+Moments", "PSD+Moments+Hjorth", "PSD+Moments+Hjorth+Wavelet",
                                           "PSD+Moments+Hjorth+Wavelet+LocalGraph"};
  const std::vector<std::string> loo_names{"all-minus-PSD",     "all-minus-Moments",    "all-minus-Hjorth",
                                           "all-minus-Wavelet", "all-minus-LocalGraph", "no-graph-features"};
  std::vector<std::string> got_add, got_loo;
  for (const auto& a : add.arms) got_add.push_back(a.name);
  for (const auto& a : loo.arms) got_loo.push_back(a.name);
  out.check(got_add == add_names, "additive arms in order");
  out.check(got_loo == loo_names, "leave-one-out arms incl. G-zeroed");
  out.check(!loo.arms.back().graph_features && loo.arms.back().groups == FeatureGroupSet::all(), "G-zeroed arm");
  const auto& full = add.arms.back().test;
  auto same = [](const ClassificationMetrics& a, const ClassificationMetrics& b) {
    return a.accuracy == b.accuracy && a.precision == b.precision && a.recall == b.recall && a.f1 == b.f1 &&
           a.support == b.support;
  };
  const bool bit_equal = same(full.graph, add.base.test.graph) && same(full.node, add.base.test.node) &&
                         same(loo.base.test.graph, add.base.test.graph) && same(loo.base.test.node, add.base.test.node);
  out.check(bit_equal, "inclusive arm == base run bit-for-bit");
  out.detail << "additive " << add.arms.size() << " arms, leave-one-out " << loo.arms.size()
             << " arms; base graph/node acc " << fmt(add.base.test.graph.accuracy) << "/"
             << fmt(add.base.test.node.accuracy) << ", inclusive arm " << fmt(full.graph.accuracy) << "/"
             << fmt(full.node.accuracy);
  for (const auto& a : add.arms)
    out.detail << "\n      additive " << a.name << ": graph " << fmt(a.test.graph.accuracy) << ", node "
               << fmt(a.test.node.accuracy);
  for (const auto& a : loo.arms)
    out.detail << "\n      loo      " << a.name << ": graph " << fmt(a.test.graph.accuracy) << ", node "
               << fmt(a.test.node.accuracy);
}

void network_direction(Outcome& out) {
  const RunConfig cfg = default_config();
  const auto data = build_default_cohort(cfg, false, true);
  const auto& c0 = data.class_mean[0];
  const auto& c1 = data.class_mean[1];
  out.check(c0.avg_soz_plv - c1.avg_soz_plv >= 0.05, "SOZ PLV gap >= 0.05");
  out.check(c0.avg_soz_degree > c1.avg_soz_degree, "SOZ degree class 0 > class 1");
  out.check(data.netdyn_s < 60.0, "network analysis < 1 min");
  out.detail << "class 0 (" << data.class_recordings[0] << " recordings): SOZ PLV " << fmt(c0.avg_soz_plv)
             << ", SOZ degree " << fmt(c0.avg_soz_degree) << "; class 1 (" << data.class_recordings[1]
             << "): SOZ PLV " << fmt(c1.avg_soz_plv) << ", SOZ degree " << fmt(c1.avg_soz_degree)
             << "; PLV analysis " << fmt(data.netdyn_s, 3) << " s";
}

// ---------------------------------------------------------------------------
// 11. Determinism of every CLI command

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::string content = dualgnn::io::read_file(e.path());
    const std::string rel = fs::relative(e.path(), root).string();
    if (rel.ends_with(".manifest.json")) {
      // Wall time is the only field allowed to differ.
      auto j = nlohmann::ordered_json::parse(content);
      j.erase("wall_time_s");
      content = j.dump();
    }
    files.emplace(rel, std::move(content));
  }
  return files;
}

void determinism(Outcome& out) {
  const fs::path root = fs::temp_directory_path() / ("dualgnn_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string config = (root / "small.toml").string();
  dualgnn::io::write_file_atomic(config,
                        "seed = 3\n"
                        "[synth]\nn_patients = 4\nn_seizure_free = 2\nchannels = [8, 12]\nseizures = [1, 2]\n"
                        "duration_s = 20.0\n"
                        "[featurize]\nn_rand = 5\n"
                        "[train]\nepochs = 3\n"
                        "[cv]\nk = 3\n"
                        "[search]\nn_trials = 3\n"
                        "[plv]\nsvg = true\nsvg_nodes = 6\n");
  const std::vector<std::string> commands{
      "synth --out {R}/cohort",
      "featurize --cohort {R}/cohort --out {R}/features",
      "train --features {R}/features --out {R}/train",
      "cv --mode kfold --features {R}/features --out {R}/cv-kfold",
      "cv --mode loocv --features {R}/features --out {R}/cv-loocv",
      "search --features {R}/features --out {R}/search",
      "ablate --mode additive --features {R}/features --out {R}/ablate-additive",
      "ablate --mode loo --features {R}/features --out {R}/ablate-loo",
      "plv --cohort {R}/cohort --out {R}/plv",
  };
  int failures = 0;
  std::size_t compared = 0;
  // Both runs use the same paths (manifests record them); each result is moved aside.
  for (const std::string run : {"a", "b"}) {
    const std::string r = (root / "run").string();
    for (auto cmd : commands) {
      for (auto pos = cmd.find("{R}"); pos != std::string::npos; pos = cmd.find("{R}")) cmd.replace(pos, 3, r);
      const std::string line = std::string(DUALGNN_CLI_PATH) + " " + cmd + " --config " + config + " > /dev/null";
      if (std::system(line.c_str()) != 0) {
        ++failures;
        out.detail << " command failed: " << cmd;
      }
    }
    fs::rename(root / "run", root / run);
  }
  out.check(failures == 0, "all commands exit 0");
  std::vector<std::string> differing;
  for (const auto* sub : {"cohort", "features", "train", "cv-kfold", "cv-loocv", "search", "ablate-additive",
                          "ablate-loo", "plv"}) {
    if (!fs::exists(root / "a" / sub) || !fs::exists(root / "b" / sub)) {
      differing.emplace_back(sub);
      continue;
    }
    const auto a = read_tree(root / "a" / sub);
    const auto b = read_tree(root / "b" / sub);
    compared += a.size();
    if (a != b) differing.emplace_back(sub);
  }
  out.check(differing.empty(), "byte-identical outputs");
  out.detail << "9 commands run twice, " << compared << " files compared byte-for-byte (manifests minus wall time)";
  for (const auto& d : differing) out.detail << "; differs: " << d;
  fs::remove_all(root);
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);

  const std::vector<Criterion> criteria{
      {1, "feature dimensionality", feature_dimensionality},
      {2, "dsp oracles", dsp_oracles},
      {3, "graph-metric brute-force equivalence", graph_metric_equivalence},
      {4, "gradient check", gradient_check},
      {5, "loss identities", loss_identities},
      {6, "model symmetries", model_symmetries},
      {7, "plv properties", plv_properties},
      {8, "synthetic end-to-end", end_to_end},
      {9, "ablation harness", ablation_harness},
      {10, "network-dynamics direction", network_direction},
      {11, "determinism", determinism},
  };
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    ++ran;
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " exception: " << e.what();
    }
    const double secs = seconds_since(t0);
    std::cout << (out.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << " (" << fmt(secs, 3)
              << " s): " << out.detail.str() << std::endl;
    failed += !out.pass;
  }
  if (ran == 0) {
    std::cerr << "no criterion selected\n";
    return 2;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
