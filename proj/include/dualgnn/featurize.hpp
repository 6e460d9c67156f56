#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dualgnn/core_data.hpp"
#include "dualgnn/dsp.hpp"
#include "dualgnn/graph_build.hpp"
#include "dualgnn/graph_metrics.hpp"
#include "dualgnn/parallel.hpp"

namespace dualgnn {

enum class FeatureGroup : int { Psd = 0, Moments, Hjorth, Wavelet, LocalGraph };

inline constexpr std::array<FeatureGroup, 5> kAllFeatureGroups = {
    FeatureGroup::Psd, FeatureGroup::Moments, FeatureGroup::Hjorth, FeatureGroup::Wavelet,
    FeatureGroup::LocalGraph};

// Column layout of a node-feature row.
struct FeatureLayout {
  struct Range {
    int begin;
    int end;  // exclusive
    int size() const { return end - begin; }
  };
  static constexpr int kPsdBins = 129;
  static constexpr int kDim = 142;

  static constexpr Range range(FeatureGroup g) {
    switch (g) {
      case FeatureGroup::Psd: return {0, 129};
      case FeatureGroup::Moments: return {129, 133};
      case FeatureGroup::Hjorth: return {133, 136};
      case FeatureGroup::Wavelet: return {136, 140};
      case FeatureGroup::LocalGraph: return {140, 142};
    }
    return {0, 0};
  }
};

inline const char* to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Psd: return "PSD";
    case FeatureGroup::Moments: return "Moments";
    case FeatureGroup::Hjorth: return "Hjorth";
    case FeatureGroup::Wavelet: return "Wavelet";
    case FeatureGroup::LocalGraph: return "LocalGraph";
  }
  return "?";
}

// Small bitset over feature groups.
class FeatureGroupSet {
 public:
  FeatureGroupSet() = default;
  FeatureGroupSet(std::initializer_list<FeatureGroup> groups) {
    for (auto g : groups) insert(g);
  }
  static FeatureGroupSet all() {
    FeatureGroupSet s;
    for (auto g : kAllFeatureGroups) s.insert(g);
    return s;
  }
  void insert(FeatureGroup g) { bits_ |= bit(g); }
  void erase(FeatureGroup g) { bits_ &= static_cast<std::uint8_t>(~bit(g)); }
  bool contains(FeatureGroup g) const { return (bits_ & bit(g)) != 0; }
  bool operator==(const FeatureGroupSet&) const = default;

  std::string describe() const {
    std::string s;
    for (auto g : kAllFeatureGroups)
      if (contains(g)) s += (s.empty() ? "" : "+") + std::string(to_string(g));
    return s.empty() ? "none" : s;
  }

 private:
  static std::uint8_t bit(FeatureGroup g) { return static_cast<std::uint8_t>(1u << static_cast<int>(g)); }
  std::uint8_t bits_ = 0;
};

struct GraphSample {
  WindowSource source;
  Eigen::MatrixXd x;  // N x 142
  EdgeIndex edges;
  std::array<double, GraphFeatures::kSize> g{};
  std::vector<std::uint8_t> node_labels;
  int graph_label = 0;

  std::size_t n_nodes() const { return static_cast<std::size_t>(x.rows()); }
};

struct FeaturizeOptions {
  int target_fs = 128;
  double tau = 0.3;
  int nperseg = 256;
  int overlap = 128;
  int n_rand = 20;  // random graphs for the small-world baseline
  std::uint64_t seed = 0;
};

// Per channel: downsample to target_fs, then 129 Welch PSD bins, 4 moments,
// 3 Hjorth parameters, 4 wavelet energies; strength and clustering come from
// the supplied adjacency.
inline Eigen::MatrixXd node_feature_matrix(const LabeledWindow& w, const Adjacency& adj,
                                           const FeaturizeOptions& opt = {}) {
  const Eigen::Index n = static_cast<Eigen::Index>(w.n_channels());
  if (adj.size() != n) throw ShapeError("node_feature_matrix: adjacency size != channel count");
  if (opt.nperseg / 2 + 1 != FeatureLayout::kPsdBins)
    throw ValidationError("node_feature_matrix: nperseg must give 129 PSD bins");
  Eigen::MatrixXd x(n, FeatureLayout::kDim);
  const Eigen::VectorXd strength = node_strength(adj);
  const Eigen::VectorXd clustering = local_clustering(adj);
  std::vector<double> raw(w.n_samples());
  for (Eigen::Index c = 0; c < n; ++c) {
    for (std::size_t t = 0; t < raw.size(); ++t) raw[t] = w.data(c, static_cast<Eigen::Index>(t));
    const auto ds = dsp::downsample(raw, w.fs, opt.target_fs);
    const auto psd = dsp::welch_psd(ds, opt.target_fs, opt.nperseg, opt.overlap);
    int col = 0;
    for (double p : psd.power) x(c, col++) = p;
    const auto m = dsp::statistical_moments(ds);
    x(c, col++) = m.mean;
    x(c, col++) = m.std;
    x(c, col++) = m.skewness;
    x(c, col++) = m.kurtosis;
    const auto h = dsp::hjorth(ds);
    x(c, col++) = h.activity;
    x(c, col++) = h.mobility;
    x(c, col++) = h.complexity;
    const auto e = dsp::dwt_energies(ds);
    for (double v : e.detail) x(c, col++) = v;
    x(c, col++) = strength(c);
    x(c, col++) = clustering(c);
  }
  return x;
}

inline Eigen::MatrixXd node_feature_matrix(const LabeledWindow& w, const FeaturizeOptions& opt = {}) {
  return node_feature_matrix(w, threshold_adjacency(pearson_matrix(w), opt.tau), opt);
}

inline GraphSample assemble_sample(const LabeledWindow& w, const FeaturizeOptions& opt = {}) {
  const Adjacency adj = threshold_adjacency(pearson_matrix(w), opt.tau);
  GraphSample s;
  s.source = w.source;
  s.x = node_feature_matrix(w, adj, opt);
  s.edges = edge_index(adj);
  s.g = graph_feature_vector(adj, opt.seed, opt.n_rand).to_array();
  s.node_labels = w.soz_mask;
  s.graph_label = w.outcome;
  if (!s.x.allFinite()) throw ValidationError("assemble_sample: non-finite node feature");
  for (double v : s.g)
    if (!std::isfinite(v)) throw ValidationError("assemble_sample: non-finite graph feature");
  return s;
}

// Segments and featurizes one recording; windows are processed in parallel.
inline std::vector<GraphSample> featurize_recording(const Recording& rec, const WindowSpec& spec,
                                                    const FeaturizeOptions& opt, int threads = 1) {
  const auto windows = segment_windows(rec, spec);
  std::vector<GraphSample> out(windows.size());
  parallel_for(windows.size(), threads, [&](std::size_t i) { out[i] = assemble_sample(windows[i], opt); });
  return out;
}

// Column-wise z-scoring fitted on training samples only.
struct Normalizer {
  static constexpr double kStdFloor = 1e-8;
  Eigen::VectorXd node_mean, node_std;
  Eigen::VectorXd graph_mean, graph_std;
  // FNV-1a over the source keys of the samples the statistics were fitted on.
  std::uint64_t input_checksum = 0;
};

inline std::uint64_t source_checksum(std::span<const WindowSource> sources) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& s : sources) {
    mix(s.patient_id);
    mix("|");
    mix(s.seizure_id);
    mix("|");
    mix(std::to_string(s.window_index));
    mix(";");
  }
  return h;
}

inline Normalizer fit_normalizer(std::span<const GraphSample* const> train) {
  if (train.empty()) throw ValidationError("fit_normalizer: empty training set");
  const Eigen::Index f = train.front()->x.cols();
  const auto gdim = static_cast<Eigen::Index>(GraphFeatures::kSize);
  Normalizer nz;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(f), sq = Eigen::VectorXd::Zero(f);
  Eigen::VectorXd gsum = Eigen::VectorXd::Zero(gdim), gsq = Eigen::VectorXd::Zero(gdim);
  double rows = 0.0;
  std::vector<WindowSource> sources;
  for (const auto* s : train) {
    if (s->x.cols() != f) throw ShapeError("fit_normalizer: inconsistent feature dimension");
    sum += s->x.colwise().sum().transpose();
    rows += static_cast<double>(s->x.rows());
    sources.push_back(s->source);
    gsum += Eigen::Map<const Eigen::VectorXd>(s->g.data(), gdim);
  }
  if (rows == 0.0) throw ValidationError("fit_normalizer: training samples have no nodes");
  nz.node_mean = sum / rows;
  nz.graph_mean = gsum / static_cast<double>(train.size());
  for (const auto* s : train) {
    sq += (s->x.rowwise() - nz.node_mean.transpose()).array().square().colwise().sum().matrix().transpose();
    gsq += (Eigen::Map<const Eigen::VectorXd>(s->g.data(), gdim) - nz.graph_mean).array().square().matrix();
  }
  nz.node_std = (sq / rows).array().sqrt().max(Normalizer::kStdFloor).matrix();
  nz.graph_std = (gsq / static_cast<double>(train.size())).array().sqrt().max(Normalizer::kStdFloor).matrix();
  nz.input_checksum = source_checksum(sources);
  return nz;
}

inline Normalizer fit_normalizer(std::span<const GraphSample> train) {
  std::vector<const GraphSample*> ptrs;
  for (const auto& s : train) ptrs.push_back(&s);
  return fit_normalizer(std::span<const GraphSample* const>(ptrs));
}

inline GraphSample apply_normalizer(const GraphSample& s, const Normalizer& nz) {
  GraphSample out = s;
  out.x = ((s.x.rowwise() - nz.node_mean.transpose()).array().rowwise() / nz.node_std.transpose().array())
              .matrix();
  for (std::size_t k = 0; k < out.g.size(); ++k)
    out.g[k] = (s.g[k] - nz.graph_mean(static_cast<Eigen::Index>(k))) / nz.graph_std(static_cast<Eigen::Index>(k));
  return out;
}

// Zeroes the columns of every excluded group; the dimension is unchanged.
inline GraphSample mask_feature_groups(const GraphSample& s, const FeatureGroupSet& included) {
  GraphSample out = s;
  for (auto g : kAllFeatureGroups) {
    if (included.contains(g)) continue;
    const auto r = FeatureLayout::range(g);
    out.x.middleCols(r.begin, r.size()).setZero();
  }
  return out;
}

inline GraphSample zero_graph_features(const GraphSample& s) {
  GraphSample out = s;
  out.g.fill(0.0);
  return out;
}

}  // namespace dualgnn
