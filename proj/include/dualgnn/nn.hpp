#pragma once

// Dual-task graph network.
//
//   H0 = ReLU(X W_in + b_in)                      input projection
//   H1 = ReLU(Â drop(H0) W1 + b1)                 GCN layer 1
//   H2 = ReLU(Â drop(H1) W2 + b2)                 GCN layer 2
//   node_logits  = H2 W_node + b_node
//   h_combined   = [mean_pool(H2, batch) || g]
//   graph_logits = ReLU(h_combined W_g1 + b_g1) W_g2 + b_g2
//
// with Â = D^-1/2 (A_bin + I) D^-1/2. Gradients are computed by hand in
// backward(); the flat parameter vector is the unit of optimization and
// gradient checking.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dualgnn/errors.hpp"
#include "dualgnn/featurize.hpp"
#include "dualgnn/graph_build.hpp"
#include "dualgnn/rng.hpp"

namespace dualgnn::nn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr int kGraphFeatureDim = static_cast<int>(GraphFeatures::kSize);
inline constexpr int kClasses = 2;

struct ModelConfig {
  int in_dim = FeatureLayout::kDim;
  int hidden_dim = 64;
  double dropout = 0.2;
  double alpha = 0.5;  // weight of the node loss
  std::array<double, 2> class_weights_node{1.0, 1.0};
  std::array<double, 2> class_weights_graph{1.0, 1.0};
  std::uint64_t seed = 0;

  void validate() const {
    if (in_dim < 1) throw ConfigError("model.in_dim", "must be >= 1");
    if (hidden_dim < 1) throw ConfigError("model.hidden_dim", "must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model.dropout", "must be in [0, 1)");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("model.alpha", "must be in [0, 1]");
    for (double w : class_weights_node)
      if (!(w > 0.0)) throw ConfigError("model.class_weights_node", "weights must be positive");
    for (double w : class_weights_graph)
      if (!(w > 0.0)) throw ConfigError("model.class_weights_graph", "weights must be positive");
  }
};

// Offsets of each parameter block inside the flat vector (column-major blocks).
struct ParamLayout {
  struct Block {
    std::string name;
    Index offset = 0;
    Index rows = 0;
    Index cols = 0;
    Index size() const { return rows * cols; }
  };

  ParamLayout() = default;
  ParamLayout(int in_dim, int hidden) {
    const Index d = hidden;
    auto add = [&](const char* name, Index r, Index c) {
      blocks.push_back({name, total, r, c});
      total += r * c;
    };
    add("w_in", in_dim, d);
    add("b_in", 1, d);
    add("w1", d, d);
    add("b1", 1, d);
    add("w2", d, d);
    add("b2", 1, d);
    add("w_node", d, kClasses);
    add("b_node", 1, kClasses);
    add("w_g1", d + kGraphFeatureDim, d);
    add("b_g1", 1, d);
    add("w_g2", d, kClasses);
    add("b_g2", 1, kClasses);
  }

  enum Id { kWIn, kBIn, kW1, kB1, kW2, kB2, kWNode, kBNode, kWG1, kBG1, kWG2, kBG2 };

  const Block& operator[](Id id) const { return blocks[static_cast<std::size_t>(id)]; }

  std::vector<Block> blocks;
  Index total = 0;
};

struct ModelParams {
  ModelParams() = default;
  ModelParams(int in_dim, int hidden) : layout(in_dim, hidden), flat(VectorXd::Zero(layout.total)) {}

  int in_dim() const { return static_cast<int>(layout[ParamLayout::kWIn].rows); }
  int hidden_dim() const { return static_cast<int>(layout[ParamLayout::kWIn].cols); }

  Eigen::Map<const MatrixXd> operator[](ParamLayout::Id id) const {
    const auto& b = layout[id];
    return {flat.data() + b.offset, b.rows, b.cols};
  }
  Eigen::Map<MatrixXd> operator[](ParamLayout::Id id) {
    const auto& b = layout[id];
    return {flat.data() + b.offset, b.rows, b.cols};
  }

  ParamLayout layout;
  VectorXd flat;
};

// Glorot-uniform weights, zero biases.
inline ModelParams init_params(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams p(cfg.in_dim, cfg.hidden_dim);
  Rng rng(derive_seed(cfg.seed, "init"));
  for (const auto& b : p.layout.blocks) {
    if (b.name[0] == 'b') continue;
    const double limit = std::sqrt(6.0 / static_cast<double>(b.rows + b.cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Index k = 0; k < b.size(); ++k) p.flat(b.offset + k) = u(rng);
  }
  return p;
}

// Â = D^-1/2 (A_bin + I) D^-1/2 over binary edges with self-loops.
inline MatrixXd gcn_normalize(const EdgeIndex& edges, int n) {
  MatrixXd a = MatrixXd::Identity(n, n);
  for (const auto& e : edges.edges) {
    if (e.i < 0 || e.j >= n || e.i == e.j) throw ValidationError("gcn_normalize: edge out of range");
    a(e.i, e.j) = 1.0;
    a(e.j, e.i) = 1.0;
  }
  const VectorXd inv_sqrt = a.rowwise().sum().array().rsqrt();
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

// One graph prepared for the network: features, propagation matrix, labels.
struct GraphInput {
  MatrixXd x;
  MatrixXd a_hat;
  VectorXd g;
  std::vector<int> node_labels;
  int graph_label = 0;

  Index n_nodes() const { return x.rows(); }
};

inline GraphInput make_input(const GraphSample& s) {
  GraphInput in;
  in.x = s.x;
  in.a_hat = gcn_normalize(s.edges, static_cast<int>(s.n_nodes()));
  in.g = Eigen::Map<const VectorXd>(s.g.data(), kGraphFeatureDim);
  in.node_labels.assign(s.node_labels.begin(), s.node_labels.end());
  in.graph_label = s.graph_label;
  return in;
}

// Forward results plus the activations backward() needs.
struct ForwardOutput {
  MatrixXd node_logits;   // total_nodes x 2
  MatrixXd graph_logits;  // graphs x 2

  std::vector<Index> offsets;  // graph b owns rows [offsets[b], offsets[b+1])
  std::vector<int> batch;      // graph index per node
  MatrixXd x, z0, mask0, ad0, z1, mask1, ad1, z2, h2, hc, zg, hg;
  bool train_mode = false;
};

inline MatrixXd relu(const MatrixXd& z) { return z.cwiseMax(0.0); }

namespace detail {
inline MatrixXd dropout_mask(Index rows, Index cols, double p, Rng& rng) {
  MatrixXd m(rows, cols);
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = keep(rng) ? scale : 0.0;
  return m;
}

// Â_b * m[rows of b] for every graph b.
inline MatrixXd propagate(std::span<const GraphInput* const> graphs, const std::vector<Index>& offsets,
                          const MatrixXd& m) {
  MatrixXd out(m.rows(), m.cols());
  for (std::size_t b = 0; b < graphs.size(); ++b) {
    const Index off = offsets[b], n = graphs[b]->n_nodes();
    out.middleRows(off, n).noalias() = graphs[b]->a_hat * m.middleRows(off, n);
  }
  return out;
}
}  // namespace detail

// Batched forward pass. In train mode inverted dropout is applied to H0 and H1
// with masks drawn from `mask_seed`; eval mode is deterministic.
inline ForwardOutput forward(const ModelParams& p, std::span<const GraphInput* const> graphs,
                             const ModelConfig& cfg, bool train_mode, std::uint64_t mask_seed = 0) {
  using L = ParamLayout;
  ForwardOutput o;
  o.train_mode = train_mode;
  o.offsets.push_back(0);
  for (std::size_t b = 0; b < graphs.size(); ++b) {
    if (graphs[b]->x.cols() != p.in_dim())
      throw ShapeError("forward: feature dimension " + std::to_string(graphs[b]->x.cols()) +
                       " != model input dimension " + std::to_string(p.in_dim()));
    if (graphs[b]->g.size() != kGraphFeatureDim) throw ShapeError("forward: graph feature size != 6");
    if (graphs[b]->a_hat.rows() != graphs[b]->n_nodes()) throw ShapeError("forward: Â size != node count");
    o.offsets.push_back(o.offsets.back() + graphs[b]->n_nodes());
    o.batch.insert(o.batch.end(), static_cast<std::size_t>(graphs[b]->n_nodes()), static_cast<int>(b));
  }
  const Index total = o.offsets.back();
  const Index d = p.hidden_dim();
  const auto n_graphs = static_cast<Index>(graphs.size());

  o.x.resize(total, p.in_dim());
  for (std::size_t b = 0; b < graphs.size(); ++b) o.x.middleRows(o.offsets[b], graphs[b]->n_nodes()) = graphs[b]->x;

  Rng rng(mask_seed);
  const bool drop = train_mode && cfg.dropout > 0.0;

  o.z0.noalias() = o.x * p[L::kWIn];
  o.z0.rowwise() += p[L::kBIn].row(0);
  MatrixXd d0 = relu(o.z0);
  if (drop) {
    o.mask0 = detail::dropout_mask(total, d, cfg.dropout, rng);
    d0 = d0.cwiseProduct(o.mask0);
  }
  o.ad0 = detail::propagate(graphs, o.offsets, d0);
  o.z1.noalias() = o.ad0 * p[L::kW1];
  o.z1.rowwise() += p[L::kB1].row(0);
  MatrixXd d1 = relu(o.z1);
  if (drop) {
    o.mask1 = detail::dropout_mask(total, d, cfg.dropout, rng);
    d1 = d1.cwiseProduct(o.mask1);
  }
  o.ad1 = detail::propagate(graphs, o.offsets, d1);
  o.z2.noalias() = o.ad1 * p[L::kW2];
  o.z2.rowwise() += p[L::kB2].row(0);
  o.h2 = relu(o.z2);

  o.node_logits.noalias() = o.h2 * p[L::kWNode];
  o.node_logits.rowwise() += p[L::kBNode].row(0);

  o.hc.resize(n_graphs, d + kGraphFeatureDim);
  for (Index b = 0; b < n_graphs; ++b) {
    const auto bb = static_cast<std::size_t>(b);
    o.hc.row(b).head(d) = o.h2.middleRows(o.offsets[bb], graphs[bb]->n_nodes()).colwise().mean();
    o.hc.row(b).tail(kGraphFeatureDim) = graphs[bb]->g.transpose();
  }
  o.zg.noalias() = o.hc * p[L::kWG1];
  o.zg.rowwise() += p[L::kBG1].row(0);
  o.hg = relu(o.zg);
  o.graph_logits.noalias() = o.hg * p[L::kWG2];
  o.graph_logits.rowwise() += p[L::kBG2].row(0);
  return o;
}

inline ForwardOutput forward(const ModelParams& p, const GraphInput& g, const ModelConfig& cfg,
                             bool train_mode = false, std::uint64_t mask_seed = 0) {
  const GraphInput* ptr = &g;
  return forward(p, std::span<const GraphInput* const>(&ptr, 1), cfg, train_mode, mask_seed);
}

inline MatrixXd softmax_rows(const MatrixXd& logits) {
  MatrixXd out(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - mx).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

// Weighted mean of -log softmax(logits)_y, normalized by the sum of the
// per-row class weights.
inline double weighted_cross_entropy(const MatrixXd& logits, std::span<const int> labels,
                                     const std::array<double, 2>& class_weights) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size())
    throw ShapeError("weighted_cross_entropy: logits rows != labels");
  double num = 0.0, den = 0.0;
  for (Index r = 0; r < logits.rows(); ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    const double w = class_weights[static_cast<std::size_t>(y)];
    num += w * (lse - logits(r, y));
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

// (1 - alpha) * graph_loss + alpha * node_loss
inline double combined_loss(double node_loss, double graph_loss, double alpha) {
  return (1.0 - alpha) * graph_loss + alpha * node_loss;
}

struct LossParts {
  double node = 0.0;
  double graph = 0.0;
  double total = 0.0;
};

inline std::vector<int> concat_node_labels(std::span<const GraphInput* const> graphs) {
  std::vector<int> y;
  for (const auto* g : graphs) y.insert(y.end(), g->node_labels.begin(), g->node_labels.end());
  return y;
}

inline std::vector<int> graph_labels(std::span<const GraphInput* const> graphs) {
  std::vector<int> y;
  for (const auto* g : graphs) y.push_back(g->graph_label);
  return y;
}

inline LossParts compute_loss(const ForwardOutput& o, std::span<const GraphInput* const> graphs,
                              const ModelConfig& cfg) {
  LossParts l;
  const auto yn = concat_node_labels(graphs);
  const auto yg = graph_labels(graphs);
  l.node = weighted_cross_entropy(o.node_logits, yn, cfg.class_weights_node);
  l.graph = weighted_cross_entropy(o.graph_logits, yg, cfg.class_weights_graph);
  l.total = combined_loss(l.node, l.graph, cfg.alpha);
  return l;
}

namespace detail {
// d(weighted CE)/d(logits) scaled by `scale`.
inline MatrixXd cross_entropy_grad(const MatrixXd& logits, std::span<const int> labels,
                                   const std::array<double, 2>& w, double scale) {
  MatrixXd grad = softmax_rows(logits);
  double den = 0.0;
  for (int y : labels) den += w[static_cast<std::size_t>(y)];
  for (Index r = 0; r < grad.rows(); ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    grad(r, y) -= 1.0;
    grad.row(r) *= w[static_cast<std::size_t>(y)];
  }
  return den > 0.0 ? MatrixXd(grad * (scale / den)) : MatrixXd(MatrixXd::Zero(grad.rows(), grad.cols()));
}

inline MatrixXd relu_grad(const MatrixXd& upstream, const MatrixXd& z) {
  return upstream.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
}
}  // namespace detail

struct Gradient {
  VectorXd flat;
  LossParts loss;
};

// Reverse-mode gradient of the combined loss with respect to every parameter,
// reusing the activations (and dropout masks) cached by forward().
inline Gradient backward(const ModelParams& p, const ForwardOutput& o, std::span<const GraphInput* const> graphs,
                         const ModelConfig& cfg) {
  using L = ParamLayout;
  Gradient out;
  out.loss = compute_loss(o, graphs, cfg);
  ModelParams g(p.in_dim(), p.hidden_dim());
  const Index d = p.hidden_dim();
  const bool drop = o.train_mode && cfg.dropout > 0.0;

  const auto yn = concat_node_labels(graphs);
  const auto yg = graph_labels(graphs);
  const MatrixXd d_node_logits = detail::cross_entropy_grad(o.node_logits, yn, cfg.class_weights_node, cfg.alpha);
  const MatrixXd d_graph_logits =
      detail::cross_entropy_grad(o.graph_logits, yg, cfg.class_weights_graph, 1.0 - cfg.alpha);

  // Graph head.
  g[L::kWG2].noalias() = o.hg.transpose() * d_graph_logits;
  g[L::kBG2] = d_graph_logits.colwise().sum();
  const MatrixXd d_zg = detail::relu_grad(d_graph_logits * p[L::kWG2].transpose(), o.zg);
  g[L::kWG1].noalias() = o.hc.transpose() * d_zg;
  g[L::kBG1] = d_zg.colwise().sum();
  const MatrixXd d_hc = d_zg * p[L::kWG1].transpose();

  // Node head, plus the mean-pool contribution back to H2.
  g[L::kWNode].noalias() = o.h2.transpose() * d_node_logits;
  g[L::kBNode] = d_node_logits.colwise().sum();
  MatrixXd d_h2 = d_node_logits * p[L::kWNode].transpose();
  for (std::size_t b = 0; b < graphs.size(); ++b) {
    const Index n = graphs[b]->n_nodes();
    const Eigen::RowVectorXd share = d_hc.row(static_cast<Index>(b)).head(d) / static_cast<double>(n);
    d_h2.middleRows(o.offsets[b], n).rowwise() += share;
  }

  // GCN layer 2.
  const MatrixXd d_z2 = detail::relu_grad(d_h2, o.z2);
  g[L::kW2].noalias() = o.ad1.transpose() * d_z2;
  g[L::kB2] = d_z2.colwise().sum();
  MatrixXd d_d1 = detail::propagate(graphs, o.offsets, d_z2 * p[L::kW2].transpose());  // Â symmetric
  if (drop) d_d1 = d_d1.cwiseProduct(o.mask1);

  // GCN layer 1.
  const MatrixXd d_z1 = detail::relu_grad(d_d1, o.z1);
  g[L::kW1].noalias() = o.ad0.transpose() * d_z1;
  g[L::kB1] = d_z1.colwise().sum();
  MatrixXd d_d0 = detail::propagate(graphs, o.offsets, d_z1 * p[L::kW1].transpose());
  if (drop) d_d0 = d_d0.cwiseProduct(o.mask0);

  // Input projection.
  const MatrixXd d_z0 = detail::relu_grad(d_d0, o.z0);
  g[L::kWIn].noalias() = o.x.transpose() * d_z0;
  g[L::kBIn] = d_z0.colwise().sum();

  out.flat = std::move(g.flat);
  return out;
}

inline Gradient loss_and_gradient(const ModelParams& p, std::span<const GraphInput* const> graphs,
                                  const ModelConfig& cfg, bool train_mode, std::uint64_t mask_seed = 0) {
  const auto o = forward(p, graphs, cfg, train_mode, mask_seed);
  return backward(p, o, graphs, cfg);
}

inline LossParts eval_loss(const ModelParams& p, std::span<const GraphInput* const> graphs, const ModelConfig& cfg,
                           bool train_mode = false, std::uint64_t mask_seed = 0) {
  return compute_loss(forward(p, graphs, cfg, train_mode, mask_seed), graphs, cfg);
}

struct Prediction {
  std::vector<int> node_classes;
  std::vector<int> graph_classes;
};

// Argmax per row; ties go to class 0.
inline std::vector<int> argmax_rows(const MatrixXd& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index r = 0; r < logits.rows(); ++r) out[static_cast<std::size_t>(r)] = logits(r, 1) > logits(r, 0) ? 1 : 0;
  return out;
}

inline Prediction predict(const ForwardOutput& o) { return {argmax_rows(o.node_logits), argmax_rows(o.graph_logits)}; }

}  // namespace dualgnn::nn
