#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dualgnn/core_data.hpp"
#include "dualgnn/errors.hpp"

namespace dualgnn {

// Symmetric, zero-diagonal weighted adjacency. Any positive entry exceeds tau.
struct Adjacency {
  Eigen::MatrixXd weights;
  double tau = 0.0;

  Eigen::Index size() const { return weights.rows(); }
};

struct Edge {
  int i = 0;
  int j = 0;  // i < j
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

struct EdgeIndex {
  int n_nodes = 0;
  std::vector<Edge> edges;  // sorted lexicographically by (i, j)
};

// Zero-lag Pearson correlation between rows of `data` (channels x T).
// Correlations involving a constant channel are 0; the diagonal is 1.
template <typename Derived>
Eigen::MatrixXd pearson_matrix(const Eigen::MatrixBase<Derived>& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index t = data.cols();
  if (t < 2) throw ValidationError("pearson_matrix: need at least 2 samples per channel");
  Eigen::MatrixXd z = data.template cast<double>();
  std::vector<bool> constant(static_cast<std::size_t>(n), false);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double scale = z.row(r).cwiseAbs().maxCoeff();  // before centring, so rounding residue counts as constant
    z.row(r).array() -= z.row(r).mean();
    const double norm = z.row(r).norm();
    if (norm == 0.0 || norm <= 1e-12 * scale * std::sqrt(static_cast<double>(t))) {
      constant[static_cast<std::size_t>(r)] = true;
      z.row(r).setZero();
    } else {
      z.row(r) /= norm;
    }
  }
  Eigen::MatrixXd corr = z * z.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      corr(i, j) = std::clamp(corr(i, j), -1.0, 1.0);
    }
    corr(i, i) = 1.0;
  }
  // Symmetrize away rounding differences between (i, j) and (j, i).
  corr = 0.5 * (corr + corr.transpose()).eval();
  return corr;
}

inline Eigen::MatrixXd pearson_matrix(const LabeledWindow& w) { return pearson_matrix(w.data); }

// A_ij = |r_ij| if |r_ij| > tau and i != j, else 0.
inline Adjacency threshold_adjacency(const Eigen::MatrixXd& corr, double tau = 0.3) {
  if (corr.rows() != corr.cols()) throw ShapeError("threshold_adjacency: matrix must be square");
  Adjacency adj;
  adj.tau = tau;
  const Eigen::Index n = corr.rows();
  adj.weights = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double a = std::abs(corr(i, j));
      if (a > tau) adj.weights(i, j) = a;
    }
  return adj;
}

inline EdgeIndex edge_index(const Adjacency& adj) {
  EdgeIndex e;
  e.n_nodes = static_cast<int>(adj.size());
  for (int i = 0; i < e.n_nodes; ++i)
    for (int j = i + 1; j < e.n_nodes; ++j)
      if (adj.weights(i, j) > 0.0) e.edges.push_back({i, j, adj.weights(i, j)});
  return e;
}

inline Adjacency adjacency_from_edges(const EdgeIndex& e, double tau) {
  Adjacency adj;
  adj.tau = tau;
  adj.weights = Eigen::MatrixXd::Zero(e.n_nodes, e.n_nodes);
  for (const auto& edge : e.edges) {
    if (edge.i < 0 || edge.j >= e.n_nodes || edge.i >= edge.j)
      throw ValidationError("adjacency_from_edges: edge endpoints out of order or range");
    adj.weights(edge.i, edge.j) = edge.weight;
    adj.weights(edge.j, edge.i) = edge.weight;
  }
  return adj;
}

// Binary support of a weighted adjacency (1 where weight > 0).
inline Adjacency binarize(const Adjacency& adj) {
  Adjacency b = adj;
  b.weights = (adj.weights.array() > 0.0).cast<double>();
  return b;
}

}  // namespace dualgnn
