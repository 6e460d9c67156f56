#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dualgnn/core_data.hpp"
#include "dualgnn/dsp.hpp"
#include "dualgnn/graph_metrics.hpp"

namespace dualgnn {

// Fraction of each phase series dropped at both ends before averaging.
inline constexpr double kPlvEdgeTrim = 0.05;

// Phase-locking value between all channel pairs of a channels x T matrix.
// Constant channels have undefined phase: their off-diagonal entries are 0.
template <typename Derived>
Eigen::MatrixXd plv_matrix(const Eigen::MatrixBase<Derived>& data, double edge_trim = kPlvEdgeTrim) {
  const Eigen::Index n = data.rows();
  const Eigen::Index t_len = data.cols();
  if (t_len < 8) throw ValidationError("plv_matrix: need at least 8 samples");
  const auto skip = static_cast<Eigen::Index>(std::floor(edge_trim * static_cast<double>(t_len)));
  const Eigen::Index t0 = skip, t1 = t_len - skip;

  Eigen::MatrixXcd unit(n, t1 - t0);
  std::vector<double> row(static_cast<std::size_t>(t_len));
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index t = 0; t < t_len; ++t) row[static_cast<std::size_t>(t)] = static_cast<double>(data(c, t));
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    if (*lo == *hi) {
      unit.row(c).setZero();
      continue;
    }
    const auto phase = dsp::instantaneous_phase(row);
    for (Eigen::Index t = t0; t < t1; ++t) unit(c, t - t0) = std::polar(1.0, phase[static_cast<std::size_t>(t)]);
  }
  // |mean_t e^{i(phi_x - phi_y)}| for all pairs at once.
  const Eigen::MatrixXcd cross = unit * unit.adjoint() / static_cast<double>(t1 - t0);
  Eigen::MatrixXd plv = cross.cwiseAbs();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::clamp(0.5 * (plv(i, j) + plv(j, i)), 0.0, 1.0);
      plv(i, j) = plv(j, i) = v;
    }
    plv(i, i) = 1.0;
  }
  return plv;
}

struct PLVNetwork {
  Eigen::MatrixXd plv;
  double theta = 0.65;
  std::vector<Edge> edges;  // i < j, plv > theta
  std::vector<std::uint8_t> soz_mask;

  Eigen::Index size() const { return plv.rows(); }
};

inline PLVNetwork plv_network(const Eigen::MatrixXd& plv, double theta, std::span<const std::uint8_t> soz_mask) {
  if (plv.rows() != plv.cols()) throw ShapeError("plv_network: matrix must be square");
  if (static_cast<Eigen::Index>(soz_mask.size()) != plv.rows()) throw ShapeError("plv_network: soz_mask length");
  PLVNetwork net;
  net.plv = plv;
  net.theta = theta;
  net.soz_mask.assign(soz_mask.begin(), soz_mask.end());
  for (int i = 0; i < plv.rows(); ++i)
    for (int j = i + 1; j < plv.cols(); ++j)
      if (plv(i, j) > theta) net.edges.push_back({i, j, plv(i, j)});
  return net;
}

struct WindowNetworkMetrics {
  double density = 0.0;
  double avg_clustering = 0.0;
  double avg_soz_degree = 0.0;
  double avg_soz_plv = 0.0;
};

inline WindowNetworkMetrics window_network_metrics(const PLVNetwork& net) {
  WindowNetworkMetrics m;
  const Eigen::Index n = net.size();
  if (n < 2) return m;
  Adjacency bin;
  bin.weights = Eigen::MatrixXd::Zero(n, n);
  bin.tau = net.theta;
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  double soz_plv_sum = 0.0;
  std::size_t soz_edges = 0;
  for (const auto& e : net.edges) {
    bin.weights(e.i, e.j) = bin.weights(e.j, e.i) = 1.0;
    ++degree[static_cast<std::size_t>(e.i)];
    ++degree[static_cast<std::size_t>(e.j)];
    if (net.soz_mask[static_cast<std::size_t>(e.i)] || net.soz_mask[static_cast<std::size_t>(e.j)]) {
      soz_plv_sum += e.weight;
      ++soz_edges;
    }
  }
  m.density = 2.0 * static_cast<double>(net.edges.size()) / (static_cast<double>(n) * static_cast<double>(n - 1));
  m.avg_clustering = avg_clustering(bin);
  std::size_t n_soz = 0;
  double deg_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (net.soz_mask[static_cast<std::size_t>(i)]) {
      ++n_soz;
      deg_sum += degree[static_cast<std::size_t>(i)];
    }
  if (n_soz > 0) m.avg_soz_degree = deg_sum / static_cast<double>(n_soz);
  if (soz_edges > 0) m.avg_soz_plv = soz_plv_sum / static_cast<double>(soz_edges);
  return m;
}

struct DynamicsRow {
  std::size_t window_index = 0;
  double start_s = 0.0;
  WindowNetworkMetrics metrics;
};

struct DynamicsOptions {
  double window_s = 2.0;
  double theta = 0.65;
};

// One PLV network per consecutive non-overlapping window. The optional
// callback receives each network (used for SVG rendering).
template <typename OnNetwork>
std::vector<DynamicsRow> dynamics_report(const Recording& rec, const DynamicsOptions& opt, OnNetwork&& on_network) {
  validate(rec);
  const WindowSpec spec{opt.window_s, 0.0};
  const auto windows = segment_windows(rec, spec);
  std::vector<DynamicsRow> rows;
  rows.reserve(windows.size());
  for (const auto& w : windows) {
    const auto net = plv_network(plv_matrix(w.data), opt.theta, rec.soz_mask);
    DynamicsRow r;
    r.window_index = w.source.window_index;
    r.start_s = static_cast<double>(w.source.window_index) * opt.window_s;
    r.metrics = window_network_metrics(net);
    rows.push_back(r);
    on_network(w.source.window_index, net);
  }
  return rows;
}

inline std::vector<DynamicsRow> dynamics_report(const Recording& rec, const DynamicsOptions& opt = {}) {
  return dynamics_report(rec, opt, [](std::size_t, const PLVNetwork&) {});
}

// Mean of each metric over the rows.
inline WindowNetworkMetrics mean_metrics(std::span<const DynamicsRow> rows) {
  WindowNetworkMetrics m;
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.density += r.metrics.density;
    m.avg_clustering += r.metrics.avg_clustering;
    m.avg_soz_degree += r.metrics.avg_soz_degree;
    m.avg_soz_plv += r.metrics.avg_soz_plv;
  }
  const double k = static_cast<double>(rows.size());
  m.density /= k;
  m.avg_clustering /= k;
  m.avg_soz_degree /= k;
  m.avg_soz_plv /= k;
  return m;
}

// Circular layout of the `max_nodes` highest-degree nodes (summed over all
// windows of the recording, so the subset is fixed). SOZ nodes are drawn in
// red; only SOZ-incident edges are drawn, width growing with PLV.
inline std::vector<int> top_degree_nodes(std::span<const PLVNetwork> nets, int max_nodes) {
  if (nets.empty()) return {};
  const Eigen::Index n = nets.front().size();
  std::vector<double> deg(static_cast<std::size_t>(n), 0.0);
  for (const auto& net : nets)
    for (const auto& e : net.edges) {
      deg[static_cast<std::size_t>(e.i)] += 1.0;
      deg[static_cast<std::size_t>(e.j)] += 1.0;
    }
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return deg[static_cast<std::size_t>(a)] > deg[static_cast<std::size_t>(b)]; });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(std::max(max_nodes, 0))));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline std::string network_svg(const PLVNetwork& net, std::span<const int> nodes, const std::string& title) {
  constexpr double kSize = 400.0, kRadius = 160.0, kCenter = 200.0;
  std::vector<int> pos(static_cast<std::size_t>(net.size()), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) pos[static_cast<std::size_t>(nodes[k])] = static_cast<int>(k);
  auto xy = [&](int node) {
    const double a = 2.0 * std::numbers::pi * pos[static_cast<std::size_t>(node)] / static_cast<double>(nodes.size());
    return std::pair{kCenter + kRadius * std::cos(a), kCenter + kRadius * std::sin(a)};
  };
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                kSize, kSize + 20.0, kSize, kSize + 20.0);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf), "<text x=\"10\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">%s</text>\n",
                title.c_str());
  out += buf;
  for (const auto& e : net.edges) {
    if (pos[static_cast<std::size_t>(e.i)] < 0 || pos[static_cast<std::size_t>(e.j)] < 0) continue;
    if (!net.soz_mask[static_cast<std::size_t>(e.i)] && !net.soz_mask[static_cast<std::size_t>(e.j)]) continue;
    const auto [x1, y1] = xy(e.i);
    const auto [x2, y2] = xy(e.j);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#555\" stroke-width=\"%.2f\"/>\n", x1,
                  y1 + 20.0, x2, y2 + 20.0, 0.5 + 4.0 * e.weight);
    out += buf;
  }
  for (int node : nodes) {
    const auto [x, y] = xy(node);
    const bool soz = net.soz_mask[static_cast<std::size_t>(node)] != 0;
    std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"6\" fill=\"%s\" stroke=\"black\"/>\n", x,
                  y + 20.0, soz ? "#d62728" : "#1f77b4");
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace dualgnn
