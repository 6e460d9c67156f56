#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "dualgnn/graph_build.hpp"
#include "dualgnn/rng.hpp"

namespace dualgnn {

// All metrics operate on a thresholded weighted adjacency. Path-based metrics
// use hop counts on the binary support. Undefined or degenerate values are
// reported as 0 so every metric is a total function.

// s_i = sum_j A_ij
inline Eigen::VectorXd node_strength(const Adjacency& adj) { return adj.weights.rowwise().sum(); }

// C_i = sum_{j != k} A_ij A_jk A_ki / sum_{j != k} A_ij A_ik; 0 for nodes with
// fewer than two neighbours.
inline Eigen::VectorXd local_clustering(const Adjacency& adj) {
  const Eigen::MatrixXd& a = adj.weights;
  const Eigen::Index n = a.rows();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  if (n < 3) return c;
  const Eigen::MatrixXd a2 = a * a;
  for (Eigen::Index i = 0; i < n; ++i) {
    int degree = 0;
    for (Eigen::Index j = 0; j < n; ++j) degree += a(i, j) > 0.0;
    if (degree < 2) continue;
    const double num = a2.row(i).dot(a.col(i));  // (A^3)_ii
    const double s = a.row(i).sum();
    const double den = s * s - a.row(i).squaredNorm();
    if (den > 0.0) c(i) = num / den;
  }
  return c;
}

inline double avg_clustering(const Adjacency& adj) {
  if (adj.size() == 0) return 0.0;
  return local_clustering(adj).mean();
}

// All-pairs hop distances on the binary support; -1 marks unreachable pairs.
inline Eigen::MatrixXi hop_distances(const Adjacency& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && adj.weights(i, j) > 0.0) nbrs[static_cast<std::size_t>(i)].push_back(j);
  Eigen::MatrixXi d = Eigen::MatrixXi::Constant(n, n, -1);
  std::vector<int> queue(static_cast<std::size_t>(n));
  for (int src = 0; src < n; ++src) {
    d(src, src) = 0;
    std::size_t head = 0, tail = 0;
    queue[tail++] = src;
    while (head < tail) {
      const int u = queue[head++];
      for (int v : nbrs[static_cast<std::size_t>(u)]) {
        if (d(src, v) < 0) {
          d(src, v) = d(src, u) + 1;
          queue[tail++] = v;
        }
      }
    }
  }
  return d;
}

// E_glob = 1/(N(N-1)) * sum_{i != j} 1/d_ij, unreachable pairs contribute 0.
inline double global_efficiency(const Adjacency& adj) {
  const Eigen::Index n = adj.size();
  if (n < 2) return 0.0;
  const auto d = hop_distances(adj);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && d(i, j) > 0) sum += 1.0 / d(i, j);
  return sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Component label per node; labels are numbered by smallest contained node.
inline std::vector<int> connected_components(const Adjacency& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (label[static_cast<std::size_t>(s)] >= 0) continue;
    std::deque<int> q{s};
    label[static_cast<std::size_t>(s)] = next;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (int v = 0; v < n; ++v)
        if (v != u && adj.weights(u, v) > 0.0 && label[static_cast<std::size_t>(v)] < 0) {
          label[static_cast<std::size_t>(v)] = next;
          q.push_back(v);
        }
    }
    ++next;
  }
  return label;
}

// Nodes of the largest connected component; ties go to the component with the
// smallest node id.
inline std::vector<int> largest_component(const Adjacency& adj) {
  const auto label = connected_components(adj);
  if (label.empty()) return {};
  const int n_comp = *std::max_element(label.begin(), label.end()) + 1;
  std::vector<int> size(static_cast<std::size_t>(n_comp), 0);
  for (int l : label) ++size[static_cast<std::size_t>(l)];
  const int best = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<int> nodes;
  for (int i = 0; i < static_cast<int>(label.size()); ++i)
    if (label[static_cast<std::size_t>(i)] == best) nodes.push_back(i);
  return nodes;
}

// Mean hop distance over ordered pairs of the largest component.
inline double char_path_length(const Adjacency& adj) {
  const auto comp = largest_component(adj);
  const std::size_t nc = comp.size();
  if (nc < 2) return 0.0;
  const auto d = hop_distances(adj);
  double sum = 0.0;
  for (int i : comp)
    for (int j : comp)
      if (i != j) sum += d(i, j);
  return sum / (static_cast<double>(nc) * static_cast<double>(nc - 1));
}

// Q = 1/(2m) sum_ij [A_ij - s_i s_j / 2m] delta(c_i, c_j) for a fixed partition.
inline double modularity(const Adjacency& adj, const std::vector<int>& community) {
  const Eigen::Index n = adj.size();
  const Eigen::VectorXd s = node_strength(adj);
  const double two_m = s.sum();
  if (two_m <= 0.0) return 0.0;
  double q = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (community[static_cast<std::size_t>(i)] == community[static_cast<std::size_t>(j)])
        q += adj.weights(i, j) - s(i) * s(j) / two_m;
  return q / two_m;
}

struct ModularityResult {
  double q = 0.0;
  std::vector<int> community;  // label per node, numbered by first member
};

// Greedy agglomerative maximization: starting from singletons, repeatedly merge
// the connected pair of communities with the largest modularity gain until no
// merge improves Q.
inline ModularityResult modularity_greedy(const Adjacency& adj) {
  const int n = static_cast<int>(adj.size());
  ModularityResult res;
  res.community.resize(static_cast<std::size_t>(n));
  std::iota(res.community.begin(), res.community.end(), 0);
  const Eigen::VectorXd s = node_strength(adj);
  const double two_m = s.sum();
  if (two_m <= 0.0) return res;

  Eigen::MatrixXd e = adj.weights / two_m;  // e_ij, symmetric; e_ii counts both orders
  Eigen::VectorXd a = s / two_m;
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<int> owner(static_cast<std::size_t>(n));
  std::iota(owner.begin(), owner.end(), 0);

  constexpr double kMinGain = 1e-12;
  while (true) {
    double best = kMinGain;
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!active[static_cast<std::size_t>(j)] || e(i, j) <= 0.0) continue;
        const double gain = 2.0 * (e(i, j) - a(i) * a(j));
        if (gain > best) {
          best = gain;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) break;
    e.row(bi) += e.row(bj);
    e.col(bi) += e.col(bj);
    e.row(bj).setZero();
    e.col(bj).setZero();
    a(bi) += a(bj);
    a(bj) = 0.0;
    active[static_cast<std::size_t>(bj)] = false;
    for (auto& o : owner)
      if (o == bj) o = bi;
  }

  std::vector<int> relabel(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    int& r = relabel[static_cast<std::size_t>(owner[static_cast<std::size_t>(i)])];
    if (r < 0) r = next++;
    res.community[static_cast<std::size_t>(i)] = r;
  }
  res.q = modularity(adj, res.community);
  return res;
}

// r = sum_ij (A_ij - s_i s_j/2m) s_i s_j / sum_ij (s_i delta_ij - s_i s_j/2m) s_i s_j,
// strength (weighted-degree) assortativity. 0 when the denominator vanishes.
inline double assortativity(const Adjacency& adj) {
  const Eigen::VectorXd s = node_strength(adj);
  const double two_m = s.sum();
  if (two_m <= 0.0) return 0.0;
  const double s2 = s.squaredNorm();
  const double num = s.dot(adj.weights * s) - s2 * s2 / two_m;
  const double den = s.array().cube().sum() - s2 * s2 / two_m;
  const double scale = s.array().cube().sum();
  if (std::abs(den) <= 1e-12 * scale) return 0.0;
  return num / den;
}

// Random graph with the same node count, edge count and multiset of edge
// weights (weights permuted over uniformly drawn node pairs).
inline Adjacency random_matched_graph(const Adjacency& adj, Rng& rng) {
  const int n = static_cast<int>(adj.size());
  const auto edges = edge_index(adj).edges;
  std::vector<double> w;
  w.reserve(edges.size());
  for (const auto& e : edges) w.push_back(e.weight);
  std::shuffle(w.begin(), w.end(), rng);

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max(n - 1, 0)) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  Adjacency out;
  out.tau = adj.tau;
  out.weights = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < w.size(); ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, pairs.size() - 1);
    std::swap(pairs[k], pairs[pick(rng)]);
    out.weights(pairs[k].first, pairs[k].second) = w[k];
    out.weights(pairs[k].second, pairs[k].first) = w[k];
  }
  return out;
}

// sigma = (C / C_rand) / (L / L_rand) against n_rand seeded matched random
// graphs; 0 whenever any of C_rand, L_rand, L is 0 or N < 4.
inline double small_world_index(const Adjacency& adj, int n_rand = 20, std::uint64_t seed = 0) {
  if (adj.size() < 4 || n_rand < 1) return 0.0;
  const double c = avg_clustering(adj);
  const double l = char_path_length(adj);
  if (l == 0.0) return 0.0;
  Rng rng(derive_seed(seed, "small-world"));
  double c_rand = 0.0, l_rand = 0.0;
  for (int r = 0; r < n_rand; ++r) {
    const auto g = random_matched_graph(adj, rng);
    c_rand += avg_clustering(g);
    l_rand += char_path_length(g);
  }
  c_rand /= n_rand;
  l_rand /= n_rand;
  if (c_rand == 0.0 || l_rand == 0.0) return 0.0;
  return (c / c_rand) / (l / l_rand);
}

struct GraphFeatures {
  double global_efficiency = 0.0;
  double char_path_length = 0.0;
  double avg_clustering = 0.0;
  double modularity = 0.0;
  double small_world = 0.0;
  double assortativity = 0.0;

  static constexpr std::size_t kSize = 6;
  std::array<double, kSize> to_array() const {
    return {global_efficiency, char_path_length, avg_clustering, modularity, small_world, assortativity};
  }
  static GraphFeatures from_array(const std::array<double, kSize>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
};

inline GraphFeatures graph_feature_vector(const Adjacency& adj, std::uint64_t seed = 0, int n_rand = 20) {
  GraphFeatures g;
  g.global_efficiency = global_efficiency(adj);
  g.char_path_length = char_path_length(adj);
  g.avg_clustering = avg_clustering(adj);
  g.modularity = modularity_greedy(adj).q;
  g.small_world = small_world_index(adj, n_rand, seed);
  g.assortativity = assortativity(adj);
  return g;
}

}  // namespace dualgnn
