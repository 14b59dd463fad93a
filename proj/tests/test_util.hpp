#pragma once

// Shared helpers for the test suites: small graph builders, random graphs,
// a brute-force isomorphism check and a central finite-difference oracle.

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "lggan/graph.hpp"
#include "lggan/rng.hpp"

namespace lggan::testing {

inline LabeledGraph complete_graph(int n, int label = 0, int cls = 0) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, e, std::vector<int>(n, label), cls);
}

inline LabeledGraph path_graph(int n, int label = 0, int cls = 0) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e, std::vector<int>(n, label), cls);
}

inline LabeledGraph cycle_graph(int n, int label = 0, int cls = 0) {
  auto g = path_graph(n, label, cls);
  g.edges.emplace_back(0, n - 1);
  g.normalize();
  return g;
}

// Center 0 with `leaves` leaves.
inline LabeledGraph star_graph(int leaves, int label = 0, int cls = 0) {
  std::vector<Edge> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e, std::vector<int>(leaves + 1, label), cls);
}

inline LabeledGraph random_graph(Rng& rng, int n, double p, int num_labels = 1, int cls = 0) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) e.emplace_back(i, j);
  std::vector<int> labels(n);
  for (int& l : labels) l = rng.index(num_labels);
  return make_graph(n, e, labels, cls);
}

inline Eigen::MatrixXi adjacency(const LabeledGraph& g) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(g.n, g.n);
  for (auto [u, v] : g.edges) a(u, v) = a(v, u) = 1;
  return a;
}

// Label-preserving isomorphism by backtracking over all bijections.
inline bool isomorphic(const LabeledGraph& a, const LabeledGraph& b) {
  if (a.n != b.n || a.edges.size() != b.edges.size()) return false;
  auto A = adjacency(a), B = adjacency(b);
  std::vector<int> map(a.n, -1);
  std::vector<bool> used(b.n, false);
  std::function<bool(int)> extend = [&](int i) -> bool {
    if (i == a.n) return true;
    for (int j = 0; j < b.n; ++j) {
      if (used[j] || a.node_labels[i] != b.node_labels[j]) continue;
      bool ok = true;
      for (int k = 0; k < i && ok; ++k) ok = A(i, k) == B(j, map[k]);
      if (!ok) continue;
      map[i] = j;
      used[j] = true;
      if (extend(i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return extend(0);
}

inline std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Central differences of f over every entry of x.
inline Eigen::MatrixXd finite_difference(const std::function<double(const Eigen::MatrixXd&)>& f,
                                         Eigen::MatrixXd x, double eps = 1e-5) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + eps;
    const double up = f(x);
    x.data()[i] = saved - eps;
    const double down = f(x);
    x.data()[i] = saved;
    g.data()[i] = (up - down) / (2 * eps);
  }
  return g;
}

// max_i |a_i - b_i| / max(|b_i|, floor) -- relative error with an absolute floor.
inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             double floor = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double diff = std::abs(a.data()[i] - b.data()[i]);
    if (diff <= floor) continue;
    worst = std::max(worst, diff / std::max(std::abs(b.data()[i]), floor));
  }
  return worst;
}

}  // namespace lggan::testing
