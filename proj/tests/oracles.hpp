#pragma once

// Brute-force reference implementations shared by the unit tests and the
// acceptance run.

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "lggan/stats.hpp"
#include "lggan/svm.hpp"
#include "test_util.hpp"

namespace lggan::testing {

// Graphlet templates with the orbit of every vertex, matched by brute force.
struct Template {
  int k;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> orbit;
};

inline const std::vector<Template>& templates() {
  static const std::vector<Template> t = {
      {2, {{0, 1}}, {0, 0}},
      {3, {{0, 1}, {1, 2}}, {1, 2, 1}},
      {3, {{0, 1}, {1, 2}, {0, 2}}, {3, 3, 3}},
      {4, {{0, 1}, {1, 2}, {2, 3}}, {4, 5, 5, 4}},
      {4, {{0, 1}, {0, 2}, {0, 3}}, {7, 6, 6, 6}},
      {4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {8, 8, 8, 8}},
      {4, {{0, 1}, {1, 2}, {2, 0}, {0, 3}}, {11, 10, 10, 9}},
      {4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}}, {13, 12, 13, 12}},
      {4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, {14, 14, 14, 14}},
  };
  return t;
}

inline OrbitMatrix brute_force_orbits(const LabeledGraph& g) {
  auto a = lggan::testing::adjacency(g);
  OrbitMatrix out = OrbitMatrix::Zero(g.n, kNumOrbits);
  std::vector<int> subset;
  auto classify = [&] {
    const int k = static_cast<int>(subset.size());
    for (const auto& t : templates()) {
      if (t.k != k) continue;
      Eigen::MatrixXi ta = Eigen::MatrixXi::Zero(k, k);
      for (auto [u, v] : t.edges) ta(u, v) = ta(v, u) = 1;
      std::vector<int> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        bool ok = true;
        for (int i = 0; i < k && ok; ++i)
          for (int j = 0; j < k && ok; ++j)
            if (i != j) ok = a(subset[i], subset[j]) == ta(perm[i], perm[j]);
        if (ok) {
          for (int i = 0; i < k; ++i) ++out(subset[i], t.orbit[perm[i]]);
          return;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  };
  std::function<void(int)> rec = [&](int start) {
    if (subset.size() >= 2) classify();
    if (subset.size() == 4) return;
    for (int v = start; v < g.n; ++v) {
      subset.push_back(v);
      rec(v + 1);
      subset.pop_back();
    }
  };
  rec(0);
  return out;
}

// Exact dual optimum by enumerating which variables sit at 0, at C, or free.
inline double exact_dual_optimum(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C) {
  const int n = static_cast<int>(K.rows());
  Eigen::MatrixXd Q = (y * y.transpose()).cwiseProduct(K);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> state(n, 0);
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    long c = code;
    std::vector<int> fr;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      state[i] = static_cast<int>(c % 3);
      c /= 3;
      if (state[i] == 1) a(i) = C;
      if (state[i] == 2) fr.push_back(i);
    }
    const int f = static_cast<int>(fr.size());
    if (f > 0) {
      // Stationarity on free vars with the equality multiplier nu.
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(f + 1, f + 1);
      Eigen::VectorXd rhs(f + 1);
      for (int p = 0; p < f; ++p) {
        for (int q = 0; q < f; ++q) M(p, q) = Q(fr[p], fr[q]);
        M(p, f) = y(fr[p]);
        M(f, p) = y(fr[p]);
        rhs(p) = 1.0 - Q.row(fr[p]).dot(a);
      }
      rhs(f) = -y.dot(a);
      Eigen::VectorXd sol = M.completeOrthogonalDecomposition().solve(rhs);
      if ((M * sol - rhs).norm() > 1e-8) continue;
      for (int p = 0; p < f; ++p) a(fr[p]) = sol(p);
    }
    if (std::abs(y.dot(a)) > 1e-9) continue;
    if (a.minCoeff() < -1e-9 || a.maxCoeff() > C + 1e-9) continue;
    best = std::min(best, svm_dual_objective(K, y, a));
  }
  return best;
}

}  // namespace lggan::testing
