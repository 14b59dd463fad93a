#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lggan/baselines.hpp"
#include "lggan/stats.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lggan;
using lggan::testing::brute_force_orbits;
using lggan::testing::complete_graph;
using lggan::testing::path_graph;
using lggan::testing::random_graph;
using lggan::testing::star_graph;

namespace {

GraphDataset dataset_of(std::vector<LabeledGraph> gs, int c = 1) {
  GraphDataset d;
  d.graphs = std::move(gs);
  d.num_node_labels = c;
  return d;
}

}  // namespace

TEST_CASE("degree histogram examples") {
  auto k4 = degree_histogram(complete_graph(4), 5);
  CHECK(k4.bins(3) == doctest::Approx(1.0));
  auto empty = degree_histogram(make_graph(5, {}, std::vector<int>(5, 0)), 3);
  CHECK(empty.bins(0) == doctest::Approx(1.0));
  auto s = degree_histogram(star_graph(4), 4);
  CHECK(s.bins(1) == doctest::Approx(0.8));
  CHECK(s.bins(4) == doctest::Approx(0.2));
  // Overflow goes to the last bin.
  auto clamp = degree_histogram(complete_graph(5), 2);
  CHECK(clamp.bins(2) == doctest::Approx(1.0));
}

TEST_CASE("clustering examples") {
  for (double c : clustering_coefficients(complete_graph(3))) CHECK(c == doctest::Approx(1.0));
  for (double c : clustering_coefficients(star_graph(4))) CHECK(c == 0.0);
  auto diamond = make_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}}, {0, 0, 0, 0});
  auto c = clustering_coefficients(diamond);
  CHECK(c[0] == doctest::Approx(2.0 / 3));
  CHECK(c[2] == doctest::Approx(2.0 / 3));
  CHECK(c[1] == doctest::Approx(1.0));
  CHECK(c[3] == doctest::Approx(1.0));
  auto h = clustering_histogram(complete_graph(3), 10);
  CHECK(h.bins(9) == doctest::Approx(1.0));
}

TEST_CASE("orbit examples") {
  auto k3 = orbit_counts_per_node(complete_graph(3));
  for (int u = 0; u < 3; ++u) {
    CHECK(k3(u, 3) == 1);
    CHECK(k3(u, 0) == 2);
  }
  auto p = orbit_counts_per_node(path_graph(3));
  CHECK(p(0, 1) == 1);
  CHECK(p(2, 1) == 1);
  CHECK(p(1, 2) == 1);
  CHECK(p(1, 1) == 0);
  CHECK(orbit_counts(make_graph(4, {}, {0, 0, 0, 0})).bins.isZero());
  CHECK_THROWS(orbit_counts(make_graph(kMaxOrbitNodes + 1, {}, std::vector<int>(kMaxOrbitNodes + 1, 0))));
}

TEST_CASE("orbit counts agree with a brute-force isomorphism oracle") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + rng.index(10);
    auto g = random_graph(rng, n, rng.uniform(0.1, 0.9));
    CHECK(orbit_counts_per_node(g) == brute_force_orbits(g));
  }
}

TEST_CASE("label distribution examples") {
  auto h = label_distribution(make_graph(3, {}, {0, 0, 1}), 3);
  CHECK(h.bins(0) == doctest::Approx(2.0 / 3));
  CHECK(h.bins(1) == doctest::Approx(1.0 / 3));
  CHECK(h.bins(2) == 0.0);
  CHECK(label_distribution(make_graph(2, {}, {1, 1}), 2).bins == Eigen::Vector2d(0, 1));
  CHECK(label_distribution(make_graph(4, {}, {0, 1, 2, 3}), 4).bins.isApprox(Eigen::Vector4d::Constant(0.25)));
}

TEST_CASE("mmd examples, symmetry and the naive oracle") {
  StatHistogram x{StatKind::Degree, Eigen::Vector3d(1, 0, 0), 1.0};
  StatHistogram y{StatKind::Degree, Eigen::Vector3d(0, 0, 1), 1.0};
  std::vector<StatHistogram> a{x}, b{y};
  CHECK(mmd(a, a, 1.0) == 0.0);
  const double d = 2.0, sigma = 1.5;
  CHECK(mmd(a, b, sigma) == doctest::Approx(std::sqrt(2 - 2 * std::exp(-d * d / (2 * sigma * sigma)))));

  StatHistogram o{StatKind::Orbit, Eigen::VectorXd::Zero(kNumOrbits), 1.0};
  std::vector<StatHistogram> orb{o};
  CHECK_THROWS_AS(mmd(a, orb, 1.0), std::invalid_argument);

  Rng rng(5);
  auto random_set = [&](int count) {
    std::vector<StatHistogram> s;
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(6, [&] { return rng.uniform(); });
      s.push_back({StatKind::Degree, v / v.sum(), 1.0});
    }
    return s;
  };
  for (int t = 0; t < 5; ++t) {
    auto s1 = random_set(4 + t), s2 = random_set(7 - t);
    double xx = 0, yy = 0, xy = 0;
    for (auto& p : s1)
      for (auto& q : s1) xx += std::exp(-std::pow(histogram_distance(p, q), 2) / 2);
    for (auto& p : s2)
      for (auto& q : s2) yy += std::exp(-std::pow(histogram_distance(p, q), 2) / 2);
    for (auto& p : s1)
      for (auto& q : s2) xy += std::exp(-std::pow(histogram_distance(p, q), 2) / 2);
    const double n1 = s1.size(), n2 = s2.size();
    const double naive = std::sqrt(std::max(0.0, xx / (n1 * n1) + yy / (n2 * n2) - 2 * xy / (n1 * n2)));
    CHECK(std::abs(mmd(s1, s2, 1.0) - naive) < 1e-12);
    CHECK(mmd(s1, s2, 1.0) == mmd(s2, s1, 1.0));
    CHECK(std::abs(mmd(s1, s1, 1.0)) < 1e-12);
  }
}

TEST_CASE("evaluate: identity, ER separation, label conventions") {
  Rng rng(3);
  auto er_set = [&](double p) {
    std::vector<LabeledGraph> gs;
    for (int i = 0; i < 100; ++i) gs.push_back(random_graph(rng, 12, p, 2));
    return dataset_of(gs, 2);
  };
  auto low1 = er_set(0.1), low2 = er_set(0.1), high = er_set(0.9);
  auto self = evaluate(low1, low1);
  CHECK(self.degree < 1e-12);
  CHECK(self.clustering < 1e-12);
  CHECK(self.orbit < 1e-12);
  CHECK(self.label < 1e-12);
  const double sep = evaluate(low1, high).degree;
  const double noise = evaluate(low1, low2).degree;
  CHECK(sep > 10 * noise);

  // Same structure, label convention swapped (all 0 vs all 1).
  auto flipped = low1;
  for (auto& g : low1.graphs) std::fill(g.node_labels.begin(), g.node_labels.end(), 0);
  for (auto& g : flipped.graphs) std::fill(g.node_labels.begin(), g.node_labels.end(), 1);
  CHECK(evaluate(low1, flipped).label > 0.0);

  std::ostringstream os;
  write_report(os, self);
  CHECK(os.str().find("degree 0 1 biased-v") != std::string::npos);
}

TEST_CASE("histogram invariants on random graphs") {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    auto g = random_graph(rng, 1 + rng.index(15), rng.uniform(), 3);
    CHECK(std::abs(degree_histogram(g, 20).bins.sum() - 1.0) < 1e-12);
    for (double c : clustering_coefficients(g)) {
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
  }
}

TEST_CASE("per-class statistics") {
  Rng rng(4);
  std::vector<LabeledGraph> gs;
  for (int i = 0; i < 20; ++i) gs.push_back(random_graph(rng, 10, 0.4, 2));
  auto d = dataset_of(gs, 2);
  auto same = per_class_stats(d, d);
  CHECK(same.avg_degree < 1e-12);
  CHECK(same.avg_clustering < 1e-12);
  CHECK(same.avg_orbit < 1e-12);

  // Single label: the induced subgraph is the whole graph.
  std::vector<LabeledGraph> a1, b1;
  for (int i = 0; i < 10; ++i) {
    a1.push_back(random_graph(rng, 8, 0.3));
    b1.push_back(random_graph(rng, 8, 0.7));
  }
  auto pa = dataset_of(a1), pb = dataset_of(b1);
  auto pc = per_class_stats(pa, pb);
  auto ev = evaluate(pa, pb);
  REQUIRE(pc.rows.size() == 1);
  CHECK(pc.avg_degree == doctest::Approx(ev.degree));
  CHECK(pc.avg_clustering == doctest::Approx(ev.clustering));
  CHECK(pc.avg_orbit == doctest::Approx(ev.orbit));

  // Same labels, within-class clique vs within-class matching.
  auto build = [](bool clique) {
    std::vector<Edge> e;
    for (int base : {0, 4})
      if (clique) {
        for (int i = 0; i < 4; ++i)
          for (int j = i + 1; j < 4; ++j) e.emplace_back(base + i, base + j);
      } else {
        e.emplace_back(base, base + 1);
        e.emplace_back(base + 2, base + 3);
      }
    return make_graph(8, e, {0, 0, 0, 0, 1, 1, 1, 1});
  };
  auto cl = dataset_of({build(true), build(true)}, 2), mt = dataset_of({build(false), build(false)}, 2);
  CHECK(evaluate(cl, mt).label < 1e-12);
  CHECK(per_class_stats(cl, mt).avg_degree > 0.0);

  // A label missing on one side is skipped.
  auto only0 = dataset_of({make_graph(2, {{0, 1}}, {0, 0})}, 2);
  auto pr = per_class_stats(only0, cl);
  CHECK(pr.skipped == std::vector<int>{1});
  CHECK_THROWS(per_class_stats(only0, dataset_of({make_graph(1, {}, {0})}, 3)));
}
