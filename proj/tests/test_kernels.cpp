#include <doctest.h>

#include <cmath>

#include "lggan/baselines.hpp"
#include "lggan/kernels.hpp"
#include "lggan/svm.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lggan;
using lggan::testing::complete_graph;
using lggan::testing::exact_dual_optimum;
using lggan::testing::path_graph;
using lggan::testing::random_graph;

namespace {

GraphDataset dataset_of(std::vector<LabeledGraph> gs, int c = 1, int g = 2) {
  GraphDataset d;
  d.graphs = std::move(gs);
  d.num_node_labels = c;
  d.num_graph_classes = g;
  return d;
}

KernelOptions opts(KernelKind k) {
  KernelOptions o;
  o.kind = k;
  return o;
}

}  // namespace

TEST_CASE("WL kernel examples") {
  auto a = make_graph(1, {}, {0}), b = make_graph(1, {}, {0});
  CHECK(wl_kernel(a, b, 2) == 3.0);
  Rng rng(1);
  auto g = random_graph(rng, 9, 0.4, 3);
  auto pg = relabel(g, rng.permutation(g.n));
  CHECK(wl_kernel(g, pg, 3) == wl_kernel(g, g, 3));
  auto c = make_graph(3, {{0, 1}, {1, 2}}, {0, 0, 0});
  auto d = make_graph(3, {{0, 1}, {1, 2}}, {1, 1, 1});
  CHECK(wl_kernel(c, d, 3) == 0.0);
}

TEST_CASE("shortest-path kernel examples") {
  auto k2 = make_graph(2, {{0, 1}}, {0, 0});
  CHECK(sp_kernel(k2, k2) > 0.0);
  auto other = make_graph(2, {{0, 1}}, {1, 1});
  CHECK(sp_kernel(k2, other) == 0.0);
  CHECK(sp_kernel(path_graph(3), path_graph(3)) == 5.0);
  // Tail bin: distances beyond the cap collapse.
  CHECK(sp_kernel(path_graph(5), path_graph(5), 2) == 4 * 4 + 6 * 6);
}

TEST_CASE("graphlet kernel examples") {
  CHECK(graphlet_frequencies(complete_graph(5), 3)(3) == doctest::Approx(1.0));
  CHECK(graphlet_frequencies(make_graph(5, {}, std::vector<int>(5, 0)), 3)(0) == doctest::Approx(1.0));
  auto diamond = make_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}}, {0, 0, 0, 0});
  auto f = graphlet_frequencies(diamond, 3);
  CHECK(f(0) == 0.0);
  CHECK(f(1) == 0.0);
  CHECK(f(2) == doctest::Approx(0.5));
  CHECK(f(3) == doctest::Approx(0.5));
  CHECK(graphlet_kernel(path_graph(2), complete_graph(4), 3) == 0.0);
  CHECK(graphlet_frequencies(complete_graph(4), 4)(10) == doctest::Approx(1.0));
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    auto g = random_graph(rng, 4 + rng.index(6), rng.uniform());
    CHECK(graphlet_frequencies(g, 3).sum() == doctest::Approx(1.0));
    CHECK(graphlet_frequencies(g, 4).sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("kernel distance examples") {
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  CHECK(kernel_distance(I, 1, 1) == 0.0);
  CHECK(kernel_distance(I, 0, 2) == doctest::Approx(std::sqrt(2.0)));
  Rng rng(3);
  std::vector<LabeledGraph> gs;
  for (int i = 0; i < 6; ++i) gs.push_back(random_graph(rng, 6, 0.5, 2));
  auto K = gram_matrix(gs, opts(KernelKind::WeisfeilerLehman));
  CHECK(kernel_distance(K, 1, 4) == kernel_distance(K, 4, 1));
  CHECK_THROWS_AS(kernel_distance(K, 0, 6), std::out_of_range);
}

TEST_CASE("gram matrices are symmetric PSD and distances are metric") {
  Rng rng(4);
  for (auto kind : {KernelKind::WeisfeilerLehman, KernelKind::ShortestPath, KernelKind::Graphlet}) {
    for (int set = 0; set < 30; ++set) {
      std::vector<LabeledGraph> gs;
      const int count = 2 + rng.index(29);
      for (int i = 0; i < count; ++i) gs.push_back(random_graph(rng, 3 + rng.index(8), rng.uniform(), 3));
      auto K = gram_matrix(gs, opts(kind));
      REQUIRE(K.isApprox(K.transpose(), 0.0));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, es.eigenvalues().maxCoeff()));
      if (set % 10 == 0) {
        bool ok = true;
        for (int i = 0; i < count && ok; ++i)
          for (int j = 0; j < count && ok; ++j)
            for (int k = 0; k < count && ok; ++k)
              ok = kernel_distance(K, i, k) <= kernel_distance(K, i, j) + kernel_distance(K, j, k) + 1e-9;
        CHECK(ok);
      }
    }
  }
}

TEST_CASE("diversity examples") {
  Rng rng(5);
  std::vector<LabeledGraph> train;
  for (int i = 0; i < 8; ++i) train.push_back(random_graph(rng, 8, 0.4, 2));
  auto copies = diversity(dataset_of(train, 2), dataset_of(train, 2), opts(KernelKind::WeisfeilerLehman));
  for (double d : copies.generated_min) CHECK(d < 1e-7);
  CHECK(copies.generated_hist.counts[0] == 8);

  std::vector<LabeledGraph> alien;
  for (int i = 0; i < 5; ++i) {
    auto g = random_graph(rng, 8, 0.4);
    std::fill(g.node_labels.begin(), g.node_labels.end(), 7);
    alien.push_back(g);
  }
  auto far = diversity(dataset_of(alien, 8), dataset_of(train, 2), opts(KernelKind::WeisfeilerLehman));
  for (double d : far.generated_min) CHECK(d == doctest::Approx(std::sqrt(2.0)));

  auto twins = diversity(dataset_of(train, 2), dataset_of({train[0], train[0]}, 2),
                         opts(KernelKind::WeisfeilerLehman));
  for (double d : twins.training_min) CHECK(d < 1e-7);
}

TEST_CASE("svm: separable, conflicting, and the QP oracle") {
  // Block-diagonal Gram with two classes.
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(6, 6);
  K.topLeftCorner(3, 3).setConstant(1.0);
  K.bottomRightCorner(3, 3).setConstant(1.0);
  K.diagonal().array() += 0.5;
  std::vector<int> labels{0, 0, 0, 1, 1, 1};
  auto model = svm_train(K, labels);
  CHECK(accuracy(svm_predict(model, K), labels) == 1.0);

  // The same point twice with opposite labels: at most half right.
  Eigen::MatrixXd Kc = Eigen::MatrixXd::Constant(2, 2, 1.0);
  std::vector<int> lc{0, 1};
  CHECK(accuracy(svm_predict(svm_train(Kc, lc), Kc), lc) <= 0.5);

  CHECK_THROWS(svm_train(K, std::vector<int>(6, 0)));

  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(6, 3, [&] { return rng.normal(); });
    Eigen::MatrixXd G = X * X.transpose();
    Eigen::VectorXd y(6);
    y << 1, 1, 1, -1, -1, -1;
    for (int i = 0; i < 6; ++i)
      if (rng.bernoulli(0.3)) y(i) = -y(i);
    if (y.maxCoeff() < 0 || y.minCoeff() > 0) y(0) = -y(0);
    const double C = t % 2 ? 1.0 : 0.3;
    SvmOptions o;
    o.C = C;
    auto m = svm_train_binary(G, y, o);
    CHECK(m.alpha.minCoeff() >= 0.0);
    CHECK(m.alpha.maxCoeff() <= C);
    CHECK(std::abs(y.dot(m.alpha)) < 1e-9);
    const double got = svm_dual_objective(G, y, m.alpha);
    CHECK(std::abs(got - exact_dual_optimum(G, y, C)) < 1e-3);

    // Coarse grid over the first five duals (the sixth fixed by y'a = 0).
    double grid_best = std::numeric_limits<double>::infinity();
    const int steps = 8;
    Eigen::VectorXd a(6);
    for (long code = 0; code < std::pow(steps + 1, 5); ++code) {
      long c = code;
      for (int i = 0; i < 5; ++i) {
        a(i) = C * static_cast<double>(c % (steps + 1)) / steps;
        c /= steps + 1;
      }
      a(5) = -y.head(5).dot(a.head(5)) * y(5);
      if (a(5) < 0 || a(5) > C) continue;
      grid_best = std::min(grid_best, svm_dual_objective(G, y, a));
    }
    CHECK(got <= grid_best + 1e-3);
  }
}

TEST_CASE("svm is deterministic given input order") {
  Rng rng(7);
  std::vector<LabeledGraph> gs;
  std::vector<int> cls;
  for (int i = 0; i < 20; ++i) {
    gs.push_back(random_graph(rng, 8, i % 2 ? 0.2 : 0.6, 2, i % 2));
    cls.push_back(i % 2);
  }
  auto K = gram_matrix(gs, opts(KernelKind::WeisfeilerLehman));
  auto a = svm_train(K, cls), b = svm_train(K, cls);
  CHECK(a.machines[0].alpha == b.machines[0].alpha);
  CHECK(a.machines[1].rho == b.machines[1].rho);
}

TEST_CASE("downstream evaluation oracles") {
  Rng rng(8);
  auto trees_vs_dense = [&](int count) {
    std::vector<LabeledGraph> gs;
    for (int i = 0; i < count; ++i) {
      if (i % 2 == 0) {
        auto t = ba_sample(12, 1, {1, 2}, rng);
        t.graph_class = 0;
        gs.push_back(t);
      } else {
        auto d = er_sample(12, 0.6, {1, 2}, rng);
        d.graph_class = 1;
        gs.push_back(d);
      }
    }
    return dataset_of(gs);
  };
  auto train = trees_vs_dense(40), test = trees_vs_dense(40);
  CHECK(downstream_eval(train, test, opts(KernelKind::WeisfeilerLehman)) >= 0.95);

  // train == test beats the majority baseline.
  CHECK(downstream_eval(train, train, opts(KernelKind::ShortestPath)) >= 0.5);

  // Random labels: null distribution centred at 0.5.
  std::vector<double> accs;
  for (int t = 0; t < 200; ++t) {
    std::vector<LabeledGraph> tr, te;
    for (int i = 0; i < 20; ++i) {
      auto g = random_graph(rng, 7, 0.4, 2);
      g.graph_class = i % 2;
      tr.push_back(g);
      auto h = random_graph(rng, 7, 0.4, 2);
      h.graph_class = i % 2;
      te.push_back(h);
    }
    accs.push_back(downstream_eval(dataset_of(tr, 2), dataset_of(te, 2), opts(KernelKind::WeisfeilerLehman)));
  }
  double mean = 0;
  for (double a : accs) mean += a;
  mean /= accs.size();
  // Each trial is at worst Binomial(20, 0.5)/20: sd <= 0.112.
  CHECK(std::abs(mean - 0.5) < 3 * 0.112 / std::sqrt(200.0));

  auto s = downstream_trials(train, test, opts(KernelKind::WeisfeilerLehman), {}, 10, 3);
  CHECK(s.accuracies.size() == 10);
  CHECK(s.mean >= 0.9);

  auto missing = train;
  for (auto& g : missing.graphs) g.graph_class = 0;
  CHECK_THROWS(downstream_eval(missing, test, opts(KernelKind::WeisfeilerLehman)));
}
