#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lggan/baselines.hpp"
#include "lggan/stats.hpp"
#include "test_util.hpp"

using namespace lggan;
using lggan::testing::complete_graph;
using lggan::testing::path_graph;

namespace {

GraphDataset dataset_of(std::vector<LabeledGraph> gs, int c = 1, int g = 1) {
  GraphDataset d;
  d.graphs = std::move(gs);
  d.num_node_labels = c;
  d.num_graph_classes = g;
  return d;
}

bool is_tree(const LabeledGraph& g) {
  if (static_cast<int>(g.edges.size()) != g.n - 1) return false;
  // n-1 edges and no cycle (union-find) means connected and acyclic.
  std::vector<int> parent(g.n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (auto [u, v] : g.edges) {
    int a = find(u), b = find(v);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

int max_deg(const LabeledGraph& g) {
  auto d = g.degrees();
  return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

}  // namespace

TEST_CASE("er_fit examples") {
  CHECK(er_fit(dataset_of({complete_graph(4), complete_graph(6)})).p == doctest::Approx(1.0));
  CHECK(er_fit(dataset_of({make_graph(3, {}, {0, 0, 0})})).p == 0.0);
  auto p = er_fit(dataset_of({complete_graph(3), path_graph(3), make_graph(1, {}, {0})}));
  CHECK(p.p == doctest::Approx(5.0 / 6));
  CHECK(p.n_dist.sizes.size() == 3);
  CHECK_THROWS(er_fit(dataset_of({make_graph(1, {}, {0})})));
  CHECK_THROWS(er_fit(dataset_of({})));
}

TEST_CASE("er_sample examples") {
  Rng rng(1);
  LabelSpace space{3, 2};
  CHECK(er_sample(7, 0.0, space, rng).edges.empty());
  auto k4 = er_sample(4, 1.0, space, rng);
  CHECK(k4.edges.size() == 6);
  double total = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto g = er_sample(10, 0.5, space, rng);
    validate(g, 3, 2);
    total += g.edges.size();
  }
  const double sigma = std::sqrt(45 * 0.25 / 1000.0);
  CHECK(std::abs(total / 1000.0 - 22.5) < 3 * sigma);
}

TEST_CASE("er fit/sample consistency") {
  Rng rng(2);
  ErParams params{SizeDistribution{{8, 12, 20}}, 0.3, {}};
  auto samples = sample_many(2000, rng, [&](Rng& r) { return er_sample(params, r); });
  for (const auto& g : samples) CHECK((g.n == 8 || g.n == 12 || g.n == 20));
  CHECK(std::abs(er_fit(dataset_of(samples)).p - 0.3) < 0.02);
}

TEST_CASE("ba_sample examples") {
  Rng rng(3);
  LabelSpace space{2, 1};
  for (int k : {2, 5, 17}) CHECK(is_tree(ba_sample(k, 1, space, rng)));
  CHECK(ba_sample(10, 2, space, rng).edges.size() == 17);
  CHECK_THROWS(ba_sample(2, 2, space, rng));

  // Preferential attachment grows hubs: compare with E-R at the same density.
  int heavier = 0;
  const double p = 2.0 / 50;  // 49 edges over 1225 pairs
  for (int t = 0; t < 1000; ++t) {
    auto ba = ba_sample(50, 1, space, rng);
    auto er = er_sample(50, p, space, rng);
    heavier += max_deg(ba) > max_deg(er);
  }
  CHECK(heavier >= 950);
}

TEST_CASE("ba_fit") {
  auto fit = ba_fit(dataset_of({complete_graph(5), path_graph(6), make_graph(1, {}, {0})}));
  // mean |E|/n = (10/5 + 5/6 + 0) / 3
  CHECK(fit.m == 1);
  for (int n : fit.n_dist.sizes) CHECK(n > fit.m);
  Rng rng(4);
  for (int i = 0; i < 20; ++i) validate(ba_sample(fit, rng), 1, 1);
}

TEST_CASE("mmsb K=1 collapses to E-R") {
  Rng rng(5);
  std::vector<LabeledGraph> gs;
  for (int i = 0; i < 30; ++i) gs.push_back(lggan::testing::random_graph(rng, 10, 0.4, 3));
  auto data = dataset_of(gs, 3);
  auto fit = mmsb_fit(data, {1, 50, 0.1}, rng);
  fit.validate();
  double pairs = 0, edges = 0;
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(3);
  for (const auto& g : gs) {
    pairs += g.n * (g.n - 1) / 2.0;
    edges += g.edges.size();
    for (int l : g.node_labels) freq(l) += 1;
  }
  // Beta(1, 1) posterior mean over pooled pairs.
  CHECK(fit.B(0, 0) == doctest::Approx((edges + 1) / (pairs + 2)));
  CHECK(fit.label_dist.row(0).transpose().isApprox(freq / freq.sum(), 1e-12));

  // Degree MMD between K=1 MMSB and E-R with the same p.
  MmsbParams m;
  m.K = 1;
  m.alpha = Eigen::VectorXd::Constant(1, 1.0);
  m.B = Eigen::MatrixXd::Constant(1, 1, 0.3);
  m.label_dist = Eigen::MatrixXd::Constant(1, 1, 1.0);
  m.n_dist = {{15}};
  ErParams e{{{15}}, 0.3, {}};
  auto a = sample_many(200, rng, [&](Rng& r) { return mmsb_sample(m, r); });
  auto b = sample_many(200, rng, [&](Rng& r) { return er_sample(e, r); });
  CHECK(evaluate(dataset_of(a), dataset_of(b)).degree < 0.05);
}

TEST_CASE("mmsb recovers a planted two-clique partition") {
  std::vector<LabeledGraph> gs;
  for (int t = 0; t < 10; ++t) {
    std::vector<Edge> e;
    for (int base : {0, 5})
      for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) e.emplace_back(base + i, base + j);
    gs.push_back(make_graph(10, e, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1}));
  }
  Rng rng(6);
  auto fit = mmsb_fit(dataset_of(gs, 2), {2, 300, 0.1}, rng);
  CHECK(fit.B(0, 0) > fit.B(0, 1));
  CHECK(fit.B(1, 1) > fit.B(0, 1));
  for (int k = 0; k < 2; ++k) CHECK(fit.label_dist.row(k).maxCoeff() > 0.9);
  CHECK(std::abs(fit.label_dist(0, 0) - fit.label_dist(1, 0)) > 0.8);

  // Deterministic given the seed.
  Rng r1(9), r2(9);
  auto f1 = mmsb_fit(dataset_of(gs, 2), {2, 20, 0.1}, r1);
  auto f2 = mmsb_fit(dataset_of(gs, 2), {2, 20, 0.1}, r2);
  CHECK(f1.B == f2.B);
  CHECK(f1.label_dist == f2.label_dist);
}

TEST_CASE("mmsb on empty graphs") {
  std::vector<LabeledGraph> gs;
  for (int t = 0; t < 5; ++t) gs.push_back(make_graph(8, {}, std::vector<int>(8, 0)));
  Rng rng(7);
  auto fit = mmsb_fit(dataset_of(gs), {2, 50, 0.1}, rng);
  // Smallest block pair count is at least 1 pair, so B <= 1/3; all pairs pooled gives 1/142.
  CHECK(fit.B.maxCoeff() <= 1.0 / 3.0);
  CHECK(fit.B.maxCoeff() < 0.05);
}

TEST_CASE("mmsb_sample examples") {
  Rng rng(8);
  MmsbParams m;
  m.K = 2;
  m.alpha = Eigen::Vector2d(1e-3, 1e-3);
  m.B = Eigen::Matrix2d::Identity();
  m.label_dist = Eigen::Matrix2d::Identity();
  m.n_dist = {{12}};
  m.space = {2, 3};
  // Near-delta memberships and identity B: disjoint cliques, labelled by block.
  for (int t = 0; t < 20; ++t) {
    auto g = mmsb_sample(m, rng);
    validate(g, 2, 3);
    auto a = lggan::testing::adjacency(g);
    for (int u = 0; u < g.n; ++u)
      for (int v = u + 1; v < g.n; ++v) CHECK(a(u, v) == (g.node_labels[u] == g.node_labels[v]));
  }

  // Large symmetric alpha: density approaches mean(B).
  m.alpha = Eigen::Vector2d(1e4, 1e4);
  m.B << 0.8, 0.2, 0.2, 0.4;
  m.n_dist = {{10}};
  double edges = 0;
  for (int t = 0; t < 1000; ++t) edges += mmsb_sample(m, rng).edges.size();
  const double p = 0.25 * (0.8 + 0.2 + 0.2 + 0.4);
  const double sigma = std::sqrt(45 * p * (1 - p) / 1000.0);
  CHECK(std::abs(edges / 1000.0 - 45 * p) < 3 * sigma);
}

TEST_CASE("baseline parameter files round trip") {
  Rng rng(10);
  std::vector<LabeledGraph> gs;
  for (int i = 0; i < 10; ++i) gs.push_back(lggan::testing::random_graph(rng, 6 + i % 3, 0.5, 2, i % 2));
  auto data = dataset_of(gs, 2, 2);
  auto er = er_fit(data);
  auto ba = ba_fit(data);
  auto mm = mmsb_fit(data, {2, 20, 0.1}, rng);

  auto roundtrip = [](auto params) {
    std::stringstream ss;
    write_baseline(ss, params);
    return read_baseline(ss);
  };
  auto e2 = roundtrip(er);
  CHECK(e2.kind == AnyBaseline::Kind::Er);
  CHECK(e2.er.p == er.p);
  CHECK(e2.er.n_dist.sizes == er.n_dist.sizes);
  CHECK(e2.er.space.num_graph_classes == 2);
  auto b2 = roundtrip(ba);
  CHECK(b2.kind == AnyBaseline::Kind::Ba);
  CHECK(b2.ba.m == ba.m);
  auto m2 = roundtrip(mm);
  CHECK(m2.kind == AnyBaseline::Kind::Mmsb);
  CHECK(m2.mmsb.B == mm.B);
  CHECK(m2.mmsb.label_dist == mm.label_dist);
  CHECK(m2.mmsb.alpha == mm.alpha);

  Rng s1(1), s2(1);
  CHECK(m2.sample(s1) == mmsb_sample(mm, s2));

  std::istringstream bad("baseline er\nnum_node_labels 1\nend\n");
  CHECK_THROWS(read_baseline(bad));
}
