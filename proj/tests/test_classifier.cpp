#include <doctest.h>

#include <queue>

#include "lggan/classifier.hpp"
#include "lggan/synthetic.hpp"

using namespace lggan;

namespace {

int hop_distance(const LabeledGraph& g, int from, int to) {
  std::vector<std::vector<int>> adj(g.n);
  for (auto [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<int> dist(g.n, -1);
  std::queue<int> q;
  dist[from] = 0;
  q.push(from);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  return dist[to];
}

int find_label(const LabeledGraph& g, int label) {
  for (int i = 0; i < g.n; ++i)
    if (g.node_labels[i] == label) return i;
  return -1;
}

}  // namespace

TEST_CASE("planted two-class dataset") {
  Rng rng(3);
  auto d = planted_two_class(40, 10, 16, rng);
  validate(d);
  REQUIRE(d.graphs.size() == 40);
  double e0 = 0, e1 = 0;
  for (std::size_t i = 0; i < d.graphs.size(); ++i) {
    const auto& g = d.graphs[i];
    CHECK(g.graph_class == static_cast<int>(i % 2));
    CHECK(g.n <= 16);
    double density = 2.0 * g.edges.size() / (g.n * (g.n - 1.0));
    (g.graph_class == 0 ? e0 : e1) += density / 20;
  }
  CHECK(e0 == doctest::Approx(0.7).epsilon(0.1));
  CHECK(e1 < 0.5);
  CHECK_THROWS(planted_two_class(2, 5, 4, rng));
}

TEST_CASE("marker paths put the marks at the class distance") {
  Rng rng(4);
  auto d = marker_paths(30, 12, 15, 3, 9, rng);
  validate(d);
  for (const auto& g : d.graphs) {
    CHECK(g.edges.size() == static_cast<std::size_t>(g.n - 1));
    int a = find_label(g, 1), b = find_label(g, 2);
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    CHECK(hop_distance(g, a, b) == (g.graph_class == 0 ? 3 : 9));
  }
  CHECK_THROWS(marker_paths(2, 8, 10, 3, 9, rng));
}

TEST_CASE("gcn classifier fits a one-hop task") {
  // Class decided by whether the marks are adjacent: one layer sees it.
  Rng rng(5);
  auto d = marker_paths(20, 8, 10, 1, 5, rng);
  GcnClassifier m({3, 2, 2, 8, true}, rng);
  auto h = fit(m, d, 300, AdamConfig{0.01, 0.9, 0.999, 1e-8});
  CHECK(h.loss.back() < h.loss.front());
  CHECK(training_accuracy(m, d) == 1.0);

  // Relabelling nodes does not change the logits.
  const auto& g = d.graphs[0];
  auto moved = relabel(g, rng.permutation(g.n));
  CHECK((m.logits(g) - m.logits(moved)).cwiseAbs().maxCoeff() < 1e-9);
}
