#include <doctest.h>

#include <sstream>

#include "lggan/dataset_io.hpp"
#include "lggan/graph.hpp"
#include "test_util.hpp"

using namespace lggan;
using namespace lggan::testing;

TEST_CASE("validate accepts well-formed graphs and rejects broken invariants") {
  auto k3 = make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, {0, 0, 1}, 0);
  CHECK_NOTHROW(validate(k3, 2, 1));

  LabeledGraph loop{3, {{0, 0}}, {0, 0, 0}, 0};
  CHECK_THROWS_WITH_AS(validate(loop, 1, 1), doctest::Contains("self-loop"), GraphError);

  LabeledGraph bad_label{2, {{0, 1}}, {0, 7}, 0};
  CHECK_THROWS_WITH_AS(validate(bad_label, 6, 1), doctest::Contains("label-out-of-range"),
                       GraphError);

  LabeledGraph dup{2, {{0, 1}, {1, 0}}, {0, 0}, 0};
  CHECK_THROWS_WITH_AS(validate(dup, 1, 1), doctest::Contains("duplicate"), GraphError);

  LabeledGraph out_of_range{2, {{0, 2}}, {0, 0}, 0};
  CHECK_THROWS_AS(validate(out_of_range, 1, 1), GraphError);
}

TEST_CASE("bfs_order examples") {
  std::vector<int> id5{0, 1, 2, 3, 4};
  CHECK(bfs_order(star_graph(4), 0, id5) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(bfs_order(path_graph(4), 3, {0, 1, 2, 3}) == std::vector<int>{3, 2, 1, 0});
  auto two_edges = make_graph(4, {{0, 1}, {2, 3}}, {0, 0, 0, 0});
  CHECK(bfs_order(two_edges, 1, {0, 1, 2, 3}) == std::vector<int>{1, 0, 2, 3});
  CHECK_THROWS_AS(bfs_order(two_edges, 4, {0, 1, 2, 3}), GraphError);
}

TEST_CASE("bfs_order honours the input permutation for tie-breaks") {
  // Star centre 0; relabel leaves in reverse so leaf 4 is visited first.
  auto order = bfs_order(star_graph(4), 0, {0, 4, 3, 2, 1});
  CHECK(order == std::vector<int>{0, 4, 3, 2, 1});
  // Second component restarts from lowest relabeled index (node 3 -> rank 0).
  auto two_edges = make_graph(4, {{0, 1}, {2, 3}}, {0, 0, 0, 0});
  CHECK(bfs_order(two_edges, 0, {1, 2, 3, 0}) == std::vector<int>{0, 1, 3, 2});
}

TEST_CASE("bfs_order always returns a permutation") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + rng.index(12);
    auto g = random_graph(rng, n, 0.2);
    auto order = bfs_order(g, rng.index(n), rng.permutation(n));
    std::vector<int> expect(n);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(sorted(order) == expect);
  }
}

TEST_CASE("canonicalize preserves the isomorphism class") {
  Rng rng(5);
  auto k3 = complete_graph(3, 1);
  auto c = canonicalize(k3, rng);
  CHECK(c == k3);

  for (int trial = 0; trial < 60; ++trial) {
    int n = 1 + rng.index(9);
    auto g = random_graph(rng, n, 0.35, 3, 1);
    auto h = canonicalize(g, rng);
    CHECK_NOTHROW(validate(h, 3, 2));
    CHECK(sorted(h.degrees()) == sorted(g.degrees()));
    CHECK(sorted(h.node_labels) == sorted(g.node_labels));
    CHECK(h.graph_class == g.graph_class);
    CHECK(isomorphic(g, h));
  }
}

TEST_CASE("canonicalized connected graphs attach every node to an earlier one") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + rng.index(10);
    auto g = path_graph(n);
    if (trial % 2) g = relabel(g, rng.permutation(n));
    auto h = canonicalize(g, rng);
    auto adj = adjacency(h);
    for (int v = 1; v < n; ++v) CHECK(adj.row(v).head(v).sum() >= 1);
  }
}

TEST_CASE("extract_ego_network") {
  auto star = star_graph(4);
  star.node_labels = {3, 0, 1, 1, 2};
  auto ego = extract_ego_network(star, 0, 1, 1, 10);
  REQUIRE(ego);
  CHECK(ego->n == 5);
  CHECK(ego->edges.size() == 4);
  CHECK(ego->graph_class == 3);

  auto path = path_graph(5);
  auto ball = extract_ego_network(path, 2, 1, 1, 10);
  REQUIRE(ball);
  CHECK(ball->n == 3);
  CHECK(ball->edges == std::vector<Edge>{{0, 1}, {1, 2}});

  CHECK_FALSE(extract_ego_network(path, 0, 1, 3, 10));
  CHECK_THROWS_AS(extract_ego_network(path, 9, 1, 1, 10), GraphError);
}

TEST_CASE("ego networks stay within the hop ball") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto host = random_graph(rng, 25, 0.1, 4);
    int center = rng.index(25);
    int hops = 1 + rng.index(3);
    auto ego = extract_ego_network(host, center, hops, 1, 100);
    REQUIRE(ego);
    // Locate the center inside the ego graph: it keeps relative order.
    auto full = host.adjacency_list();
    std::vector<int> dist(25, -1);
    std::vector<int> queue{center};
    dist[center] = 0;
    for (std::size_t q = 0; q < queue.size(); ++q)
      for (int v : full[queue[q]])
        if (dist[v] < 0) {
          dist[v] = dist[queue[q]] + 1;
          queue.push_back(v);
        }
    int ball = 0;
    for (int d : dist) ball += d >= 0 && d <= hops;
    CHECK(ego->n == ball);
  }
}

TEST_CASE("to_dense and prune_isolated") {
  auto single = make_graph(1, {}, {2});
  auto d = to_dense(single, 2, 3);
  CHECK(d.adj.isZero());
  CHECK(d.labels.row(0) == Eigen::RowVector3d(0, 0, 1));
  CHECK(d.labels.row(1).isZero());
  CHECK(d.mask == std::vector<bool>{true, false});

  auto k3 = to_dense(complete_graph(3), 3, 1);
  CHECK(k3.adj == (Eigen::Matrix3d::Ones() - Eigen::Matrix3d::Identity()));

  CHECK_THROWS_AS(to_dense(path_graph(4), 3, 1), GraphError);

  auto padded = to_dense(complete_graph(3), 5, 1);
  CHECK(prune_isolated(padded) == complete_graph(3));

  DenseGraph<double> empty{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 2),
                           std::vector<bool>(4, true)};
  empty.labels(0, 1) = 1.0;
  auto fallback = prune_isolated(empty);
  CHECK(fallback.n == 1);
  CHECK(fallback.edges.empty());
  CHECK(fallback.node_labels == std::vector<int>{1});

  DenseGraph<double> sparse{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 3),
                            std::vector<bool>(4, true)};
  sparse.adj(1, 3) = sparse.adj(3, 1) = 1.0;
  sparse.labels(1, 2) = 1.0;
  sparse.labels(3, 0) = 1.0;
  auto two = prune_isolated(sparse);
  CHECK(two.n == 2);
  CHECK(two.edges == std::vector<Edge>{{0, 1}});
  CHECK(two.node_labels == std::vector<int>{2, 0});
}

TEST_CASE("dense round trip reproduces graphs without isolated nodes") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    auto g = random_graph(rng, 2 + rng.index(8), 0.5, 3);
    auto deg = g.degrees();
    if (std::count(deg.begin(), deg.end(), 0) > 0) continue;
    auto back = prune_isolated(to_dense(g, 12, 3));
    CHECK(back == g);
  }
}

TEST_CASE("dataset round trip and parse errors") {
  Rng rng(2);
  GraphDataset data;
  data.name = "toy";
  data.num_node_labels = 3;
  data.num_graph_classes = 2;
  for (int i = 0; i < 10; ++i) data.graphs.push_back(random_graph(rng, 1 + rng.index(7), 0.4, 3, i % 2));
  std::stringstream ss;
  write_dataset(ss, data);
  CHECK(read_dataset(ss) == data);

  std::istringstream self_loop("dataset x 1 2 1\ngraph 0 2 0\nlabels 0 1\nedge 1 1\nend\n");
  CHECK_THROWS_WITH_AS(read_dataset(self_loop), doctest::Contains("line 4"), ParseError);
  std::istringstream bad_label("# comment\ndataset x 1 2 1\ngraph 0 2 0\nlabels 0 5\nend\n");
  CHECK_THROWS_WITH_AS(read_dataset(bad_label), doctest::Contains("line 4"), ParseError);
  std::istringstream count("dataset x 2 2 1\ngraph 0 1 0\nlabels 0\nend\n");
  CHECK_THROWS_AS(read_dataset(count), ParseError);
}
