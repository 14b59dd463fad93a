#include "lggan/synthetic.hpp"

#include <stdexcept>

namespace lggan {

GraphDataset planted_two_class(int count, int min_n, int max_n, Rng& rng, double p_in,
                               double p_out) {
  if (min_n < 2 || max_n < min_n) throw std::invalid_argument("bad node range");
  GraphDataset d;
  d.name = "planted";
  d.num_node_labels = 2;
  d.num_graph_classes = 2;
  for (int i = 0; i < count; ++i) {
    const int cls = i % 2;
    const int n = min_n + rng.index(max_n - min_n + 1);
    std::vector<int> labels(n);
    for (int a = 0; a < n; ++a) labels[a] = cls == 1 ? (a < n / 2 ? 1 : 0) : rng.index(2);
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const double p = cls == 0 || labels[a] == labels[b] ? p_in : p_out;
        if (rng.bernoulli(p)) edges.emplace_back(a, b);
      }
    auto g = make_graph(n, std::move(edges), std::move(labels), cls);
    d.graphs.push_back(prune_isolated(to_dense<double>(g, n, 2), cls));
  }
  return d;
}

GraphDataset marker_paths(int count, int min_len, int max_len, int near, int far, Rng& rng) {
  if (near < 1 || far <= near || min_len <= far || max_len < min_len)
    throw std::invalid_argument("marker distances must fit inside the path");
  GraphDataset d;
  d.name = "markers";
  d.num_node_labels = 3;
  d.num_graph_classes = 2;
  for (int i = 0; i < count; ++i) {
    const int cls = i % 2;
    const int len = min_len + rng.index(max_len - min_len + 1);
    const int gap = cls == 0 ? near : far;
    std::vector<Edge> edges;
    for (int a = 0; a + 1 < len; ++a) edges.emplace_back(a, a + 1);
    std::vector<int> labels(len, 0);
    const int p = rng.index(len - gap);
    labels[p] = 1;
    labels[p + gap] = 2;
    auto g = make_graph(len, std::move(edges), std::move(labels), cls);
    d.graphs.push_back(relabel(g, rng.permutation(len)));
  }
  return d;
}

}  // namespace lggan
