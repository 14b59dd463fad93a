#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lggan/rng.hpp"

namespace lggan {

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Edge = std::pair<int, int>;

// Undirected graph with one categorical label per node and a graph-level
// class. Edges are stored as (u, v) with u < v after `normalize()`.
struct LabeledGraph {
  int n = 0;
  std::vector<Edge> edges;
  std::vector<int> node_labels;
  int graph_class = 0;

  // Orders each pair as (min, max) and sorts the edge list.
  void normalize();
  std::vector<std::vector<int>> adjacency_list() const;
  std::vector<int> degrees() const;

  friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;
};

LabeledGraph make_graph(int n, std::vector<Edge> edges, std::vector<int> labels,
                        int graph_class = 0);

struct GraphDataset {
  std::string name = "dataset";
  std::vector<LabeledGraph> graphs;
  int num_node_labels = 1;
  int num_graph_classes = 1;

  int max_nodes() const;
  friend bool operator==(const GraphDataset&, const GraphDataset&) = default;
};

// Throws GraphError naming the first violated invariant.
void validate(const LabeledGraph& g, int num_node_labels, int num_graph_classes);
void validate(const GraphDataset& data);

// BFS ordering. `input_perm[i]` is the relabeled index of node i; neighbors
// are visited in ascending relabeled index and unreachable components are
// restarted from their lowest relabeled index. Returns original node ids in
// visiting order.
std::vector<int> bfs_order(const LabeledGraph& g, int start,
                           const std::vector<int>& input_perm);

// Node k of the result is node order[k] of g.
LabeledGraph relabel(const LabeledGraph& g, const std::vector<int>& order);

LabeledGraph canonicalize(const LabeledGraph& g, Rng& rng);

std::optional<LabeledGraph> extract_ego_network(const LabeledGraph& host, int center,
                                                int hops, int min_n, int max_n);

LabeledGraph induced_subgraph(const LabeledGraph& g, const std::vector<int>& nodes);

template <typename Scalar>
using DynMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Fixed-size padded form consumed by the generator and discriminator.
template <typename Scalar = double>
struct DenseGraph {
  DynMatrix<Scalar> adj;
  DynMatrix<Scalar> labels;
  std::vector<bool> mask;

  int max_nodes() const { return static_cast<int>(adj.rows()); }
  int num_labels() const { return static_cast<int>(labels.cols()); }
};

template <typename Scalar = double>
DenseGraph<Scalar> to_dense(const LabeledGraph& g, int max_nodes, int num_labels) {
  if (g.n > max_nodes)
    throw GraphError("graph has " + std::to_string(g.n) + " nodes, exceeds N_max=" +
                     std::to_string(max_nodes));
  DenseGraph<Scalar> d;
  d.adj = DynMatrix<Scalar>::Zero(max_nodes, max_nodes);
  d.labels = DynMatrix<Scalar>::Zero(max_nodes, num_labels);
  d.mask.assign(max_nodes, false);
  for (const auto& [u, v] : g.edges) {
    d.adj(u, v) = Scalar(1);
    d.adj(v, u) = Scalar(1);
  }
  for (int i = 0; i < g.n; ++i) {
    if (g.node_labels[i] < 0 || g.node_labels[i] >= num_labels)
      throw GraphError("node " + std::to_string(i) + " label out of range");
    d.labels(i, g.node_labels[i]) = Scalar(1);
    d.mask[i] = true;
  }
  return d;
}

// Drops degree-0 slots, keeping relative order. Node labels are the row
// argmax (lowest index on ties). An all-isolated input yields a 1-node graph
// built from slot 0.
template <typename Scalar>
LabeledGraph prune_isolated(const DenseGraph<Scalar>& d, int graph_class = 0) {
  const int slots = d.max_nodes();
  std::vector<int> keep;
  for (int i = 0; i < slots; ++i) {
    bool connected = false;
    for (int j = 0; j < slots && !connected; ++j)
      connected = i != j && d.adj(i, j) != Scalar(0);
    if (connected) keep.push_back(i);
  }
  if (keep.empty()) keep.push_back(0);

  std::vector<int> index(slots, -1);
  for (std::size_t k = 0; k < keep.size(); ++k) index[keep[k]] = static_cast<int>(k);

  LabeledGraph g;
  g.n = static_cast<int>(keep.size());
  g.graph_class = graph_class;
  for (int slot : keep) {
    int best = 0;
    for (int c = 1; c < d.labels.cols(); ++c)
      if (d.labels(slot, c) > d.labels(slot, best)) best = c;
    g.node_labels.push_back(best);
  }
  for (int i = 0; i < slots; ++i)
    for (int j = i + 1; j < slots; ++j)
      if (d.adj(i, j) != Scalar(0) && index[i] >= 0 && index[j] >= 0)
        g.edges.emplace_back(index[i], index[j]);
  g.normalize();
  return g;
}

}  // namespace lggan
