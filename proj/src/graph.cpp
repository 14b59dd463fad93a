#include "lggan/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

namespace lggan {

void LabeledGraph::normalize() {
  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
}

std::vector<std::vector<int>> LabeledGraph::adjacency_list() const {
  std::vector<std::vector<int>> adj(n);
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

std::vector<int> LabeledGraph::degrees() const {
  std::vector<int> deg(n, 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

LabeledGraph make_graph(int n, std::vector<Edge> edges, std::vector<int> labels,
                        int graph_class) {
  LabeledGraph g{n, std::move(edges), std::move(labels), graph_class};
  if (g.node_labels.empty()) g.node_labels.assign(n, 0);
  g.normalize();
  return g;
}

int GraphDataset::max_nodes() const {
  int m = 0;
  for (const auto& g : graphs) m = std::max(m, g.n);
  return m;
}

void validate(const LabeledGraph& g, int num_node_labels, int num_graph_classes) {
  if (g.n < 1) throw GraphError("graph must have at least one node");
  if (static_cast<int>(g.node_labels.size()) != g.n)
    throw GraphError("node_labels has " + std::to_string(g.node_labels.size()) +
                     " entries for " + std::to_string(g.n) + " nodes");
  for (int i = 0; i < g.n; ++i) {
    int l = g.node_labels[i];
    if (l < 0 || l >= num_node_labels)
      throw GraphError("label-out-of-range: node " + std::to_string(i) + " has label " +
                       std::to_string(l) + " (C=" + std::to_string(num_node_labels) + ")");
  }
  if (g.graph_class < 0 || g.graph_class >= num_graph_classes)
    throw GraphError("graph class " + std::to_string(g.graph_class) + " out of range");
  std::set<Edge> seen;
  for (const auto& [u, v] : g.edges) {
    if (u < 0 || v < 0 || u >= g.n || v >= g.n)
      throw GraphError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") endpoint out of range");
    if (u == v) throw GraphError("self-loop at node " + std::to_string(u));
    Edge key{std::min(u, v), std::max(u, v)};
    if (!seen.insert(key).second)
      throw GraphError("duplicate edge (" + std::to_string(key.first) + "," +
                       std::to_string(key.second) + ")");
  }
}

void validate(const GraphDataset& data) {
  for (std::size_t i = 0; i < data.graphs.size(); ++i) {
    try {
      validate(data.graphs[i], data.num_node_labels, data.num_graph_classes);
    } catch (const GraphError& e) {
      throw GraphError("graph " + std::to_string(i) + ": " + e.what());
    }
  }
}

std::vector<int> bfs_order(const LabeledGraph& g, int start,
                           const std::vector<int>& input_perm) {
  if (start < 0 || start >= g.n)
    throw GraphError("bfs start " + std::to_string(start) + " out of range");
  if (static_cast<int>(input_perm.size()) != g.n)
    throw GraphError("input permutation has wrong length");

  auto adj = g.adjacency_list();
  auto by_rank = [&](int a, int b) { return input_perm[a] < input_perm[b]; };
  for (auto& row : adj) std::sort(row.begin(), row.end(), by_rank);

  // Nodes sorted by relabeled index, for restarting in other components.
  std::vector<int> ranked(g.n);
  std::iota(ranked.begin(), ranked.end(), 0);
  std::sort(ranked.begin(), ranked.end(), by_rank);

  std::vector<bool> visited(g.n, false);
  std::vector<int> order;
  order.reserve(g.n);
  std::deque<int> queue;
  auto run_from = [&](int root) {
    visited[root] = true;
    queue.push_back(root);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      order.push_back(u);
      for (int v : adj[u]) {
        if (!visited[v]) {
          visited[v] = true;
          queue.push_back(v);
        }
      }
    }
  };
  run_from(start);
  for (int node : ranked)
    if (!visited[node]) run_from(node);
  return order;
}

LabeledGraph relabel(const LabeledGraph& g, const std::vector<int>& order) {
  std::vector<int> position(g.n);
  for (int k = 0; k < g.n; ++k) position[order[k]] = k;
  LabeledGraph out;
  out.n = g.n;
  out.graph_class = g.graph_class;
  out.node_labels.resize(g.n);
  for (int k = 0; k < g.n; ++k) out.node_labels[k] = g.node_labels[order[k]];
  out.edges.reserve(g.edges.size());
  for (const auto& [u, v] : g.edges) out.edges.emplace_back(position[u], position[v]);
  out.normalize();
  return out;
}

LabeledGraph canonicalize(const LabeledGraph& g, Rng& rng) {
  std::vector<int> perm = rng.permutation(g.n);
  int start = rng.index(g.n);
  return relabel(g, bfs_order(g, start, perm));
}

LabeledGraph induced_subgraph(const LabeledGraph& g, const std::vector<int>& nodes) {
  std::vector<int> index(g.n, -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) index[nodes[k]] = static_cast<int>(k);
  LabeledGraph out;
  out.n = static_cast<int>(nodes.size());
  out.graph_class = g.graph_class;
  for (int v : nodes) out.node_labels.push_back(g.node_labels[v]);
  for (const auto& [u, v] : g.edges)
    if (index[u] >= 0 && index[v] >= 0) out.edges.emplace_back(index[u], index[v]);
  out.normalize();
  return out;
}

std::optional<LabeledGraph> extract_ego_network(const LabeledGraph& host, int center,
                                                int hops, int min_n, int max_n) {
  if (center < 0 || center >= host.n)
    throw GraphError("ego center " + std::to_string(center) + " out of range");
  if (hops < 1) throw GraphError("hops must be >= 1");
  auto adj = host.adjacency_list();
  std::vector<int> dist(host.n, -1);
  std::deque<int> queue{center};
  dist[center] = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (dist[u] == hops) continue;
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  std::vector<int> ball;
  for (int v = 0; v < host.n; ++v)
    if (dist[v] >= 0) ball.push_back(v);
  const int size = static_cast<int>(ball.size());
  if (size < min_n || size > max_n) return std::nullopt;
  LabeledGraph ego = induced_subgraph(host, ball);
  ego.graph_class = host.node_labels[center];
  return ego;
}

}  // namespace lggan
