#include "lggan/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

namespace lggan {

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::WeisfeilerLehman: return "wl";
    case KernelKind::ShortestPath: return "sp";
    case KernelKind::Graphlet: return "graphlet";
  }
  return "?";
}

KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "wl") return KernelKind::WeisfeilerLehman;
  if (s == "sp") return KernelKind::ShortestPath;
  if (s == "graphlet" || s == "gk") return KernelKind::Graphlet;
  throw std::invalid_argument("unknown kernel '" + s + "' (expected wl, sp or graphlet)");
}

double dot(const SparseFeatures& a, const SparseFeatures& b) {
  double s = 0.0;
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      s += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return s;
}

namespace {

SparseFeatures from_map(const std::map<std::uint64_t, double>& m) {
  return SparseFeatures(m.begin(), m.end());
}

std::vector<SparseFeatures> wl_features(std::span<const LabeledGraph> graphs, int h) {
  if (h < 0) throw std::invalid_argument("WL iterations must be >= 0");
  // Signature -> compressed label, shared by all graphs and rounds. Round 0
  // signatures are {-1, label} so they cannot collide with refined ones.
  std::map<std::vector<int>, int> dict;
  auto compress = [&](std::vector<int> sig) {
    auto [it, inserted] = dict.emplace(std::move(sig), static_cast<int>(dict.size()));
    return it->second;
  };
  std::vector<std::map<std::uint64_t, double>> counts(graphs.size());
  std::vector<std::vector<int>> labels(graphs.size());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    for (int l : graphs[gi].node_labels) {
      int c = compress({-1, l});
      labels[gi].push_back(c);
      counts[gi][static_cast<std::uint64_t>(c)] += 1.0;
    }
  }
  std::vector<std::vector<std::vector<int>>> adj(graphs.size());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) adj[gi] = graphs[gi].adjacency_list();
  for (int round = 1; round <= h; ++round) {
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
      std::vector<int> next(labels[gi].size());
      for (std::size_t u = 0; u < next.size(); ++u) {
        std::vector<int> sig{labels[gi][u]};
        for (int v : adj[gi][u]) sig.push_back(labels[gi][v]);
        std::sort(sig.begin() + 1, sig.end());
        next[u] = compress(std::move(sig));
        counts[gi][static_cast<std::uint64_t>(next[u])] += 1.0;
      }
      labels[gi] = std::move(next);
    }
  }
  std::vector<SparseFeatures> out;
  for (auto& c : counts) out.push_back(from_map(c));
  return out;
}

SparseFeatures sp_features(const LabeledGraph& g, int cap) {
  if (cap < 1) throw std::invalid_argument("shortest-path cap must be >= 1");
  auto adj = g.adjacency_list();
  std::map<std::uint64_t, double> m;
  std::vector<int> dist(g.n);
  for (int s = 0; s < g.n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
    }
    for (int t = s + 1; t < g.n; ++t) {
      if (dist[t] < 0) continue;
      const auto a = static_cast<std::uint64_t>(std::min(g.node_labels[s], g.node_labels[t]));
      const auto b = static_cast<std::uint64_t>(std::max(g.node_labels[s], g.node_labels[t]));
      const auto d = static_cast<std::uint64_t>(std::min(dist[t], cap));
      m[(a << 40) | (b << 16) | d] += 1.0;
    }
  }
  return from_map(m);
}

// Four-node graphs are identified by their sorted degree sequence.
int four_node_type(int e01, int e02, int e03, int e12, int e13, int e23) {
  int d[4] = {e01 + e02 + e03, e01 + e12 + e13, e02 + e12 + e23, e03 + e13 + e23};
  std::sort(d, d + 4);
  const int key = d[0] * 1000 + d[1] * 100 + d[2] * 10 + d[3];
  switch (key) {
    case 0: return 0;      // empty
    case 11: return 1;     // one edge
    case 1111: return 2;   // two disjoint edges
    case 112: return 3;    // path on 3 + isolated
    case 222: return 4;    // triangle + isolated
    case 1113: return 5;   // star
    case 1122: return 6;   // path on 4
    case 2222: return 7;   // 4-cycle
    case 1223: return 8;   // paw
    case 2233: return 9;   // diamond
    case 3333: return 10;  // K4
  }
  throw std::logic_error("unreachable four-node degree sequence");
}

}  // namespace

int graphlet_type_count(int k) {
  if (k == 3) return 4;
  if (k == 4) return 11;
  throw std::invalid_argument("graphlet size must be 3 or 4");
}

Eigen::VectorXd graphlet_frequencies(const LabeledGraph& g, int k) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(graphlet_type_count(k));
  if (g.n < k) return f;
  std::vector<std::vector<char>> a(g.n, std::vector<char>(g.n, 0));
  for (const auto& [u, v] : g.edges) a[u][v] = a[v][u] = 1;
  double total = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      for (int l = j + 1; l < g.n; ++l) {
        if (k == 3) {
          f(a[i][j] + a[i][l] + a[j][l]) += 1.0;
          total += 1.0;
          continue;
        }
        for (int m = l + 1; m < g.n; ++m) {
          f(four_node_type(a[i][j], a[i][l], a[i][m], a[j][l], a[j][m], a[l][m])) += 1.0;
          total += 1.0;
        }
      }
  return f / total;
}

std::vector<SparseFeatures> kernel_features(std::span<const LabeledGraph> graphs,
                                            const KernelOptions& options) {
  switch (options.kind) {
    case KernelKind::WeisfeilerLehman:
      return wl_features(graphs, options.wl_iterations);
    case KernelKind::ShortestPath: {
      std::vector<SparseFeatures> out;
      for (const auto& g : graphs) out.push_back(sp_features(g, options.sp_cap));
      return out;
    }
    case KernelKind::Graphlet: {
      std::vector<SparseFeatures> out;
      for (const auto& g : graphs) {
        Eigen::VectorXd f = graphlet_frequencies(g, options.graphlet_size);
        SparseFeatures s;
        for (Eigen::Index i = 0; i < f.size(); ++i)
          if (f(i) != 0.0) s.emplace_back(static_cast<std::uint64_t>(i), f(i));
        out.push_back(std::move(s));
      }
      return out;
    }
  }
  throw std::logic_error("unknown kernel kind");
}

double wl_kernel(const LabeledGraph& a, const LabeledGraph& b, int h) {
  const LabeledGraph pair[2] = {a, b};
  auto f = wl_features(pair, h);
  return dot(f[0], f[1]);
}

double sp_kernel(const LabeledGraph& a, const LabeledGraph& b, int cap) {
  return dot(sp_features(a, cap), sp_features(b, cap));
}

double graphlet_kernel(const LabeledGraph& a, const LabeledGraph& b, int k) {
  return graphlet_frequencies(a, k).dot(graphlet_frequencies(b, k));
}

Eigen::MatrixXd gram_matrix(std::span<const LabeledGraph> graphs, const KernelOptions& options) {
  auto f = kernel_features(graphs, options);
  const auto n = static_cast<Eigen::Index>(f.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) K(i, j) = K(j, i) = dot(f[i], f[j]);
  return K;
}

Eigen::MatrixXd cross_gram(std::span<const LabeledGraph> rows, std::span<const LabeledGraph> cols,
                           const KernelOptions& options) {
  std::vector<LabeledGraph> all(rows.begin(), rows.end());
  all.insert(all.end(), cols.begin(), cols.end());
  auto f = kernel_features(all, options);
  const auto r = static_cast<Eigen::Index>(rows.size()), c = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd K(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) K(i, j) = dot(f[i], f[r + j]);
  return K;
}

double kernel_distance(const Eigen::MatrixXd& K, Eigen::Index i, Eigen::Index j) {
  if (i < 0 || j < 0 || i >= K.rows() || j >= K.rows() || K.rows() != K.cols())
    throw std::out_of_range("kernel distance index out of range");
  return std::sqrt(std::max(0.0, K(i, i) + K(j, j) - 2.0 * K(i, j)));
}

Eigen::MatrixXd normalize_kernel(const Eigen::MatrixXd& K) {
  const Eigen::Index n = K.rows();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = K(i, i) * K(j, j);
      if (i == j)
        out(i, j) = 1.0;
      else
        out(i, j) = d > 0.0 ? K(i, j) / std::sqrt(d) : 0.0;
    }
  return out;
}

Histogram histogram(std::span<const double> values, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("bad histogram range");
  Histogram h{lo, hi, std::vector<long>(bins, 0)};
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    h.counts[std::clamp(b, 0, bins - 1)] += 1;
  }
  return h;
}

DiversityResult diversity(const GraphDataset& generated, const GraphDataset& training,
                          const KernelOptions& options, int bins) {
  if (generated.graphs.empty() || training.graphs.empty())
    throw std::invalid_argument("diversity needs nonempty generated and training sets");
  std::vector<LabeledGraph> all = training.graphs;
  all.insert(all.end(), generated.graphs.begin(), generated.graphs.end());
  Eigen::MatrixXd K = normalize_kernel(gram_matrix(all, options));
  const auto nt = static_cast<Eigen::Index>(training.graphs.size());
  const auto n = static_cast<Eigen::Index>(all.size());
  DiversityResult r;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < nt; ++j)
      if (j != i) best = std::min(best, kernel_distance(K, i, j));
    if (i < nt) {
      if (nt > 1) r.training_min.push_back(best);
    } else {
      r.generated_min.push_back(best);
    }
  }
  const double hi = std::sqrt(2.0);
  r.training_hist = histogram(r.training_min, 0.0, hi, bins);
  r.generated_hist = histogram(r.generated_min, 0.0, hi, bins);
  return r;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace lggan
