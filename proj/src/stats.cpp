#include "lggan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "lggan/checkpoint.hpp"

namespace lggan {

std::string to_string(StatKind k) {
  switch (k) {
    case StatKind::Degree: return "degree";
    case StatKind::Clustering: return "clustering";
    case StatKind::Orbit: return "orbit";
    case StatKind::Label: return "label";
  }
  return "?";
}

StatHistogram degree_histogram(const LabeledGraph& g, int max_degree_bins) {
  if (max_degree_bins < 0) throw std::invalid_argument("negative degree bin count");
  StatHistogram h{StatKind::Degree, Eigen::VectorXd::Zero(max_degree_bins + 1), 1.0};
  if (g.n == 0) return h;
  for (int d : g.degrees()) h.bins(std::min(d, max_degree_bins)) += 1.0;
  h.bins /= static_cast<double>(g.n);
  return h;
}

std::vector<double> clustering_coefficients(const LabeledGraph& g) {
  auto adj = g.adjacency_list();
  std::vector<std::vector<char>> a(g.n, std::vector<char>(g.n, 0));
  for (const auto& [u, v] : g.edges) a[u][v] = a[v][u] = 1;
  std::vector<double> c(g.n, 0.0);
  for (int u = 0; u < g.n; ++u) {
    const auto& nb = adj[u];
    const std::size_t d = nb.size();
    if (d < 2) continue;
    long tri = 0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) tri += a[nb[i]][nb[j]];
    c[u] = static_cast<double>(tri) / (static_cast<double>(d) * (d - 1) / 2.0);
  }
  return c;
}

StatHistogram clustering_histogram(const LabeledGraph& g, int bins) {
  if (bins < 1) throw std::invalid_argument("clustering histogram needs at least one bin");
  StatHistogram h{StatKind::Clustering, Eigen::VectorXd::Zero(bins), 1.0 / bins};
  if (g.n == 0) return h;
  for (double c : clustering_coefficients(g))
    h.bins(std::min(bins - 1, static_cast<int>(c * bins))) += 1.0;
  h.bins /= static_cast<double>(g.n);
  return h;
}

namespace {

// Adds the orbit memberships of one connected induced subgraph.
void record_graphlet(const std::vector<int>& nodes, const std::vector<std::vector<char>>& a,
                     OrbitMatrix& out) {
  const int k = static_cast<int>(nodes.size());
  int deg[4] = {0, 0, 0, 0};
  int edges = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (a[nodes[i]][nodes[j]]) {
        ++deg[i];
        ++deg[j];
        ++edges;
      }
  auto add = [&](int i, int orbit) { ++out(nodes[i], orbit); };
  if (k == 2) {
    add(0, 0);
    add(1, 0);
    return;
  }
  if (k == 3) {
    for (int i = 0; i < 3; ++i) add(i, edges == 3 ? 3 : (deg[i] == 2 ? 2 : 1));
    return;
  }
  const int maxdeg = *std::max_element(deg, deg + 4);
  for (int i = 0; i < 4; ++i) {
    int orbit = -1;
    switch (edges) {
      case 3:  // path or star
        orbit = maxdeg == 3 ? (deg[i] == 3 ? 7 : 6) : (deg[i] == 1 ? 4 : 5);
        break;
      case 4:  // cycle or paw
        orbit = maxdeg == 2 ? 8 : (deg[i] == 1 ? 9 : deg[i] == 2 ? 10 : 11);
        break;
      case 5:
        orbit = deg[i] == 2 ? 12 : 13;
        break;
      case 6:
        orbit = 14;
        break;
    }
    if (orbit < 0) throw std::logic_error("disconnected graphlet enumerated");
    add(i, orbit);
  }
}

}  // namespace

OrbitMatrix orbit_counts_per_node(const LabeledGraph& g) {
  if (g.n > kMaxOrbitNodes)
    throw std::invalid_argument("orbit counting is limited to " + std::to_string(kMaxOrbitNodes) +
                                " nodes, graph has " + std::to_string(g.n));
  OrbitMatrix out = OrbitMatrix::Zero(g.n, kNumOrbits);
  auto adj = g.adjacency_list();
  std::vector<std::vector<char>> a(g.n, std::vector<char>(g.n, 0));
  for (const auto& [u, v] : g.edges) a[u][v] = a[v][u] = 1;

  // ESU enumeration: every connected induced subgraph of size 2..4 once.
  std::vector<int> sub;
  std::vector<char> in_sub(g.n, 0);
  auto excl_ok = [&](int u) {
    if (in_sub[u]) return false;
    for (int s : sub)
      if (a[s][u]) return false;
    return true;
  };
  std::function<void(std::vector<int>, int)> extend = [&](std::vector<int> ext, int root) {
    if (sub.size() >= 2) record_graphlet(sub, a, out);
    if (sub.size() == 4) return;
    while (!ext.empty()) {
      int w = ext.back();
      ext.pop_back();
      std::vector<int> next = ext;
      for (int u : adj[w])
        if (u > root && excl_ok(u) && std::find(next.begin(), next.end(), u) == next.end())
          next.push_back(u);
      sub.push_back(w);
      in_sub[w] = 1;
      extend(next, root);
      in_sub[w] = 0;
      sub.pop_back();
    }
  };
  for (int v = 0; v < g.n; ++v) {
    std::vector<int> ext;
    for (int u : adj[v])
      if (u > v) ext.push_back(u);
    sub = {v};
    in_sub[v] = 1;
    extend(ext, v);
    in_sub[v] = 0;
  }
  return out;
}

StatHistogram orbit_counts(const LabeledGraph& g) {
  StatHistogram h{StatKind::Orbit, Eigen::VectorXd::Zero(kNumOrbits), 1.0};
  if (g.n == 0) return h;
  h.bins = orbit_counts_per_node(g).cast<double>().colwise().mean().transpose();
  return h;
}

StatHistogram label_distribution(const LabeledGraph& g, int num_labels) {
  StatHistogram h{StatKind::Label, Eigen::VectorXd::Zero(num_labels), 1.0};
  if (g.n == 0) return h;
  for (int l : g.node_labels) {
    if (l < 0 || l >= num_labels) throw GraphError("node label out of range");
    h.bins(l) += 1.0;
  }
  h.bins /= static_cast<double>(g.n);
  return h;
}

double wasserstein1(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double bin_width) {
  const Eigen::Index n = std::max(a.size(), b.size());
  double ca = 0.0, cb = 0.0, total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ca += i < a.size() ? a(i) : 0.0;
    cb += i < b.size() ? b(i) : 0.0;
    total += std::abs(ca - cb);
  }
  return total * bin_width;
}

double histogram_distance(const StatHistogram& a, const StatHistogram& b) {
  if (a.kind != b.kind)
    throw std::invalid_argument("cannot compare " + to_string(a.kind) + " with " +
                                to_string(b.kind) + " histograms");
  if (a.kind == StatKind::Orbit) {
    if (a.bins.size() != b.bins.size()) throw std::invalid_argument("orbit vectors differ in size");
    return (a.bins - b.bins).norm();
  }
  return wasserstein1(a.bins, b.bins, a.bin_width);
}

double mmd(std::span<const StatHistogram> a, std::span<const StatHistogram> b, double sigma) {
  if (a.empty() || b.empty()) throw std::invalid_argument("MMD needs nonempty sets");
  if (sigma <= 0.0) throw std::invalid_argument("MMD bandwidth must be positive");
  const double denom = 2.0 * sigma * sigma;
  auto k = [&](const StatHistogram& x, const StatHistogram& y) {
    double d = histogram_distance(x, y);
    return std::exp(-d * d / denom);
  };
  auto mean_kernel = [&](std::span<const StatHistogram> x, std::span<const StatHistogram> y) {
    double s = 0.0;
    for (const auto& p : x)
      for (const auto& q : y) s += k(p, q);
    return s / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
  };
  const double kxx = mean_kernel(a, a), kyy = mean_kernel(b, b);
  // Average the two cross orders so mmd(a, b) == mmd(b, a) bit for bit.
  const double kxy = 0.5 * (mean_kernel(a, b) + mean_kernel(b, a));
  return std::sqrt(std::max(0.0, kxx + kyy - 2.0 * kxy));
}

namespace {

int max_degree(const std::vector<LabeledGraph>& gs) {
  int m = 0;
  for (const auto& g : gs)
    for (int d : g.degrees()) m = std::max(m, d);
  return m;
}

struct StructuralMmd {
  double degree, clustering, orbit;
};

StructuralMmd structural_mmd(const std::vector<LabeledGraph>& x, const std::vector<LabeledGraph>& y,
                             const MmdSigmas& s) {
  const int bins = std::max(max_degree(x), max_degree(y));
  auto hist = [&](const std::vector<LabeledGraph>& gs, auto&& f) {
    std::vector<StatHistogram> out;
    out.reserve(gs.size());
    for (const auto& g : gs) out.push_back(f(g));
    return out;
  };
  auto deg = [&](const LabeledGraph& g) { return degree_histogram(g, bins); };
  auto clu = [&](const LabeledGraph& g) { return clustering_histogram(g, kClusteringBins); };
  auto orb = [&](const LabeledGraph& g) { return orbit_counts(g); };
  return {mmd(hist(x, deg), hist(y, deg), s.degree), mmd(hist(x, clu), hist(y, clu), s.clustering),
          mmd(hist(x, orb), hist(y, orb), s.orbit)};
}

void require_nonempty(const GraphDataset& d, const char* which) {
  if (d.graphs.empty()) throw std::invalid_argument(std::string(which) + " set is empty");
}

}  // namespace

MmdReport evaluate(const GraphDataset& generated, const GraphDataset& reference,
                   const MmdSigmas& sigmas) {
  require_nonempty(generated, "generated");
  require_nonempty(reference, "reference");
  MmdReport r;
  r.sigmas = sigmas;
  auto s = structural_mmd(generated.graphs, reference.graphs, sigmas);
  r.degree = s.degree;
  r.clustering = s.clustering;
  r.orbit = s.orbit;
  const int c = std::max(generated.num_node_labels, reference.num_node_labels);
  std::vector<StatHistogram> lg, lr;
  for (const auto& g : generated.graphs) lg.push_back(label_distribution(g, c));
  for (const auto& g : reference.graphs) lr.push_back(label_distribution(g, c));
  r.label = mmd(lg, lr, sigmas.label);
  return r;
}

PerClassReport per_class_stats(const GraphDataset& generated, const GraphDataset& reference,
                               const MmdSigmas& sigmas) {
  require_nonempty(generated, "generated");
  require_nonempty(reference, "reference");
  if (generated.num_node_labels != reference.num_node_labels)
    throw std::invalid_argument("generated and reference label spaces differ (" +
                                std::to_string(generated.num_node_labels) + " vs " +
                                std::to_string(reference.num_node_labels) + ")");
  auto induced = [](const GraphDataset& d, int label) {
    std::vector<LabeledGraph> out;
    for (const auto& g : d.graphs) {
      std::vector<int> keep;
      for (int u = 0; u < g.n; ++u)
        if (g.node_labels[u] == label) keep.push_back(u);
      if (!keep.empty()) out.push_back(induced_subgraph(g, keep));
    }
    return out;
  };
  PerClassReport r;
  for (int l = 0; l < reference.num_node_labels; ++l) {
    auto x = induced(generated, l), y = induced(reference, l);
    if (x.empty() || y.empty()) {
      r.skipped.push_back(l);
      continue;
    }
    auto s = structural_mmd(x, y, sigmas);
    r.rows.push_back({l, s.degree, s.clustering, s.orbit});
  }
  if (!r.rows.empty()) {
    for (const auto& row : r.rows) {
      r.avg_degree += row.degree;
      r.avg_clustering += row.clustering;
      r.avg_orbit += row.orbit;
    }
    const double n = static_cast<double>(r.rows.size());
    r.avg_degree /= n;
    r.avg_clustering /= n;
    r.avg_orbit /= n;
  }
  return r;
}

void write_report(std::ostream& os, const MmdReport& r) {
  const char* est = "biased-v";
  os << "# metric value sigma estimator\n";
  os << "degree " << format_double(r.degree) << ' ' << r.sigmas.degree << ' ' << est << '\n';
  os << "clustering " << format_double(r.clustering) << ' ' << r.sigmas.clustering << ' ' << est
     << '\n';
  os << "orbit " << format_double(r.orbit) << ' ' << r.sigmas.orbit << ' ' << est << '\n';
  os << "label " << format_double(r.label) << ' ' << r.sigmas.label << ' ' << est << '\n';
  os << "mmd.degree=" << format_double(r.degree) << '\n';
  os << "mmd.clustering=" << format_double(r.clustering) << '\n';
  os << "mmd.orbit=" << format_double(r.orbit) << '\n';
  os << "mmd.label=" << format_double(r.label) << '\n';
}

void write_report(std::ostream& os, const PerClassReport& r) {
  os << "# per-label induced subgraphs (nodes of one label within each graph)\n";
  os << "# label degree clustering orbit\n";
  for (const auto& row : r.rows)
    os << "class." << row.label << ' ' << format_double(row.degree) << ' '
       << format_double(row.clustering) << ' ' << format_double(row.orbit) << '\n';
  for (int l : r.skipped) os << "# skipped label " << l << " (absent on one side)\n";
  os << "avg.degree=" << format_double(r.avg_degree) << '\n';
  os << "avg.clustering=" << format_double(r.avg_clustering) << '\n';
  os << "avg.orbit=" << format_double(r.avg_orbit) << '\n';
}

}  // namespace lggan
