#include "lggan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lggan/checkpoint.hpp"
#include "lggan/dataset_io.hpp"

namespace lggan {

SizeDistribution SizeDistribution::of(const GraphDataset& data) {
  SizeDistribution d;
  for (const auto& g : data.graphs) d.sizes.push_back(g.n);
  std::sort(d.sizes.begin(), d.sizes.end());
  return d;
}

int SizeDistribution::sample(Rng& rng) const {
  if (sizes.empty()) throw std::invalid_argument("empty size distribution");
  return sizes[rng.index(static_cast<int>(sizes.size()))];
}

namespace {

void require_nonempty(const GraphDataset& data) {
  if (data.graphs.empty()) throw std::invalid_argument("cannot fit a baseline to an empty dataset");
}

LabelSpace space_of(const GraphDataset& data) {
  return {std::max(1, data.num_node_labels), std::max(1, data.num_graph_classes)};
}

void random_labels(LabeledGraph& g, const LabelSpace& s, Rng& rng) {
  g.node_labels.resize(g.n);
  for (int& l : g.node_labels) l = rng.index(s.num_node_labels);
  g.graph_class = rng.index(s.num_graph_classes);
}

}  // namespace

ErParams er_fit(const GraphDataset& data) {
  require_nonempty(data);
  double total = 0.0;
  int used = 0;
  for (const auto& g : data.graphs) {
    if (g.n < 2) continue;
    total += 2.0 * static_cast<double>(g.edges.size()) / (static_cast<double>(g.n) * (g.n - 1));
    ++used;
  }
  if (used == 0) throw std::invalid_argument("every graph has a single node; density undefined");
  return {SizeDistribution::of(data), total / used, space_of(data)};
}

LabeledGraph er_sample(int n, double p, const LabelSpace& space, Rng& rng) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("edge probability outside [0, 1]");
  LabeledGraph g;
  g.n = n;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) g.edges.emplace_back(u, v);
  random_labels(g, space, rng);
  return g;
}

LabeledGraph er_sample(const ErParams& params, Rng& rng) {
  int n = params.n_dist.sample(rng);
  return er_sample(n, params.p, params.space, rng);
}

BaParams ba_fit(const GraphDataset& data) {
  require_nonempty(data);
  double ratio = 0.0;
  for (const auto& g : data.graphs) ratio += static_cast<double>(g.edges.size()) / g.n;
  ratio /= static_cast<double>(data.graphs.size());
  BaParams p;
  p.m = std::max(1, static_cast<int>(std::lround(ratio)));
  p.space = space_of(data);
  for (const auto& g : data.graphs)
    if (g.n > p.m) p.n_dist.sizes.push_back(g.n);
  if (p.n_dist.sizes.empty())
    throw std::invalid_argument("no training graph is larger than m=" + std::to_string(p.m));
  std::sort(p.n_dist.sizes.begin(), p.n_dist.sizes.end());
  return p;
}

LabeledGraph ba_sample(int n, int m, const LabelSpace& space, Rng& rng) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (n <= m)
    throw std::invalid_argument("B-A needs n > m (n=" + std::to_string(n) +
                                ", m=" + std::to_string(m) + ")");
  LabeledGraph g;
  g.n = n;
  std::vector<int> degree(n, 0);
  for (int u = 0; u <= m; ++u)
    for (int v = u + 1; v <= m; ++v) {
      g.edges.emplace_back(u, v);
      ++degree[u];
      ++degree[v];
    }
  for (int u = m + 1; u < n; ++u) {
    // m distinct targets, degree-proportional, without replacement.
    std::vector<double> w(degree.begin(), degree.begin() + u);
    std::vector<int> targets;
    for (int k = 0; k < m; ++k) {
      int t = rng.categorical(w);
      targets.push_back(t);
      w[t] = 0.0;
    }
    for (int t : targets) {
      g.edges.emplace_back(t, u);
      ++degree[t];
      ++degree[u];
    }
  }
  g.normalize();
  random_labels(g, space, rng);
  return g;
}

LabeledGraph ba_sample(const BaParams& params, Rng& rng) {
  int n = params.n_dist.sample(rng);
  return ba_sample(n, params.m, params.space, rng);
}

// --- MMSB -------------------------------------------------------------------

void MmsbParams::validate() const {
  if (K < 1) throw std::invalid_argument("MMSB needs K >= 1");
  if (alpha.size() != K || (alpha.array() <= 0.0).any())
    throw std::invalid_argument("MMSB alpha must have K positive entries");
  if (B.rows() != K || B.cols() != K || (B.array() < 0.0).any() || (B.array() > 1.0).any())
    throw std::invalid_argument("MMSB B must be K x K with entries in [0, 1]");
  if (label_dist.rows() != K || label_dist.cols() != space.num_node_labels)
    throw std::invalid_argument("MMSB label distribution must be K x C");
  for (Eigen::Index k = 0; k < K; ++k)
    if (std::abs(label_dist.row(k).sum() - 1.0) > 1e-9 || (label_dist.row(k).array() < 0).any())
      throw std::invalid_argument("MMSB label distribution rows must be stochastic");
}

namespace {

struct PairSlot {
  int graph, u, v;
  bool edge;
  int k, l;  // block of u towards v, block of v towards u
};

int block_pair(int k, int l, int K) { return std::min(k, l) * K + std::max(k, l); }

}  // namespace

MmsbParams mmsb_fit(const GraphDataset& data, const MmsbFitOptions& opt, Rng& rng) {
  require_nonempty(data);
  const int K = opt.K;
  if (K < 1) throw std::invalid_argument("MMSB needs K >= 1");
  if (opt.iters < 0 || opt.alpha <= 0.0) throw std::invalid_argument("bad MMSB fit options");

  // Node offsets so per-node counts live in one array.
  std::vector<int> offset(data.graphs.size() + 1, 0);
  for (std::size_t i = 0; i < data.graphs.size(); ++i) offset[i + 1] = offset[i] + data.graphs[i].n;
  const int total_nodes = offset.back();

  std::vector<PairSlot> slots;
  for (std::size_t gi = 0; gi < data.graphs.size(); ++gi) {
    const auto& g = data.graphs[gi];
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(g.n, g.n);
    for (const auto& [u, v] : g.edges) a(u, v) = a(v, u) = 1;
    for (int u = 0; u < g.n; ++u)
      for (int v = u + 1; v < g.n; ++v)
        slots.push_back({static_cast<int>(gi), u, v, a(u, v) == 1, 0, 0});
  }

  Eigen::MatrixXd node_count = Eigen::MatrixXd::Zero(total_nodes, K);
  std::vector<double> pair_edges(K * K, 0.0), pair_total(K * K, 0.0);
  auto add = [&](const PairSlot& s, double sign) {
    node_count(offset[s.graph] + s.u, s.k) += sign;
    node_count(offset[s.graph] + s.v, s.l) += sign;
    int bp = block_pair(s.k, s.l, K);
    pair_total[bp] += sign;
    if (s.edge) pair_edges[bp] += sign;
  };
  // Start every slot of a node at block (label mod K); Gibbs moves from there.
  for (auto& s : slots) {
    const auto& g = data.graphs[s.graph];
    s.k = g.node_labels[s.u] % K;
    s.l = g.node_labels[s.v] % K;
    add(s, 1.0);
  }

  // One label slot per node: block z drawn from the membership, label drawn
  // from a Dirichlet(1)-multinomial per block. This ties block identity to
  // labels across graphs.
  const int C = std::max(1, data.num_node_labels);
  std::vector<int> label_block(total_nodes);
  Eigen::MatrixXd label_count = Eigen::MatrixXd::Zero(K, C);
  auto node_label = [&](int node) {
    auto gi = std::upper_bound(offset.begin(), offset.end(), node) - offset.begin() - 1;
    return data.graphs[gi].node_labels[node - offset[gi]];
  };
  std::vector<int> labels_flat(total_nodes);
  for (int i = 0; i < total_nodes; ++i) {
    labels_flat[i] = node_label(i);
    label_block[i] = labels_flat[i] % K;
    node_count(i, label_block[i]) += 1.0;
    label_count(label_block[i], labels_flat[i]) += 1.0;
  }

  std::vector<double> w(K * K), wz(K);
  for (int it = 0; it < opt.iters; ++it) {
    for (int i = 0; i < total_nodes; ++i) {
      const int c = labels_flat[i];
      node_count(i, label_block[i]) -= 1.0;
      label_count(label_block[i], c) -= 1.0;
      for (int k = 0; k < K; ++k)
        wz[k] = (node_count(i, k) + opt.alpha) * (label_count(k, c) + 1.0) /
                (label_count.row(k).sum() + C);
      label_block[i] = rng.categorical(wz);
      node_count(i, label_block[i]) += 1.0;
      label_count(label_block[i], c) += 1.0;
    }
    for (auto& s : slots) {
      add(s, -1.0);
      const int nu = offset[s.graph] + s.u, nv = offset[s.graph] + s.v;
      for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
          int bp = block_pair(k, l, K);
          double p_edge = (pair_edges[bp] + 1.0) / (pair_total[bp] + 2.0);
          w[k * K + l] = (node_count(nu, k) + opt.alpha) * (node_count(nv, l) + opt.alpha) *
                         (s.edge ? p_edge : 1.0 - p_edge);
        }
      int pick = rng.categorical(w);
      s.k = pick / K;
      s.l = pick % K;
      add(s, 1.0);
    }
  }

  MmsbParams p;
  p.K = K;
  p.alpha = Eigen::VectorXd::Constant(K, opt.alpha);
  p.B.resize(K, K);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      int bp = block_pair(k, l, K);
      p.B(k, l) = (pair_edges[bp] + 1.0) / (pair_total[bp] + 2.0);
    }
  p.space = space_of(data);
  p.n_dist = SizeDistribution::of(data);
  p.label_dist = Eigen::MatrixXd::Zero(K, p.space.num_node_labels);
  for (std::size_t gi = 0; gi < data.graphs.size(); ++gi) {
    const auto& g = data.graphs[gi];
    for (int u = 0; u < g.n; ++u) {
      Eigen::RowVectorXd post = node_count.row(offset[gi] + u).array() + opt.alpha;
      post /= post.sum();
      p.label_dist.col(g.node_labels[u]) += post.transpose();
    }
  }
  for (int k = 0; k < K; ++k) {
    double s = p.label_dist.row(k).sum();
    if (s > 0.0)
      p.label_dist.row(k) /= s;
    else
      p.label_dist.row(k).setConstant(1.0 / p.space.num_node_labels);
  }
  return p;
}

LabeledGraph mmsb_sample(const MmsbParams& params, Rng& rng) {
  const int K = params.K;
  LabeledGraph g;
  g.n = params.n_dist.sample(rng);
  std::vector<double> alpha(params.alpha.data(), params.alpha.data() + K);
  std::vector<std::vector<double>> member(g.n);
  for (auto& m : member) m = rng.dirichlet(alpha);
  for (int u = 0; u < g.n; ++u)
    for (int v = u + 1; v < g.n; ++v) {
      int k = rng.categorical(member[u]);
      int l = rng.categorical(member[v]);
      if (rng.bernoulli(params.B(k, l))) g.edges.emplace_back(u, v);
    }
  g.node_labels.resize(g.n);
  for (int u = 0; u < g.n; ++u) {
    int dominant = static_cast<int>(std::max_element(member[u].begin(), member[u].end()) -
                                    member[u].begin());
    Eigen::RowVectorXd row = params.label_dist.row(dominant);
    g.node_labels[u] = rng.categorical(std::vector<double>(row.data(), row.data() + row.size()));
  }
  g.graph_class = rng.index(params.space.num_graph_classes);
  return g;
}

// --- persistence ------------------------------------------------------------

namespace {

void write_common(std::ostream& os, const SizeDistribution& d, const LabelSpace& s) {
  os << "num_node_labels " << s.num_node_labels << '\n';
  os << "num_graph_classes " << s.num_graph_classes << '\n';
  os << "sizes";
  for (int n : d.sizes) os << ' ' << n;
  os << '\n';
}

void write_matrix(std::ostream& os, const std::string& key, const Eigen::MatrixXd& m) {
  os << key << ' ' << m.rows() << ' ' << m.cols();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << format_double(m(i, j));
  os << '\n';
}

}  // namespace

void write_baseline(std::ostream& os, const ErParams& p) {
  os << "baseline er\n";
  write_common(os, p.n_dist, p.space);
  os << "p " << format_double(p.p) << "\nend\n";
}

void write_baseline(std::ostream& os, const BaParams& p) {
  os << "baseline ba\n";
  write_common(os, p.n_dist, p.space);
  os << "m " << p.m << "\nend\n";
}

void write_baseline(std::ostream& os, const MmsbParams& p) {
  os << "baseline mmsb\n";
  write_common(os, p.n_dist, p.space);
  os << "K " << p.K << '\n';
  write_matrix(os, "alpha", p.alpha.transpose());
  write_matrix(os, "B", p.B);
  write_matrix(os, "label_dist", p.label_dist);
  os << "end\n";
}

LabeledGraph AnyBaseline::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Er: return er_sample(er, rng);
    case Kind::Ba: return ba_sample(ba, rng);
    case Kind::Mmsb: return mmsb_sample(mmsb, rng);
  }
  throw std::logic_error("unknown baseline");
}

AnyBaseline read_baseline(std::istream& is) {
  AnyBaseline out;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) -> void { throw ParseError(lineno, what); };
  SizeDistribution sizes;
  LabelSpace space;
  bool header = false, ended = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    auto matrix = [&](int rows_expected) {
      long r = 0, c = 0;
      if (!(ls >> r >> c) || r < 0 || c < 0) fail("bad matrix shape for " + key);
      if (rows_expected >= 0 && r != rows_expected) fail(key + " has the wrong row count");
      Eigen::MatrixXd m(r, c);
      for (long i = 0; i < r; ++i)
        for (long j = 0; j < c; ++j)
          if (!(ls >> m(i, j))) fail("too few values for " + key);
      return m;
    };
    if (!header) {
      std::string model;
      if (key != "baseline" || !(ls >> model)) fail("expected 'baseline <model>'");
      if (model == "er") out.kind = AnyBaseline::Kind::Er;
      else if (model == "ba") out.kind = AnyBaseline::Kind::Ba;
      else if (model == "mmsb") out.kind = AnyBaseline::Kind::Mmsb;
      else fail("unknown baseline model '" + model + "'");
      header = true;
    } else if (key == "end") {
      ended = true;
      break;
    } else if (key == "num_node_labels") {
      if (!(ls >> space.num_node_labels) || space.num_node_labels < 1) fail("bad num_node_labels");
    } else if (key == "num_graph_classes") {
      if (!(ls >> space.num_graph_classes) || space.num_graph_classes < 1)
        fail("bad num_graph_classes");
    } else if (key == "sizes") {
      int n;
      while (ls >> n) {
        if (n < 1) fail("sizes must be positive");
        sizes.sizes.push_back(n);
      }
    } else if (key == "p") {
      if (!(ls >> out.er.p) || out.er.p < 0 || out.er.p > 1) fail("bad p");
    } else if (key == "m") {
      if (!(ls >> out.ba.m) || out.ba.m < 1) fail("bad m");
    } else if (key == "K") {
      if (!(ls >> out.mmsb.K) || out.mmsb.K < 1) fail("bad K");
    } else if (key == "alpha") {
      out.mmsb.alpha = matrix(1).row(0).transpose();
    } else if (key == "B") {
      out.mmsb.B = matrix(-1);
    } else if (key == "label_dist") {
      out.mmsb.label_dist = matrix(-1);
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!header) fail("empty baseline file");
  if (!ended) fail("missing 'end'");
  if (sizes.sizes.empty()) fail("no sizes");
  out.er.n_dist = out.ba.n_dist = out.mmsb.n_dist = sizes;
  out.er.space = out.ba.space = out.mmsb.space = space;
  if (out.kind == AnyBaseline::Kind::Mmsb) {
    try {
      out.mmsb.validate();
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  return out;
}

}  // namespace lggan
