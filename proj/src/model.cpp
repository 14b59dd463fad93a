#include "lggan/model.hpp"

#include <stdexcept>

namespace lggan {

using ad::Matrix;
using ad::Tape;
using ad::Var;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Gan: return "gan";
    case Variant::CGan: return "cgan";
    case Variant::AcGan: return "acgan";
  }
  return "?";
}

std::string to_string(Aggregation a) { return a == Aggregation::Concat ? "concat" : "maxpool"; }

Variant parse_variant(const std::string& s) {
  if (s == "gan") return Variant::Gan;
  if (s == "cgan") return Variant::CGan;
  if (s == "acgan") return Variant::AcGan;
  throw std::invalid_argument("unknown variant '" + s + "' (gan|cgan|acgan)");
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "maxpool") return Aggregation::MaxPool;
  if (s == "concat") return Aggregation::Concat;
  throw std::invalid_argument("unknown aggregation '" + s + "' (maxpool|concat)");
}

Eigen::RowVectorXd one_hot(int index, int size) {
  if (index < 0 || index >= size)
    throw std::out_of_range("class index " + std::to_string(index) + " out of range");
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(size);
  v(index) = 1.0;
  return v;
}

namespace ad {

Var normalized_adjacency(Var adj) {
  Tape& t = *adj.tape();
  if (!t.requires_grad(adj.id())) return t.constant(lggan::normalized_adjacency(adj.value()));
  const Eigen::Index n = adj.rows();
  Var tilde = add(adj, t.constant(Matrix::Identity(n, n)));
  Var degree = matmul(tilde, t.constant(Matrix::Ones(n, 1)));
  Var inv_sqrt = pow(degree, -0.5);
  Var spread = matmul(inv_sqrt, t.constant(Matrix::Ones(1, n)));  // (i, j) -> d_i^{-1/2}
  return mul(mul(spread, tilde), transpose(spread));
}

Var gcn_layer(Var h, Var norm_adj, Var w) { return relu(matmul(matmul(norm_adj, h), w)); }

}  // namespace ad

// --- generator --------------------------------------------------------------

Generator::Generator(GeneratorConfig config, Rng& rng) : config_(std::move(config)) {
  int fan_in = config_.input_dim();
  for (std::size_t k = 0; k < config_.hidden.size(); ++k) {
    const std::string prefix = "gen.hidden" + std::to_string(k);
    params_.add(prefix + ".w", glorot(rng, fan_in, config_.hidden[k]));
    params_.add(prefix + ".b", Matrix::Zero(1, config_.hidden[k]));
    fan_in = config_.hidden[k];
  }
  params_.add("gen.adj.w", glorot(rng, fan_in, config_.edge_slots()));
  params_.add("gen.adj.b", Matrix::Zero(1, config_.edge_slots()));
  const int label_slots = config_.max_nodes * config_.num_labels;
  params_.add("gen.labels.w", glorot(rng, fan_in, label_slots));
  params_.add("gen.labels.b", Matrix::Zero(1, label_slots));
  build_selectors();
}

Generator::Generator(GeneratorConfig config, ParamSet params)
    : config_(std::move(config)), params_(std::move(params)) {
  const std::size_t expected = 2 * config_.hidden.size() + 4;
  if (params_.size() != expected)
    throw std::invalid_argument("generator parameter count mismatch: expected " +
                                std::to_string(expected) + ", got " +
                                std::to_string(params_.size()));
  int fan_in = config_.input_dim();
  for (std::size_t k = 0; k < config_.hidden.size(); ++k) {
    if (params_.values[2 * k].rows() != fan_in || params_.values[2 * k].cols() != config_.hidden[k])
      throw std::invalid_argument("generator layer " + std::to_string(k) + " has wrong shape");
    fan_in = config_.hidden[k];
  }
  const std::size_t head = 2 * config_.hidden.size();
  if (params_.values[head].cols() != config_.edge_slots() ||
      params_.values[head + 2].cols() != config_.max_nodes * config_.num_labels)
    throw std::invalid_argument("generator output heads do not match N_max/C");
  build_selectors();
}

void Generator::build_selectors() {
  const int n = config_.max_nodes, c = config_.num_labels;
  const int slots = config_.edge_slots();
  upper_row_ = Matrix::Zero(slots, n);
  upper_col_ = Matrix::Zero(slots, n);
  int s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++s) {
      upper_row_(s, i) = 1.0;
      upper_col_(s, j) = 1.0;
    }
  label_row_ = Matrix::Zero(n * c, n);
  label_col_ = Matrix::Zero(n * c, c);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < c; ++k) {
      label_row_(i * c + k, i) = 1.0;
      label_col_(i * c + k, k) = 1.0;
    }
}

std::vector<GeneratedGraph> Generator::forward(Tape& tape, std::span<const Var> bound,
                                               const Matrix& inputs) const {
  if (inputs.cols() != config_.input_dim())
    throw ad::ShapeError("generator input has " + std::to_string(inputs.cols()) +
                         " columns, expected " + std::to_string(config_.input_dim()));
  if (bound.size() != params_.size()) throw std::invalid_argument("generator binding mismatch");
  const int n = config_.max_nodes, c = config_.num_labels;
  const Eigen::Index batch = inputs.rows();

  Var h = tape.constant(inputs);
  std::size_t p = 0;
  for (std::size_t k = 0; k < config_.hidden.size(); ++k, p += 2)
    h = ad::tanh(ad::add_row(ad::matmul(h, bound[p]), bound[p + 1]));
  Var edge_prob = ad::sigmoid(ad::add_row(ad::matmul(h, bound[p]), bound[p + 1]));
  Var label_logits = ad::add_row(ad::matmul(h, bound[p + 2]), bound[p + 3]);

  Var upper_row = tape.constant(upper_row_.transpose());
  Var upper_col = tape.constant(upper_col_);
  Var label_row = tape.constant(label_row_.transpose());
  Var label_col = tape.constant(label_col_);
  Var spread_n = tape.constant(Matrix::Ones(1, n));
  Var spread_c = tape.constant(Matrix::Ones(1, c));

  std::vector<GeneratedGraph> out;
  out.reserve(batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    Var pick = tape.constant(one_hot(static_cast<int>(b), static_cast<int>(batch)));
    // Slot vector -> upper triangle: U = R^T ((s^T 1) o C), then A = U + U^T.
    Var probs = ad::transpose(ad::matmul(pick, edge_prob));
    Var upper = ad::matmul(upper_row, ad::mul(ad::matmul(probs, spread_n), upper_col));
    Var adj = ad::add(upper, ad::transpose(upper));
    Var logits = ad::transpose(ad::matmul(pick, label_logits));
    Var grid = ad::matmul(label_row, ad::mul(ad::matmul(logits, spread_c), label_col));
    out.push_back({adj, ad::row_softmax(grid)});
  }
  return out;
}

std::pair<Matrix, Matrix> Generator::sample(const Eigen::RowVectorXd& input) const {
  Tape tape;
  auto bound = params_.bind(tape, false);
  auto out = forward(tape, bound, Matrix(input));
  return {out[0].adj.value(), out[0].labels.value()};
}

// --- discriminator ----------------------------------------------------------

Discriminator::Discriminator(DiscriminatorConfig config, Rng& rng) : config_(std::move(config)) {
  if (config_.layers < 1) throw std::invalid_argument("discriminator needs at least one layer");
  // H(0) = I_N: the first weight is one row shared by every identity column,
  // which keeps the critic invariant to node permutations.
  params_.add("disc.gcn0.w", glorot(rng, 1, config_.width));
  for (int l = 1; l < config_.layers; ++l)
    params_.add("disc.gcn" + std::to_string(l) + ".w", glorot(rng, config_.width, config_.width));
  const int in = config_.feature_width() + (config_.conditional ? config_.num_classes : 0);
  params_.add("disc.real.w", glorot(rng, in, 1));
  params_.add("disc.real.b", Matrix::Zero(1, 1));
  params_.add("disc.class.w", glorot(rng, config_.feature_width(), config_.num_classes));
  params_.add("disc.class.b", Matrix::Zero(1, config_.num_classes));
}

Discriminator::Discriminator(DiscriminatorConfig config, ParamSet params)
    : config_(std::move(config)), params_(std::move(params)) {
  if (params_.size() != static_cast<std::size_t>(config_.layers) + 4)
    throw std::invalid_argument("discriminator parameter count mismatch");
  const int in = config_.feature_width() + (config_.conditional ? config_.num_classes : 0);
  if (params_["disc.real.w"].rows() != in ||
      params_["disc.class.w"].cols() != config_.num_classes ||
      params_["disc.gcn0.w"].cols() != config_.width)
    throw std::invalid_argument("discriminator parameters do not match architecture");
}

Var Discriminator::node_features(Tape& tape, std::span<const Var> bound, Var adj,
                                 Var labels) const {
  const int n = static_cast<int>(adj.rows());
  if (adj.cols() != n || labels.rows() != n || labels.cols() != config_.num_labels)
    throw ad::ShapeError("discriminator input shapes " + ad::shape_string(adj.value()) + " and " +
                         ad::shape_string(labels.value()) + " do not match C=" +
                         std::to_string(config_.num_labels));
  if (bound.size() != params_.size()) throw std::invalid_argument("discriminator binding mismatch");

  Var norm_adj = ad::normalized_adjacency(adj);
  Var identity = tape.constant(Matrix::Identity(n, n));
  Var tied = ad::matmul(tape.constant(Matrix::Ones(n, 1)), bound[0]);
  std::vector<Var> hidden;
  hidden.push_back(ad::gcn_layer(identity, norm_adj, tied));
  for (int l = 1; l < config_.layers; ++l) {
    Var next = ad::gcn_layer(hidden.back(), norm_adj, bound[l]);
    if (config_.residual) next = ad::add(next, hidden.back());
    hidden.push_back(next);
  }
  Var aggregated = config_.aggregation == Aggregation::MaxPool ? ad::max_pool(hidden)
                                                               : ad::concat_cols(hidden);
  std::vector<Var> parts{aggregated, labels};
  return ad::concat_cols(parts);
}

DiscriminatorOutput Discriminator::forward(Tape& tape, std::span<const Var> bound, Var adj,
                                           Var labels, std::optional<Var> class_onehot) const {
  Var z = node_features(tape, bound, adj, labels);
  Var readout = ad::matmul(tape.constant(Matrix::Ones(1, adj.rows())), z);
  const std::size_t head = static_cast<std::size_t>(config_.layers);
  Var real_in = readout;
  if (config_.conditional) {
    if (!class_onehot) throw std::invalid_argument("conditional critic needs a class one-hot");
    std::vector<Var> parts{readout, *class_onehot};
    real_in = ad::concat_cols(parts);
  }
  Var realness = ad::add(ad::matmul(real_in, bound[head]), bound[head + 1]);
  Var logits = ad::add_row(ad::matmul(readout, bound[head + 2]), bound[head + 3]);
  return {realness, logits, readout};
}

Discriminator::Scores Discriminator::score(const Matrix& adj, const Matrix& labels,
                                           std::optional<int> cls) const {
  Tape tape;
  auto bound = params_.bind(tape, false);
  std::optional<Var> onehot;
  if (config_.conditional) onehot = tape.constant(one_hot(cls.value_or(0), config_.num_classes));
  auto out = forward(tape, bound, tape.constant(adj), tape.constant(labels), onehot);
  return {out.realness.scalar(), out.class_logits.value().row(0)};
}

LabeledGraph discretize(const Matrix& adj_cont, const Matrix& labels_cont, double threshold,
                        int graph_class) {
  DenseGraph<double> dense;
  dense.adj = (adj_cont.array() > threshold).cast<double>().matrix();
  dense.adj.diagonal().setZero();
  // Symmetrize in case the caller passes a non-mirrored matrix.
  dense.adj = dense.adj.cwiseMax(dense.adj.transpose());
  dense.labels = labels_cont;
  dense.mask.assign(adj_cont.rows(), true);
  return prune_isolated(dense, graph_class);
}

}  // namespace lggan
