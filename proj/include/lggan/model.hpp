#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lggan/autodiff.hpp"
#include "lggan/graph.hpp"
#include "lggan/params.hpp"
#include "lggan/rng.hpp"

namespace lggan {

enum class Variant { Gan, CGan, AcGan };
enum class Aggregation { MaxPool, Concat };

std::string to_string(Variant v);
std::string to_string(Aggregation a);
Variant parse_variant(const std::string& s);
Aggregation parse_aggregation(const std::string& s);

// D~^{-1/2} (A + I) D~^{-1/2} for a dense (possibly continuous) adjacency.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> normalized_adjacency(
    const Eigen::MatrixBase<Derived>& adj) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat tilde = adj + Mat::Identity(adj.rows(), adj.cols());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_sqrt =
      tilde.rowwise().sum().array().rsqrt().matrix();
  return inv_sqrt.asDiagonal() * tilde * inv_sqrt.asDiagonal();
}

// One propagation step relu(norm(A) H W), evaluated directly.
template <typename DerivedH, typename DerivedA, typename DerivedW>
Eigen::Matrix<typename DerivedH::Scalar, Eigen::Dynamic, Eigen::Dynamic> gcn_layer(
    const Eigen::MatrixBase<DerivedH>& h, const Eigen::MatrixBase<DerivedA>& adj,
    const Eigen::MatrixBase<DerivedW>& w) {
  using Scalar = typename DerivedH::Scalar;
  return (normalized_adjacency(adj) * h * w).cwiseMax(Scalar(0));
}

namespace ad {
// Tape versions of the two helpers above.
Var normalized_adjacency(Var adj);
Var gcn_layer(Var h, Var norm_adj, Var w);
}  // namespace ad

struct GeneratorConfig {
  int latent_dim = 16;
  int num_classes = 1;
  bool conditional = false;
  std::vector<int> hidden{64, 128};
  int max_nodes = 16;
  int num_labels = 1;

  int input_dim() const { return latent_dim + (conditional ? num_classes : 0); }
  int edge_slots() const { return max_nodes * (max_nodes - 1) / 2; }
};

struct GeneratedGraph {
  ad::Var adj;     // N x N, symmetric, zero diagonal, entries in (0, 1)
  ad::Var labels;  // N x C, rows on the simplex
};

// MLP from latent (plus optional class one-hot) to a continuous labeled graph.
class Generator {
 public:
  Generator() = default;
  Generator(GeneratorConfig config, Rng& rng);
  Generator(GeneratorConfig config, ParamSet params);

  const GeneratorConfig& config() const { return config_; }
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }

  // `inputs` is batch x input_dim; `bound` comes from params().bind().
  std::vector<GeneratedGraph> forward(ad::Tape& tape, std::span<const ad::Var> bound,
                                      const Eigen::MatrixXd& inputs) const;

  // Continuous outputs for one input row, off-tape.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample(const Eigen::RowVectorXd& input) const;

 private:
  void build_selectors();

  GeneratorConfig config_;
  ParamSet params_;
  Eigen::MatrixXd upper_row_, upper_col_;   // edge slot -> (i, j) one-hots
  Eigen::MatrixXd label_row_, label_col_;   // label slot -> (node, label) one-hots
};

struct DiscriminatorConfig {
  int max_nodes = 16;
  int num_labels = 1;
  int num_classes = 1;
  int layers = 3;
  int width = 32;
  Aggregation aggregation = Aggregation::MaxPool;
  bool residual = true;
  // cgan: the class one-hot is appended to the graph vector of the realness head.
  bool conditional = false;

  int aggregated_width() const { return aggregation == Aggregation::Concat ? layers * width : width; }
  int feature_width() const { return aggregated_width() + num_labels; }
};

struct DiscriminatorOutput {
  ad::Var realness;      // 1 x 1
  ad::Var class_logits;  // 1 x G
  ad::Var features;      // 1 x feature_width, node-sum of Z_g
};

// Residual GCN critic with layer aggregation and label concatenation.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(DiscriminatorConfig config, Rng& rng);
  Discriminator(DiscriminatorConfig config, ParamSet params);

  const DiscriminatorConfig& config() const { return config_; }
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }

  DiscriminatorOutput forward(ad::Tape& tape, std::span<const ad::Var> bound, ad::Var adj,
                              ad::Var labels,
                              std::optional<ad::Var> class_onehot = std::nullopt) const;

  // Node-level representation Z_g = [agg(H1..Hn) ; L] (N x feature_width).
  ad::Var node_features(ad::Tape& tape, std::span<const ad::Var> bound, ad::Var adj,
                        ad::Var labels) const;

  // Off-tape convenience evaluation.
  struct Scores {
    double realness;
    Eigen::RowVectorXd class_logits;
  };
  Scores score(const Eigen::MatrixXd& adj, const Eigen::MatrixXd& labels,
               std::optional<int> cls = std::nullopt) const;

 private:
  DiscriminatorConfig config_;
  ParamSet params_;
};

// Edge iff A > threshold; labels by row argmax; isolated nodes dropped.
LabeledGraph discretize(const Eigen::MatrixXd& adj_cont, const Eigen::MatrixXd& labels_cont,
                        double threshold = 0.5, int graph_class = 0);

Eigen::RowVectorXd one_hot(int index, int size);

}  // namespace lggan
