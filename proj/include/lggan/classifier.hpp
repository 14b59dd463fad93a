#pragma once

#include <vector>

#include "lggan/graph.hpp"
#include "lggan/optim.hpp"
#include "lggan/params.hpp"
#include "lggan/rng.hpp"

namespace lggan {

// Graph classifier: H(0) = node-label one-hot, `layers` GCN layers of equal
// width (residual adds H(l) for l >= 1), node-sum readout, linear softmax head.
struct GcnClassifierConfig {
  int num_labels = 1;
  int num_classes = 2;
  int layers = 2;
  int width = 32;
  bool residual = true;
};

class GcnClassifier {
 public:
  GcnClassifier(GcnClassifierConfig config, Rng& rng);

  const GcnClassifierConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  Eigen::RowVectorXd logits(const LabeledGraph& g) const;
  int predict(const LabeledGraph& g) const;

 private:
  GcnClassifierConfig config_;
  ParamSet params_;
};

struct FitHistory {
  std::vector<double> loss;      // mean cross-entropy per epoch
  std::vector<double> accuracy;  // training accuracy per epoch (before the update)
};

// Full-batch Adam on the mean cross-entropy.
FitHistory fit(GcnClassifier& model, const GraphDataset& data, int epochs, AdamConfig adam);

double training_accuracy(const GcnClassifier& model, const GraphDataset& data);

}  // namespace lggan
