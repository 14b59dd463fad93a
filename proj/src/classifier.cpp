#include "lggan/classifier.hpp"

#include <stdexcept>

#include "lggan/autodiff.hpp"
#include "lggan/model.hpp"

namespace lggan {

namespace {

ad::Var forward(ad::Tape& tape, std::span<const ad::Var> bound, const GcnClassifierConfig& c,
                const LabeledGraph& g) {
  auto dense = to_dense<double>(g, g.n, c.num_labels);
  ad::Var norm_adj = ad::normalized_adjacency(tape.constant(dense.adj));
  ad::Var h = ad::gcn_layer(tape.constant(dense.labels), norm_adj, bound[0]);
  for (int l = 1; l < c.layers; ++l) {
    ad::Var next = ad::gcn_layer(h, norm_adj, bound[l]);
    h = c.residual ? ad::add(next, h) : next;
  }
  ad::Var readout = ad::matmul(tape.constant(Eigen::MatrixXd::Ones(1, g.n)), h);
  return ad::add_row(ad::matmul(readout, bound[c.layers]), bound[c.layers + 1]);
}

int argmax(const Eigen::RowVectorXd& v) {
  Eigen::Index k = 0;
  v.maxCoeff(&k);
  return static_cast<int>(k);
}

}  // namespace

GcnClassifier::GcnClassifier(GcnClassifierConfig config, Rng& rng) : config_(config) {
  if (config_.layers < 1 || config_.width < 1 || config_.num_labels < 1 || config_.num_classes < 2)
    throw std::invalid_argument("bad classifier config");
  params_.add("gcn0.w", glorot(rng, config_.num_labels, config_.width));
  for (int l = 1; l < config_.layers; ++l)
    params_.add("gcn" + std::to_string(l) + ".w", glorot(rng, config_.width, config_.width));
  params_.add("out.w", glorot(rng, config_.width, config_.num_classes));
  params_.add("out.b", Eigen::MatrixXd::Zero(1, config_.num_classes));
}

Eigen::RowVectorXd GcnClassifier::logits(const LabeledGraph& g) const {
  ad::Tape tape;
  auto bound = params_.bind(tape, false);
  return forward(tape, bound, config_, g).value().row(0);
}

int GcnClassifier::predict(const LabeledGraph& g) const { return argmax(logits(g)); }

FitHistory fit(GcnClassifier& model, const GraphDataset& data, int epochs, AdamConfig adam) {
  if (data.graphs.empty()) throw std::invalid_argument("empty training set");
  const auto& c = model.config();
  Adam opt(model.params(), adam);
  FitHistory h;
  for (int e = 0; e < epochs; ++e) {
    ad::Tape tape;
    auto bound = model.params().bind(tape, true);
    std::vector<ad::Var> losses;
    int correct = 0;
    for (const auto& g : data.graphs) {
      ad::Var logits = forward(tape, bound, c, g);
      ad::Var target = tape.constant(one_hot(g.graph_class, c.num_classes).transpose());
      losses.push_back(ad::scale(ad::matmul(ad::log_softmax(logits), target), -1.0));
      correct += argmax(logits.value().row(0)) == g.graph_class;
    }
    ad::Var total = ad::scale(ad::sum(ad::concat_rows(losses)), 1.0 / data.graphs.size());
    auto grads = tape.backward(total);
    std::vector<Eigen::MatrixXd> gs;
    for (ad::Var v : bound) gs.push_back(grads[v]);
    opt.step(model.params(), gs);
    h.loss.push_back(total.scalar());
    h.accuracy.push_back(static_cast<double>(correct) / data.graphs.size());
  }
  return h;
}

double training_accuracy(const GcnClassifier& model, const GraphDataset& data) {
  int correct = 0;
  for (const auto& g : data.graphs) correct += model.predict(g) == g.graph_class;
  return static_cast<double>(correct) / data.graphs.size();
}

}  // namespace lggan
