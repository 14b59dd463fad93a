#include "lggan/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "lggan/rng.hpp"

namespace lggan {

double svm_dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& alpha) {
  Eigen::VectorXd ya = y.cwiseProduct(alpha);
  return 0.5 * ya.dot(K * ya) - alpha.sum();
}

BinarySvm svm_train_binary(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                           const SvmOptions& opt) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || y.size() != n) throw std::invalid_argument("SVM shape mismatch");
  if (opt.C <= 0.0) throw std::invalid_argument("SVM C must be positive");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) == 1.0) pos = true;
    else if (y(i) == -1.0) neg = true;
    else throw std::invalid_argument("binary SVM labels must be +1 or -1");
  }
  if (!pos || !neg) throw std::invalid_argument("SVM needs both classes present");

  const double C = opt.C, tau = 1e-12;
  Eigen::MatrixXd Q = (y * y.transpose()).cwiseProduct(K);
  BinarySvm m;
  m.y = y;
  m.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0);  // Q a - 1

  auto in_up = [&](Eigen::Index t) {
    return (y(t) > 0 && m.alpha(t) < C) || (y(t) < 0 && m.alpha(t) > 0);
  };
  auto in_low = [&](Eigen::Index t) {
    return (y(t) > 0 && m.alpha(t) > 0) || (y(t) < 0 && m.alpha(t) < C);
  };

  for (; m.iterations < opt.max_iterations; ++m.iterations) {
    Eigen::Index i = -1, j = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y(t) * G(t);
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < opt.tolerance) break;

    const double ai = m.alpha(i), aj = m.alpha(j);
    double& Ai = m.alpha(i);
    double& Aj = m.alpha(j);
    if (y(i) != y(j)) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (-G(i) - G(j)) / quad;
      const double diff = Ai - Aj;
      Ai += delta;
      Aj += delta;
      if (diff > 0) {
        if (Aj < 0) {
          Aj = 0;
          Ai = diff;
        }
      } else if (Ai < 0) {
        Ai = 0;
        Aj = -diff;
      }
      if (diff > 0) {
        if (Ai > C) {
          Ai = C;
          Aj = C - diff;
        }
      } else if (Aj > C) {
        Aj = C;
        Ai = C + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (G(i) - G(j)) / quad;
      const double sum = Ai + Aj;
      Ai -= delta;
      Aj += delta;
      if (sum > C) {
        if (Ai > C) {
          Ai = C;
          Aj = sum - C;
        }
      } else if (Aj < 0) {
        Aj = 0;
        Ai = sum;
      }
      if (sum > C) {
        if (Aj > C) {
          Aj = C;
          Ai = sum - C;
        }
      } else if (Ai < 0) {
        Ai = 0;
        Aj = sum;
      }
    }
    G += Q.col(i) * (Ai - ai) + Q.col(j) * (Aj - aj);
  }

  // rho: average over free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  int free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * G(t);
    if (m.alpha(t) >= C) {
      if (y(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (m.alpha(t) <= 0) {
      if (y(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free;
      sum_free += yg;
    }
  }
  m.rho = free > 0 ? sum_free / free : 0.5 * (ub + lb);
  return m;
}

Eigen::VectorXd svm_decision(const BinarySvm& m, const Eigen::MatrixXd& K_test_train) {
  if (K_test_train.cols() != m.alpha.size())
    throw std::invalid_argument("kernel columns do not match the training set");
  return (K_test_train * m.y.cwiseProduct(m.alpha)).array() - m.rho;
}

SvmModel svm_train(const Eigen::MatrixXd& K, std::span<const int> labels, const SvmOptions& opt) {
  if (static_cast<Eigen::Index>(labels.size()) != K.rows())
    throw std::invalid_argument("label count does not match the kernel");
  std::set<int> cls(labels.begin(), labels.end());
  if (cls.size() < 2) throw std::invalid_argument("SVM training data has a single class");
  SvmModel model;
  model.C = opt.C;
  model.classes.assign(cls.begin(), cls.end());
  for (int c : model.classes) {
    Eigen::VectorXd y(K.rows());
    for (Eigen::Index i = 0; i < K.rows(); ++i) y(i) = labels[i] == c ? 1.0 : -1.0;
    model.machines.push_back(svm_train_binary(K, y, opt));
  }
  return model;
}

std::vector<int> svm_predict(const SvmModel& model, const Eigen::MatrixXd& K_test_train) {
  Eigen::MatrixXd scores(K_test_train.rows(), static_cast<Eigen::Index>(model.classes.size()));
  for (std::size_t c = 0; c < model.classes.size(); ++c)
    scores.col(static_cast<Eigen::Index>(c)) = svm_decision(model.machines[c], K_test_train);
  std::vector<int> out(K_test_train.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = c;
    out[i] = model.classes[best];
  }
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw std::invalid_argument("accuracy needs equal nonempty label lists");
  long ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += predicted[i] == truth[i];
  return static_cast<double>(ok) / static_cast<double>(truth.size());
}

namespace {

std::vector<int> classes_of(const std::vector<LabeledGraph>& gs) {
  std::vector<int> c;
  for (const auto& g : gs) c.push_back(g.graph_class);
  return c;
}

double eval_sets(const std::vector<LabeledGraph>& train, const std::vector<LabeledGraph>& test,
                 const KernelOptions& kernel, const SvmOptions& svm) {
  std::vector<LabeledGraph> all = train;
  all.insert(all.end(), test.begin(), test.end());
  Eigen::MatrixXd K = gram_matrix(all, kernel);
  const auto nt = static_cast<Eigen::Index>(train.size());
  const auto ns = static_cast<Eigen::Index>(test.size());
  auto model = svm_train(K.topLeftCorner(nt, nt), classes_of(train), svm);
  auto pred = svm_predict(model, K.bottomLeftCorner(ns, nt));
  return accuracy(pred, classes_of(test));
}

}  // namespace

double downstream_eval(const GraphDataset& train, const GraphDataset& test,
                       const KernelOptions& kernel, const SvmOptions& svm) {
  if (train.graphs.empty() || test.graphs.empty())
    throw std::invalid_argument("downstream evaluation needs nonempty train and test sets");
  std::set<int> have;
  for (const auto& g : train.graphs) have.insert(g.graph_class);
  for (const auto& g : test.graphs)
    if (!have.count(g.graph_class))
      throw std::invalid_argument("class " + std::to_string(g.graph_class) +
                                  " is absent from the training set");
  return eval_sets(train.graphs, test.graphs, kernel, svm);
}

TrialSummary downstream_trials(const GraphDataset& train, const GraphDataset& test,
                               const KernelOptions& kernel, const SvmOptions& svm, int trials,
                               std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  downstream_eval(train, test, kernel, svm);  // argument checks
  TrialSummary s;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, "downstream", static_cast<std::uint64_t>(t));
    // Stratified 90% subsample so every class stays present.
    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < static_cast<int>(train.graphs.size()); ++i)
      by_class[train.graphs[i].graph_class].push_back(i);
    std::vector<int> keep;
    for (auto& [c, idx] : by_class) {
      auto perm = rng.permutation(static_cast<int>(idx.size()));
      const int k = std::max(1, static_cast<int>(std::ceil(0.9 * idx.size())));
      for (int i = 0; i < k; ++i) keep.push_back(idx[perm[i]]);
    }
    std::sort(keep.begin(), keep.end());
    std::vector<LabeledGraph> sub;
    for (int i : keep) sub.push_back(train.graphs[i]);
    s.accuracies.push_back(eval_sets(sub, test.graphs, kernel, svm));
  }
  for (double a : s.accuracies) s.mean += a;
  s.mean /= trials;
  for (double a : s.accuracies) s.stddev += (a - s.mean) * (a - s.mean);
  s.stddev = std::sqrt(s.stddev / trials);
  return s;
}

}  // namespace lggan
