#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lggan/graph.hpp"
#include "lggan/kernels.hpp"

namespace lggan {

struct SvmOptions {
  double C = 1.0;
  double tolerance = 1e-4;  // KKT violation m(alpha) - M(alpha)
  long max_iterations = 1000000;
};

// Dual of the soft-margin SVM, labels y in {-1, +1}:
//   min 1/2 a'Qa - 1'a,  Q_ij = y_i y_j K_ij,  0 <= a <= C,  y'a = 0.
// decision(x) = sum_i a_i y_i K(x_i, x) - rho.
struct BinarySvm {
  Eigen::VectorXd alpha;
  Eigen::VectorXd y;
  double rho = 0.0;
  long iterations = 0;
};

double svm_dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& alpha);

// Pairwise coordinate descent (SMO) with maximal-violating-pair selection.
BinarySvm svm_train_binary(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                           const SvmOptions& options = {});

// K_test_train: rows are query points, columns training points.
Eigen::VectorXd svm_decision(const BinarySvm& m, const Eigen::MatrixXd& K_test_train);

// One-vs-rest multiclass.
struct SvmModel {
  std::vector<int> classes;
  std::vector<BinarySvm> machines;
  double C = 1.0;
};

SvmModel svm_train(const Eigen::MatrixXd& K, std::span<const int> labels,
                   const SvmOptions& options = {});
// Highest one-vs-rest score wins; ties go to the smaller class.
std::vector<int> svm_predict(const SvmModel& model, const Eigen::MatrixXd& K_test_train);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

// Train on `train` (graph classes as labels), report accuracy on `test`.
double downstream_eval(const GraphDataset& train, const GraphDataset& test,
                       const KernelOptions& kernel, const SvmOptions& svm = {});

struct TrialSummary {
  std::vector<double> accuracies;
  double mean = 0.0;
  double stddev = 0.0;
};

// Trial t trains on a seeded 90% subsample of `train` (each class kept) and
// tests on all of `test`.
TrialSummary downstream_trials(const GraphDataset& train, const GraphDataset& test,
                               const KernelOptions& kernel, const SvmOptions& svm, int trials,
                               std::uint64_t seed);

}  // namespace lggan
