#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lggan/graph.hpp"

namespace lggan {

enum class KernelKind { WeisfeilerLehman, ShortestPath, Graphlet };

std::string to_string(KernelKind k);
KernelKind parse_kernel_kind(const std::string& s);  // "wl" | "sp" | "graphlet"

struct KernelOptions {
  KernelKind kind = KernelKind::WeisfeilerLehman;
  int wl_iterations = 3;
  int sp_cap = 10;         // longer distances share the last bin
  int graphlet_size = 3;   // 3 or 4
};

// Sorted (feature id, value) pairs.
using SparseFeatures = std::vector<std::pair<std::uint64_t, double>>;

double dot(const SparseFeatures& a, const SparseFeatures& b);

// Feature maps for a whole list; WL relabeling uses one dictionary for the list,
// so features are only comparable within one call.
std::vector<SparseFeatures> kernel_features(std::span<const LabeledGraph> graphs,
                                            const KernelOptions& options);

// Induced-subgraph type frequencies on k nodes (labels ignored). Types are
// indexed by edge count for k = 3 and by the 11 four-node classes for k = 4.
Eigen::VectorXd graphlet_frequencies(const LabeledGraph& g, int k);
int graphlet_type_count(int k);

double wl_kernel(const LabeledGraph& a, const LabeledGraph& b, int h);
double sp_kernel(const LabeledGraph& a, const LabeledGraph& b, int cap = 10);
double graphlet_kernel(const LabeledGraph& a, const LabeledGraph& b, int k);

Eigen::MatrixXd gram_matrix(std::span<const LabeledGraph> graphs, const KernelOptions& options);
// rows: `rows`, cols: `cols`, with features computed jointly.
Eigen::MatrixXd cross_gram(std::span<const LabeledGraph> rows, std::span<const LabeledGraph> cols,
                           const KernelOptions& options);

// sqrt(K_ii + K_jj - 2 K_ij), floored at 0.
double kernel_distance(const Eigen::MatrixXd& K, Eigen::Index i, Eigen::Index j);
// K_ij / sqrt(K_ii K_jj); a zero self-similarity row becomes 0 off the diagonal, 1 on it.
Eigen::MatrixXd normalize_kernel(const Eigen::MatrixXd& K);

struct Histogram {
  double lo = 0.0, hi = 1.0;
  std::vector<long> counts;
};
Histogram histogram(std::span<const double> values, double lo, double hi, int bins);

struct DiversityResult {
  std::vector<double> training_min;   // each training graph to its nearest other training graph
  std::vector<double> generated_min;  // each generated graph to its nearest training graph
  Histogram training_hist, generated_hist;
};

// Distances from the normalized kernel; histograms span [0, sqrt(2)].
DiversityResult diversity(const GraphDataset& generated, const GraphDataset& training,
                          const KernelOptions& options, int bins = 20);

double median(std::vector<double> v);

}  // namespace lggan
