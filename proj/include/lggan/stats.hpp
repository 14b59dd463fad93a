#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lggan/graph.hpp"

namespace lggan {

enum class StatKind { Degree, Clustering, Orbit, Label };

std::string to_string(StatKind k);

// Normalized histogram, except Orbit which holds the raw mean orbit counts.
struct StatHistogram {
  StatKind kind = StatKind::Degree;
  Eigen::VectorXd bins;
  double bin_width = 1.0;  // ground distance between neighbouring bins
};

inline constexpr int kNumOrbits = 15;
inline constexpr int kMaxOrbitNodes = 400;

// Bins 0..max_degree_bins, the last one collecting overflow.
StatHistogram degree_histogram(const LabeledGraph& g, int max_degree_bins);

// Local clustering per node, 0 when the degree is below 2.
std::vector<double> clustering_coefficients(const LabeledGraph& g);
// `bins` equal bins on [0, 1]; a coefficient of 1 lands in the last bin.
StatHistogram clustering_histogram(const LabeledGraph& g, int bins);

// Orbit numbering for connected graphlets on 2-4 nodes:
//  0 edge; 1 path end, 2 path centre; 3 triangle;
//  4 P4 end, 5 P4 inner; 6 star leaf, 7 star centre; 8 4-cycle;
//  9 paw tail, 10 paw degree-2, 11 paw centre; 12 diamond degree-2,
//  13 diamond degree-3; 14 K4.
using OrbitMatrix = Eigen::Matrix<long, Eigen::Dynamic, kNumOrbits>;
OrbitMatrix orbit_counts_per_node(const LabeledGraph& g);
// Mean orbit-count vector over nodes (zero vector for the empty graph).
StatHistogram orbit_counts(const LabeledGraph& g);

StatHistogram label_distribution(const LabeledGraph& g, int num_labels);

// Ground distance used inside the MMD kernel: first Wasserstein distance for
// normalized histograms, Euclidean for raw orbit vectors.
double histogram_distance(const StatHistogram& a, const StatHistogram& b);
double wasserstein1(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double bin_width);

// Biased (V-statistic) MMD with k(x, y) = exp(-d(x, y)^2 / (2 sigma^2)); returns
// sqrt(max(0, MMD^2)).
double mmd(std::span<const StatHistogram> a, std::span<const StatHistogram> b, double sigma);

struct MmdSigmas {
  double degree = 1.0;
  double clustering = 0.1;
  double orbit = 1.0;
  double label = 0.5;
};

struct MmdReport {
  double degree = 0.0;
  double clustering = 0.0;
  double orbit = 0.0;
  double label = 0.0;
  MmdSigmas sigmas;
};

inline constexpr int kClusteringBins = 100;

MmdReport evaluate(const GraphDataset& generated, const GraphDataset& reference,
                   const MmdSigmas& sigmas = {});

// Degree, clustering and orbit MMD on the subgraphs induced by each node label.
struct PerClassReport {
  struct Row {
    int label;
    double degree, clustering, orbit;
  };
  std::vector<Row> rows;
  std::vector<int> skipped;  // labels with no nonempty subgraph on one side
  double avg_degree = 0.0, avg_clustering = 0.0, avg_orbit = 0.0;
};

PerClassReport per_class_stats(const GraphDataset& generated, const GraphDataset& reference,
                               const MmdSigmas& sigmas = {});

// Text table ("metric value sigma estimator") followed by key=value lines.
void write_report(std::ostream& os, const MmdReport& r);
void write_report(std::ostream& os, const PerClassReport& r);

}  // namespace lggan
