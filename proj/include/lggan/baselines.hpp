#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

#include "lggan/graph.hpp"
#include "lggan/rng.hpp"

namespace lggan {

// Empirical size distribution: sizes observed in training, sampled uniformly
// over graphs (so repeated sizes weigh more).
struct SizeDistribution {
  std::vector<int> sizes;

  static SizeDistribution of(const GraphDataset& data);
  int sample(Rng& rng) const;
};

// Label/class spaces shared by every baseline.
struct LabelSpace {
  int num_node_labels = 1;
  int num_graph_classes = 1;
};

struct ErParams {
  SizeDistribution n_dist;
  double p = 0.0;
  LabelSpace space;
};

struct BaParams {
  SizeDistribution n_dist;
  int m = 1;
  LabelSpace space;
};

struct MmsbParams {
  int K = 1;
  Eigen::VectorXd alpha;            // K
  Eigen::MatrixXd B;                // K x K, symmetric
  Eigen::MatrixXd label_dist;       // K x C, row-stochastic
  SizeDistribution n_dist;
  LabelSpace space;

  void validate() const;
};

ErParams er_fit(const GraphDataset& data);
LabeledGraph er_sample(const ErParams& params, Rng& rng);
LabeledGraph er_sample(int n, double p, const LabelSpace& space, Rng& rng);

// m = round(mean |E| / n), at least 1; sizes <= m are dropped from n_dist.
BaParams ba_fit(const GraphDataset& data);
LabeledGraph ba_sample(const BaParams& params, Rng& rng);
LabeledGraph ba_sample(int n, int m, const LabelSpace& space, Rng& rng);

struct MmsbFitOptions {
  int K = 2;
  int iters = 500;
  double alpha = 0.1;
};

// Collapsed Gibbs over the two block indicators of every node pair, with
// Dirichlet(alpha) memberships and Beta(1, 1) block densities integrated out.
// Each node also carries one label slot (block -> label, Dirichlet(1) prior)
// so blocks mean the same thing in every graph.
MmsbParams mmsb_fit(const GraphDataset& data, const MmsbFitOptions& options, Rng& rng);
LabeledGraph mmsb_sample(const MmsbParams& params, Rng& rng);

std::vector<LabeledGraph> sample_many(int count, Rng& rng, auto&& sampler) {
  std::vector<LabeledGraph> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(sampler(rng));
  return out;
}

// Text form: "baseline <model>" then "key value..." lines, then "end".
void write_baseline(std::ostream& os, const ErParams& p);
void write_baseline(std::ostream& os, const BaParams& p);
void write_baseline(std::ostream& os, const MmsbParams& p);

struct AnyBaseline {
  enum class Kind { Er, Ba, Mmsb } kind = Kind::Er;
  ErParams er;
  BaParams ba;
  MmsbParams mmsb;

  LabeledGraph sample(Rng& rng) const;
};
AnyBaseline read_baseline(std::istream& is);

}  // namespace lggan
