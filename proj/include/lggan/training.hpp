#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lggan/autodiff.hpp"
#include "lggan/graph.hpp"
#include "lggan/model.hpp"
#include "lggan/optim.hpp"
#include "lggan/rng.hpp"

namespace lggan {

// Adversarial objective for the realness head. Logistic is the original
// minimax GAN (non-saturating generator term); Wasserstein is the critic form
// used together with the gradient penalty.
enum class Objective { Wasserstein, Logistic };
enum class ClassPrior { Empirical, Uniform };

std::string to_string(Objective o);
std::string to_string(ClassPrior p);
Objective parse_objective(const std::string& s);
ClassPrior parse_class_prior(const std::string& s);

struct LossPair {
  ad::Var loss_d;
  ad::Var loss_g;
};

inline constexpr double kLogClampLo = 1e-12;
inline constexpr double kLogClampHi = 1.0 - 1e-12;

// log sigma(x) and log(1 - sigma(x)) via a stable log-softmax, with the
// probability clamped to [1e-12, 1 - 1e-12].
ad::Var log_sigmoid(ad::Var x);
ad::Var log_one_minus_sigmoid(ad::Var x);

// Batch inputs are 1x1 critic outputs.
LossPair loss_gan(std::span<const ad::Var> d_real, std::span<const ad::Var> d_fake);
LossPair loss_wasserstein(std::span<const ad::Var> d_real, std::span<const ad::Var> d_fake);

// The minimax value mean log D(x) + mean log(1 - D(G(z))), as written.
ad::Var minimax_value(std::span<const ad::Var> d_real, std::span<const ad::Var> d_fake);

// Generator input row: z, followed by the class one-hot for cgan/acgan.
Eigen::RowVectorXd conditional_inputs(Variant variant, std::optional<int> cls, int num_classes,
                                      const Eigen::RowVectorXd& z);

// -log softmax(logits)[cls] with the probability clamped like log_sigmoid.
ad::Var cross_entropy(ad::Var logits, int cls);

// Mean cross-entropy on real samples plus mean cross-entropy on fakes.
ad::Var loss_acgan_class(std::span<const ad::Var> real_logits, std::span<const int> true_class,
                         std::span<const ad::Var> fake_logits, std::span<const int> sampled_class);

struct DenseSample {
  Eigen::MatrixXd adj;
  Eigen::MatrixXd labels;
  int cls = 0;
};

struct CriticEval {
  ad::Var realness;
  ad::Var features;
};

// Evaluates the critic on (adj, labels) for a sample of class `cls`.
using Critic = std::function<CriticEval(ad::Tape&, ad::Var adj, ad::Var labels, int cls)>;

Critic make_critic(const Discriminator& disc, std::span<const ad::Var> bound);

// lambda * mean (||grad_x D(x_hat)|| - 1)^2 with x_hat = eps real + (1 - eps) fake.
// The overload without eps draws eps ~ U[0, 1] per sample.
ad::Var gradient_penalty(ad::Tape& tape, const Critic& critic, std::span<const DenseSample> real,
                         std::span<const DenseSample> fake, std::span<const double> eps,
                         double lambda);
ad::Var gradient_penalty(ad::Tape& tape, const Critic& critic, std::span<const DenseSample> real,
                         std::span<const DenseSample> fake, Rng& rng, double lambda);

// Input noise U(-noise, noise): symmetric with a zero diagonal on A, clipped to [0, 1].
DenseSample perturb(const DenseSample& x, double noise, Rng& rng);

// lambda * mean max(0, |D(x') - D(x'')| + 0.1 ||f(x') - f(x'')|| - margin).
ad::Var consistency_term(ad::Tape& tape, const Critic& critic, std::span<const DenseSample> real,
                         Rng& rng, double lambda, double margin, double noise);

// lambda * ||mean(real) - mean(fake)||^2 over 1 x F feature rows.
ad::Var feature_matching(std::span<const ad::Var> real_features,
                         std::span<const ad::Var> fake_features, double lambda);

struct TrainConfig {
  Variant variant = Variant::AcGan;
  Objective objective = Objective::Wasserstein;
  int batch_size = 32;
  int d_steps = 5;
  AdamConfig gen_adam;
  AdamConfig disc_adam;
  double lambda_gp = 10.0;
  double lambda_ct = 2.0;
  double ct_margin = 0.2;
  double ct_noise = 0.05;
  double lambda_fm = 1.0;
  int epochs = 0;          // 0: no epoch limit
  long max_steps = 1000;   // generator steps; 0: no step limit
  std::uint64_t seed = 0;
  int latent_dim = 16;
  int max_nodes = 0;       // 0: largest graph in the data
  std::vector<int> gen_hidden{64, 128};
  int disc_layers = 3;
  int disc_width = 32;
  Aggregation aggregation = Aggregation::MaxPool;
  bool residual = true;
  ClassPrior class_prior = ClassPrior::Empirical;

  // Throws std::invalid_argument describing the first bad field.
  void validate() const;
  bool conditional() const { return variant != Variant::Gan; }
};

struct LossRecord {
  long step = 0;
  double loss_d = 0, loss_g = 0, gp = 0, ct = 0, l_c = 0, fm = 0;
};

// One line of the loss curve: "step loss_d loss_g gp ct l_c fm".
std::string format_loss_record(const LossRecord& r);

struct TrainState {
  Generator generator;
  Discriminator discriminator;
  Adam gen_opt;
  Adam disc_opt;
  long step = 0;        // completed generator steps
  long epoch = 0;       // current pass over the data
  long cursor = 0;      // next sample within the epoch
  std::vector<double> class_prior;
};

// Builds freshly initialised networks for the config and dataset.
TrainState init_state(const TrainConfig& config, const GraphDataset& data);

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long step, const std::string& what)
      : std::runtime_error("non-finite values at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

struct TrainHooks {
  std::function<void(const LossRecord&)> on_step;
  std::function<void(const TrainState&)> on_checkpoint;
  long checkpoint_every = 0;
};

// Dense, freshly BFS-canonicalized samples of one epoch in visiting order.
// Epoch e uses Rng::stream(seed, "epoch", e).
std::vector<DenseSample> epoch_samples(const TrainConfig& config, const GraphDataset& data,
                                       long epoch, int max_nodes);

// Generator inputs for `count` fakes: classes from the prior, z ~ N(0, I).
struct FakeInputs {
  Eigen::MatrixXd inputs;
  std::vector<int> classes;
};
FakeInputs draw_fake_inputs(const TrainConfig& config, std::span<const double> class_prior,
                            int num_classes, int count, Rng& rng);

// Critic update k of generator step s draws from Rng::stream(seed, "critic", 64 s + k);
// the generator update of step s from Rng::stream(seed, "generator", s).
// Runs until max_steps / epochs. On divergence `state` is left at the last
// finite step and DivergenceError is thrown.
void train(const TrainConfig& config, const GraphDataset& data, TrainState& state,
           const TrainHooks& hooks = {});

// Samples classes from the prior and latents from N(0, I); discretizes.
std::vector<LabeledGraph> generate_graphs(const Generator& gen, Variant variant, int count,
                                          Rng& rng, double threshold,
                                          std::span<const double> class_prior,
                                          std::optional<int> fixed_class = std::nullopt);

std::vector<double> empirical_class_prior(const GraphDataset& data);

}  // namespace lggan
