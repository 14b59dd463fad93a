#include "lggan/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace lggan {

using ad::Matrix;
using ad::Tape;
using ad::Var;

std::string to_string(Objective o) { return o == Objective::Logistic ? "logistic" : "wasserstein"; }
std::string to_string(ClassPrior p) { return p == ClassPrior::Uniform ? "uniform" : "empirical"; }

Objective parse_objective(const std::string& s) {
  if (s == "wasserstein") return Objective::Wasserstein;
  if (s == "logistic") return Objective::Logistic;
  throw std::invalid_argument("unknown objective '" + s + "' (wasserstein|logistic)");
}

ClassPrior parse_class_prior(const std::string& s) {
  if (s == "empirical") return ClassPrior::Empirical;
  if (s == "uniform") return ClassPrior::Uniform;
  throw std::invalid_argument("unknown class prior '" + s + "' (empirical|uniform)");
}

namespace {

Tape& tape_of(Var v) { return *v.tape(); }

Var batch_mean(std::span<const Var> xs) {
  if (xs.empty()) throw std::invalid_argument("empty batch");
  return ad::mean(ad::concat_rows(xs));
}

void require_same_batch(std::span<const Var> a, std::span<const Var> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("real and fake batches differ in size (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

// Column k of log_softmax([0, x]) clamped in log space.
Var clamped_log_pick(Var logits_row, int k) {
  Tape& t = tape_of(logits_row);
  Var logp = ad::log_softmax(logits_row);
  Matrix pick = Matrix::Zero(logits_row.cols(), 1);
  pick(k, 0) = 1.0;
  return ad::clamp(ad::matmul(logp, t.constant(pick)), std::log(kLogClampLo),
                   std::log(kLogClampHi));
}

Var sigmoid_pair(Var x) {
  Tape& t = tape_of(x);
  std::vector<Var> parts{t.constant(Matrix::Zero(1, 1)), x};
  return ad::concat_cols(parts);
}

}  // namespace

Var log_sigmoid(Var x) { return clamped_log_pick(sigmoid_pair(x), 1); }
Var log_one_minus_sigmoid(Var x) { return clamped_log_pick(sigmoid_pair(x), 0); }

LossPair loss_gan(std::span<const Var> d_real, std::span<const Var> d_fake) {
  require_same_batch(d_real, d_fake);
  std::vector<Var> lr, lf, lg;
  for (Var d : d_real) lr.push_back(log_sigmoid(d));
  for (Var d : d_fake) {
    lf.push_back(log_one_minus_sigmoid(d));
    lg.push_back(log_sigmoid(d));
  }
  Var loss_d = ad::scale(ad::add(batch_mean(lr), batch_mean(lf)), -1.0);
  return {loss_d, ad::scale(batch_mean(lg), -1.0)};
}

LossPair loss_wasserstein(std::span<const Var> d_real, std::span<const Var> d_fake) {
  require_same_batch(d_real, d_fake);
  Var fake = batch_mean(d_fake);
  return {ad::sub(fake, batch_mean(d_real)), ad::scale(fake, -1.0)};
}

Var minimax_value(std::span<const Var> d_real, std::span<const Var> d_fake) {
  require_same_batch(d_real, d_fake);
  std::vector<Var> lr, lf;
  for (Var d : d_real) lr.push_back(log_sigmoid(d));
  for (Var d : d_fake) lf.push_back(log_one_minus_sigmoid(d));
  return ad::add(batch_mean(lr), batch_mean(lf));
}

Eigen::RowVectorXd conditional_inputs(Variant variant, std::optional<int> cls, int num_classes,
                                      const Eigen::RowVectorXd& z) {
  if (variant == Variant::Gan) return z;
  if (!cls) throw std::invalid_argument(to_string(variant) + " needs a class for every sample");
  Eigen::RowVectorXd out(z.size() + num_classes);
  out << z, one_hot(*cls, num_classes);
  return out;
}

Var cross_entropy(Var logits, int cls) {
  if (logits.rows() != 1) throw ad::ShapeError("cross_entropy expects a logit row");
  if (cls < 0 || cls >= logits.cols())
    throw std::out_of_range("class " + std::to_string(cls) + " out of range for " +
                            std::to_string(logits.cols()) + " logits");
  return ad::scale(clamped_log_pick(logits, cls), -1.0);
}

Var loss_acgan_class(std::span<const Var> real_logits, std::span<const int> true_class,
                     std::span<const Var> fake_logits, std::span<const int> sampled_class) {
  if (real_logits.size() != true_class.size() || fake_logits.size() != sampled_class.size())
    throw std::invalid_argument("logit and class counts differ");
  std::vector<Var> real, fake;
  for (std::size_t i = 0; i < real_logits.size(); ++i)
    real.push_back(cross_entropy(real_logits[i], true_class[i]));
  for (std::size_t i = 0; i < fake_logits.size(); ++i)
    fake.push_back(cross_entropy(fake_logits[i], sampled_class[i]));
  return ad::add(batch_mean(real), batch_mean(fake));
}

Critic make_critic(const Discriminator& disc, std::span<const Var> bound) {
  std::vector<Var> params(bound.begin(), bound.end());
  return [&disc, params](Tape& tape, Var adj, Var labels, int cls) {
    std::optional<Var> onehot;
    if (disc.config().conditional)
      onehot = tape.constant(one_hot(cls, disc.config().num_classes));
    auto out = disc.forward(tape, params, adj, labels, onehot);
    return CriticEval{out.realness, out.features};
  };
}

Var gradient_penalty(Tape& tape, const Critic& critic, std::span<const DenseSample> real,
                     std::span<const DenseSample> fake, std::span<const double> eps,
                     double lambda) {
  if (real.size() != fake.size() || real.size() != eps.size() || real.empty())
    throw std::invalid_argument("gradient penalty needs equal, nonempty batches");
  std::vector<Var> terms;
  for (std::size_t i = 0; i < real.size(); ++i) {
    const double e = eps[i];
    if (real[i].adj.rows() != fake[i].adj.rows() || real[i].labels.cols() != fake[i].labels.cols())
      throw ad::ShapeError("gradient penalty: real and fake shapes differ");
    Var adj = tape.leaf(e * real[i].adj + (1.0 - e) * fake[i].adj, true);
    Var labels = tape.leaf(e * real[i].labels + (1.0 - e) * fake[i].labels, true);
    Var out = critic(tape, adj, labels, real[i].cls).realness;
    std::vector<Var> wrt{adj, labels};
    Var gn = tape.grad_norm(out, wrt);
    terms.push_back(ad::pow(ad::add_constant(gn, -1.0), 2.0));
  }
  return ad::scale(batch_mean(terms), lambda);
}

Var gradient_penalty(Tape& tape, const Critic& critic, std::span<const DenseSample> real,
                     std::span<const DenseSample> fake, Rng& rng, double lambda) {
  std::vector<double> eps(real.size());
  for (double& e : eps) e = rng.uniform();
  return gradient_penalty(tape, critic, real, fake, eps, lambda);
}

DenseSample perturb(const DenseSample& x, double noise, Rng& rng) {
  DenseSample out = x;
  if (noise <= 0.0) return out;
  const Eigen::Index n = x.adj.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double v = std::clamp(x.adj(i, j) + rng.uniform(-noise, noise), 0.0, 1.0);
      out.adj(i, j) = v;
      out.adj(j, i) = v;
    }
  out.adj.diagonal().setZero();
  for (Eigen::Index i = 0; i < out.labels.size(); ++i)
    out.labels.data()[i] = std::clamp(x.labels.data()[i] + rng.uniform(-noise, noise), 0.0, 1.0);
  return out;
}

Var consistency_term(Tape& tape, const Critic& critic, std::span<const DenseSample> real, Rng& rng,
                     double lambda, double margin, double noise) {
  if (real.empty()) throw std::invalid_argument("consistency term needs a nonempty batch");
  std::vector<Var> terms;
  for (const auto& x : real) {
    DenseSample a = perturb(x, noise, rng);
    DenseSample b = perturb(x, noise, rng);
    CriticEval ea = critic(tape, tape.constant(a.adj), tape.constant(a.labels), x.cls);
    CriticEval eb = critic(tape, tape.constant(b.adj), tape.constant(b.labels), x.cls);
    Var gap = ad::add(ad::norm(ad::sub(ea.realness, eb.realness)),
                      ad::scale(ad::norm(ad::sub(ea.features, eb.features)), 0.1));
    terms.push_back(ad::relu(ad::add_constant(gap, -margin)));
  }
  return ad::scale(batch_mean(terms), lambda);
}

Var feature_matching(std::span<const Var> real_features, std::span<const Var> fake_features,
                     double lambda) {
  if (real_features.empty() || fake_features.empty())
    throw std::invalid_argument("feature matching needs nonempty batches");
  Tape& t = tape_of(real_features[0]);
  auto row_mean = [&](std::span<const Var> xs) {
    const Eigen::Index b = static_cast<Eigen::Index>(xs.size());
    return ad::matmul(t.constant(Matrix::Constant(1, b, 1.0 / static_cast<double>(b))),
                      ad::concat_rows(xs));
  };
  Var diff = ad::sub(row_mean(real_features), row_mean(fake_features));
  return ad::scale(ad::sum(ad::mul(diff, diff)), lambda);
}

// --- training loop ----------------------------------------------------------

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument(what); };
  if (batch_size < 2) bad("batch_size must be at least 2");
  if (d_steps < 1) bad("d_steps must be at least 1");
  if (lambda_gp < 0 || lambda_ct < 0 || lambda_fm < 0 || ct_margin < 0 || ct_noise < 0)
    bad("loss weights must be nonnegative");
  if (gen_adam.learning_rate <= 0 || disc_adam.learning_rate <= 0) bad("learning rates must be positive");
  if (epochs < 0 || max_steps < 0) bad("epochs and max_steps must be nonnegative");
  if (epochs == 0 && max_steps == 0) bad("either epochs or max_steps must be set");
  if (latent_dim < 1) bad("latent_dim must be positive");
  if (max_nodes < 0) bad("max_nodes must be nonnegative");
  if (disc_layers < 1 || disc_width < 1) bad("discriminator needs positive layers and width");
  for (int h : gen_hidden)
    if (h < 1) bad("generator hidden sizes must be positive");
}

std::string format_loss_record(const LossRecord& r) {
  std::ostringstream os;
  os << r.step << std::setprecision(9);
  for (double v : {r.loss_d, r.loss_g, r.gp, r.ct, r.l_c, r.fm}) os << ' ' << v;
  return os.str();
}

std::vector<double> empirical_class_prior(const GraphDataset& data) {
  std::vector<double> prior(std::max(1, data.num_graph_classes), 0.0);
  for (const auto& g : data.graphs) prior[g.graph_class] += 1.0;
  for (double& p : prior) p /= static_cast<double>(data.graphs.size());
  return prior;
}

namespace {

int resolved_max_nodes(const TrainConfig& c, const GraphDataset& data) {
  return c.max_nodes > 0 ? c.max_nodes : data.max_nodes();
}

}  // namespace

TrainState init_state(const TrainConfig& config, const GraphDataset& data) {
  config.validate();
  if (data.graphs.empty()) throw std::invalid_argument("training data is empty");
  const int n = resolved_max_nodes(config, data);
  if (data.max_nodes() > n)
    throw std::invalid_argument("dataset has a graph with " + std::to_string(data.max_nodes()) +
                                " nodes, above max_nodes=" + std::to_string(n));
  const int classes = std::max(1, data.num_graph_classes);

  GeneratorConfig gc;
  gc.latent_dim = config.latent_dim;
  gc.num_classes = classes;
  gc.conditional = config.conditional();
  gc.hidden = config.gen_hidden;
  gc.max_nodes = n;
  gc.num_labels = data.num_node_labels;

  DiscriminatorConfig dc;
  dc.max_nodes = n;
  dc.num_labels = data.num_node_labels;
  dc.num_classes = classes;
  dc.layers = config.disc_layers;
  dc.width = config.disc_width;
  dc.aggregation = config.aggregation;
  dc.residual = config.residual;
  dc.conditional = config.variant == Variant::CGan;

  Rng gen_rng = Rng::stream(config.seed, "init.generator");
  Rng disc_rng = Rng::stream(config.seed, "init.discriminator");
  TrainState s;
  s.generator = Generator(gc, gen_rng);
  s.discriminator = Discriminator(dc, disc_rng);
  s.gen_opt = Adam(s.generator.params(), config.gen_adam);
  s.disc_opt = Adam(s.discriminator.params(), config.disc_adam);
  if (config.class_prior == ClassPrior::Uniform)
    s.class_prior.assign(classes, 1.0 / classes);
  else
    s.class_prior = empirical_class_prior(data);
  return s;
}

namespace {

void check_finite(double v, long step, const char* what) {
  if (!std::isfinite(v)) throw DivergenceError(step, what);
}

std::vector<Eigen::MatrixXd> collect(const ad::Gradients& g, std::span<const Var> bound) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(bound.size());
  for (Var v : bound) out.push_back(g[v]);
  return out;
}

}  // namespace

std::vector<DenseSample> epoch_samples(const TrainConfig& config, const GraphDataset& data,
                                       long epoch, int max_nodes) {
  Rng rng = Rng::stream(config.seed, "epoch", static_cast<std::uint64_t>(epoch));
  std::vector<int> order = rng.permutation(static_cast<int>(data.graphs.size()));
  std::vector<DenseSample> out;
  out.reserve(order.size());
  for (int idx : order) {
    LabeledGraph g = canonicalize(data.graphs[idx], rng);
    auto dense = to_dense<double>(g, max_nodes, data.num_node_labels);
    out.push_back({std::move(dense.adj), std::move(dense.labels), g.graph_class});
  }
  return out;
}

FakeInputs draw_fake_inputs(const TrainConfig& config, std::span<const double> class_prior,
                            int num_classes, int count, Rng& rng) {
  FakeInputs f;
  std::vector<double> w(class_prior.begin(), class_prior.end());
  f.classes.resize(count);
  for (int& c : f.classes) c = rng.categorical(w);
  const int in = config.latent_dim + (config.conditional() ? num_classes : 0);
  f.inputs.resize(count, in);
  for (int b = 0; b < count; ++b) {
    Eigen::RowVectorXd z(config.latent_dim);
    for (int k = 0; k < config.latent_dim; ++k) z(k) = rng.normal();
    f.inputs.row(b) = conditional_inputs(
        config.variant, config.conditional() ? std::optional<int>(f.classes[b]) : std::nullopt,
        num_classes, z);
  }
  return f;
}

void train(const TrainConfig& config, const GraphDataset& data, TrainState& state,
           const TrainHooks& hooks) {
  config.validate();
  if (data.graphs.empty()) throw std::invalid_argument("training data is empty");
  const int n = state.generator.config().max_nodes;
  if (data.max_nodes() > n)
    throw std::invalid_argument("dataset graphs exceed the model's N_max=" + std::to_string(n));
  if (data.num_node_labels != state.generator.config().num_labels)
    throw std::invalid_argument("dataset label count does not match the model");
  const int classes = state.discriminator.config().num_classes;
  const int batch = config.batch_size;
  const auto data_size = static_cast<long>(data.graphs.size());
  const Generator& gen = state.generator;
  const Discriminator& disc = state.discriminator;

  long loaded_epoch = -1;
  std::vector<DenseSample> samples;
  auto next_batch = [&]() {
    std::vector<DenseSample> out;
    out.reserve(batch);
    while (static_cast<int>(out.size()) < batch) {
      if (state.cursor >= data_size) {
        ++state.epoch;
        state.cursor = 0;
      }
      if (loaded_epoch != state.epoch) {
        samples = epoch_samples(config, data, state.epoch, n);
        loaded_epoch = state.epoch;
      }
      out.push_back(samples[state.cursor++]);
    }
    return out;
  };
  auto done = [&]() {
    if (config.max_steps > 0 && state.step >= config.max_steps) return true;
    if (config.epochs > 0 && state.epoch >= config.epochs) return true;
    return false;
  };

  while (!done()) {
    const long step = state.step + 1;
    TrainState last_good = state;
    LossRecord rec;
    rec.step = step;
    try {
      // Critic updates.
      for (int k = 0; k < config.d_steps; ++k) {
        Rng rng = Rng::stream(config.seed, "critic", static_cast<std::uint64_t>(step) * 64 + k);
        std::vector<DenseSample> real = next_batch();
        FakeInputs fi = draw_fake_inputs(config, state.class_prior, classes, batch, rng);
        const std::vector<int>& fake_cls = fi.classes;
        const Eigen::MatrixXd& inputs = fi.inputs;

        std::vector<DenseSample> fake;
        {
          Tape gt;
          auto gb = gen.params().bind(gt, false);
          auto out = gen.forward(gt, gb, inputs);
          for (int b = 0; b < batch; ++b)
            fake.push_back({out[b].adj.value(), out[b].labels.value(), fake_cls[b]});
        }

        Tape tape;
        auto bound = disc.params().bind(tape, true);
        Critic critic = make_critic(disc, bound);
        std::optional<Var> onehot;
        std::vector<Var> d_real, d_fake, l_real, l_fake;
        std::vector<int> real_cls;
        for (const auto& x : real) {
          auto o = disc.forward(tape, bound, tape.constant(x.adj), tape.constant(x.labels),
                                disc.config().conditional
                                    ? std::optional<Var>(tape.constant(one_hot(x.cls, classes)))
                                    : std::nullopt);
          d_real.push_back(o.realness);
          l_real.push_back(o.class_logits);
          real_cls.push_back(x.cls);
        }
        for (const auto& x : fake) {
          auto o = disc.forward(tape, bound, tape.constant(x.adj), tape.constant(x.labels),
                                disc.config().conditional
                                    ? std::optional<Var>(tape.constant(one_hot(x.cls, classes)))
                                    : std::nullopt);
          d_fake.push_back(o.realness);
          l_fake.push_back(o.class_logits);
        }
        LossPair adv = config.objective == Objective::Logistic ? loss_gan(d_real, d_fake)
                                                               : loss_wasserstein(d_real, d_fake);
        Var loss = adv.loss_d;
        rec.loss_d = adv.loss_d.scalar();
        rec.gp = rec.ct = rec.l_c = 0.0;
        if (config.lambda_gp > 0) {
          Var gp = gradient_penalty(tape, critic, real, fake, rng, config.lambda_gp);
          rec.gp = gp.scalar();
          loss = ad::add(loss, gp);
        }
        if (config.lambda_ct > 0) {
          Var ct = consistency_term(tape, critic, real, rng, config.lambda_ct, config.ct_margin,
                                    config.ct_noise);
          rec.ct = ct.scalar();
          loss = ad::add(loss, ct);
        }
        if (config.variant == Variant::AcGan) {
          Var lc = loss_acgan_class(l_real, real_cls, l_fake, fake_cls);
          rec.l_c = lc.scalar();
          loss = ad::add(loss, lc);
        }
        check_finite(loss.scalar(), step, "critic loss");
        auto grads = tape.backward(loss);
        state.disc_opt.step(state.discriminator.params(), collect(grads, bound));
        if (!state.discriminator.params().all_finite())
          throw DivergenceError(step, "critic parameters");
      }

      // Generator update.
      {
        Rng rng = Rng::stream(config.seed, "generator", static_cast<std::uint64_t>(step));
        FakeInputs fi = draw_fake_inputs(config, state.class_prior, classes, batch, rng);
        const std::vector<int>& fake_cls = fi.classes;
        const Eigen::MatrixXd& inputs = fi.inputs;
        Tape tape;
        auto gb = gen.params().bind(tape, true);
        auto db = disc.params().bind(tape, false);
        auto out = gen.forward(tape, gb, inputs);
        std::vector<Var> d_fake, l_fake, f_fake, f_real;
        for (int b = 0; b < batch; ++b) {
          auto o = disc.forward(tape, db, out[b].adj, out[b].labels,
                                disc.config().conditional
                                    ? std::optional<Var>(tape.constant(one_hot(fake_cls[b], classes)))
                                    : std::nullopt);
          d_fake.push_back(o.realness);
          l_fake.push_back(o.class_logits);
          f_fake.push_back(o.features);
        }
        Var loss;
        if (config.objective == Objective::Logistic) {
          std::vector<Var> lg;
          for (Var d : d_fake) lg.push_back(log_sigmoid(d));
          loss = ad::scale(batch_mean(lg), -1.0);
        } else {
          loss = ad::scale(batch_mean(d_fake), -1.0);
        }
        rec.loss_g = loss.scalar();
        if (config.variant == Variant::AcGan) {
          std::vector<Var> ce;
          for (int b = 0; b < batch; ++b) ce.push_back(cross_entropy(l_fake[b], fake_cls[b]));
          Var lc = batch_mean(ce);
          loss = ad::add(loss, lc);
          rec.loss_g += lc.scalar();
        }
        rec.fm = 0.0;
        if (config.lambda_fm > 0) {
          // Real features come from the next batch in epoch order.
          std::vector<DenseSample> real = next_batch();
          for (const auto& x : real) {
            auto o = disc.forward(tape, db, tape.constant(x.adj), tape.constant(x.labels),
                                  disc.config().conditional
                                      ? std::optional<Var>(tape.constant(one_hot(x.cls, classes)))
                                      : std::nullopt);
            f_real.push_back(o.features);
          }
          Var fm = feature_matching(f_real, f_fake, config.lambda_fm);
          rec.fm = fm.scalar();
          loss = ad::add(loss, fm);
        }
        check_finite(loss.scalar(), step, "generator loss");
        auto grads = tape.backward(loss);
        state.gen_opt.step(state.generator.params(), collect(grads, gb));
        if (!state.generator.params().all_finite())
          throw DivergenceError(step, "generator parameters");
      }
    } catch (const ad::NumericError& e) {
      state = std::move(last_good);
      throw DivergenceError(step, e.what());
    } catch (const DivergenceError&) {
      state = std::move(last_good);
      throw;
    }
    state.step = step;
    if (hooks.on_step) hooks.on_step(rec);
    if (hooks.on_checkpoint && hooks.checkpoint_every > 0 && step % hooks.checkpoint_every == 0)
      hooks.on_checkpoint(state);
  }
}

std::vector<LabeledGraph> generate_graphs(const Generator& gen, Variant variant, int count,
                                          Rng& rng, double threshold,
                                          std::span<const double> class_prior,
                                          std::optional<int> fixed_class) {
  const auto& gc = gen.config();
  std::vector<LabeledGraph> out;
  out.reserve(count);
  std::vector<double> prior(class_prior.begin(), class_prior.end());
  if (prior.empty()) prior.assign(gc.num_classes, 1.0);
  for (int i = 0; i < count; ++i) {
    int cls = fixed_class ? *fixed_class : rng.categorical(prior);
    if (cls < 0 || cls >= gc.num_classes)
      throw std::out_of_range("class " + std::to_string(cls) + " out of range");
    Eigen::RowVectorXd z(gc.latent_dim);
    for (int k = 0; k < gc.latent_dim; ++k) z(k) = rng.normal();
    auto input = conditional_inputs(variant, gc.conditional ? std::optional<int>(cls) : std::nullopt,
                                    gc.num_classes, z);
    auto [adj, labels] = gen.sample(input);
    out.push_back(discretize(adj, labels, threshold, cls));
  }
  return out;
}

}  // namespace lggan
