#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "lggan/baselines.hpp"
#include "lggan/checkpoint.hpp"
#include "lggan/cli.hpp"
#include "lggan/dataset_io.hpp"
#include "lggan/kernels.hpp"
#include "lggan/stats.hpp"
#include "lggan/svm.hpp"
#include "lggan/training.hpp"

namespace lggan::cli {

namespace {

namespace fs = std::filesystem;

// Data-side failures (unreadable or inconsistent inputs) -> exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

// Either a file or, when the path key is empty, stdout.
void emit(const Config& cfg, const std::string& key, const std::string& text, std::ostream& out) {
  if (cfg.has(key))
    write_text(cfg.path(key), text);
  else
    out << text;
}

GraphDataset load(const Config& cfg, const std::string& key) {
  return read_dataset(cfg.path(key));
}

std::string dataset_text(const GraphDataset& d) {
  std::ostringstream os;
  write_dataset(os, d);
  return os.str();
}

// --- prepare ----------------------------------------------------------------

int cmd_prepare(const Config& cfg, std::ostream& out, std::ostream& err) {
  auto host_set = load(cfg, "host");
  if (host_set.graphs.size() != 1)
    throw DataError("host file must contain exactly one graph, found " +
                    std::to_string(host_set.graphs.size()));
  const auto& host = host_set.graphs[0];
  const int hops = static_cast<int>(cfg.integer("hops"));
  const int min_n = static_cast<int>(cfg.integer("min_n"));
  const int max_n = static_cast<int>(cfg.integer("max_n"));
  const long count = cfg.integer("count");
  if (hops < 1 || min_n < 1 || max_n < min_n || count < 1)
    throw UsageError("prepare needs hops >= 1, 1 <= min_n <= max_n, count >= 1");

  Rng rng = Rng::stream(static_cast<std::uint64_t>(cfg.integer("seed")), "prepare", 0);
  GraphDataset d;
  d.name = cfg.str("name");
  d.num_node_labels = host_set.num_node_labels;
  d.num_graph_classes = host_set.num_node_labels;
  for (int center : rng.permutation(host.n)) {
    if (static_cast<long>(d.graphs.size()) >= count) break;
    if (auto ego = extract_ego_network(host, center, hops, min_n, max_n)) d.graphs.push_back(*ego);
  }
  if (static_cast<long>(d.graphs.size()) < count)
    err << "warning: only " << d.graphs.size() << " of " << count
        << " ego networks fall within the size bounds\n";
  write_text(cfg.path("out"), dataset_text(d));

  double nodes = 0, edges = 0;
  std::set<int> classes;
  for (const auto& g : d.graphs) {
    nodes += g.n;
    edges += static_cast<double>(g.edges.size());
    classes.insert(g.graph_class);
  }
  const double k = d.graphs.empty() ? 1.0 : static_cast<double>(d.graphs.size());
  out << "graphs " << d.graphs.size() << '\n'
      << "classes " << classes.size() << '\n'
      << "avg_nodes " << std::fixed << std::setprecision(2) << nodes / k << '\n'
      << "avg_edges " << edges / k << '\n'
      << "node_labels " << d.num_node_labels << '\n';
  return kOk;
}

// --- train ------------------------------------------------------------------

std::map<std::string, std::string> train_defaults() {
  TrainConfig t;
  return {{"data", ""},
          {"out_dir", ""},
          {"variant", to_string(t.variant)},
          {"objective", to_string(t.objective)},
          {"batch_size", std::to_string(t.batch_size)},
          {"d_steps", std::to_string(t.d_steps)},
          {"lr_g", shortest(t.gen_adam.learning_rate)},
          {"lr_d", shortest(t.disc_adam.learning_rate)},
          {"beta1", shortest(t.gen_adam.beta1)},
          {"beta2", shortest(t.gen_adam.beta2)},
          {"lambda_gp", shortest(t.lambda_gp)},
          {"lambda_ct", shortest(t.lambda_ct)},
          {"ct_margin", shortest(t.ct_margin)},
          {"ct_noise", shortest(t.ct_noise)},
          {"lambda_fm", shortest(t.lambda_fm)},
          {"epochs", std::to_string(t.epochs)},
          {"max_steps", std::to_string(t.max_steps)},
          {"latent_dim", std::to_string(t.latent_dim)},
          {"max_nodes", std::to_string(t.max_nodes)},
          {"gen_hidden", join(t.gen_hidden)},
          {"disc_layers", std::to_string(t.disc_layers)},
          {"disc_width", std::to_string(t.disc_width)},
          {"aggregation", to_string(t.aggregation)},
          {"residual", t.residual ? "true" : "false"},
          {"class_prior", to_string(t.class_prior)},
          {"checkpoint_every", "0"},
          {"resume", ""}};
}

TrainConfig train_config(const Config& cfg) {
  TrainConfig t;
  try {
    t.variant = parse_variant(cfg.str("variant"));
    t.objective = parse_objective(cfg.str("objective"));
    t.aggregation = parse_aggregation(cfg.str("aggregation"));
    t.class_prior = parse_class_prior(cfg.str("class_prior"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  t.batch_size = static_cast<int>(cfg.integer("batch_size"));
  t.d_steps = static_cast<int>(cfg.integer("d_steps"));
  t.gen_adam.learning_rate = cfg.real("lr_g");
  t.disc_adam.learning_rate = cfg.real("lr_d");
  t.gen_adam.beta1 = t.disc_adam.beta1 = cfg.real("beta1");
  t.gen_adam.beta2 = t.disc_adam.beta2 = cfg.real("beta2");
  t.lambda_gp = cfg.real("lambda_gp");
  t.lambda_ct = cfg.real("lambda_ct");
  t.ct_margin = cfg.real("ct_margin");
  t.ct_noise = cfg.real("ct_noise");
  t.lambda_fm = cfg.real("lambda_fm");
  t.epochs = static_cast<int>(cfg.integer("epochs"));
  t.max_steps = cfg.integer("max_steps");
  t.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  t.latent_dim = static_cast<int>(cfg.integer("latent_dim"));
  t.max_nodes = static_cast<int>(cfg.integer("max_nodes"));
  t.gen_hidden = cfg.int_list("gen_hidden");
  t.disc_layers = static_cast<int>(cfg.integer("disc_layers"));
  t.disc_width = static_cast<int>(cfg.integer("disc_width"));
  t.residual = cfg.boolean("residual");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return t;
}

void check_architecture(const TrainConfig& t, const Checkpoint& c) {
  auto expect = [&](const std::string& key, const std::string& want) {
    if (c.get(key) != want)
      throw DataError("checkpoint " + key + " is '" + c.get(key) + "' but the config asks for '" +
                      want + "'");
  };
  expect("variant", to_string(t.variant));
  expect("latent_dim", std::to_string(t.latent_dim));
  expect("gen_hidden", join(t.gen_hidden));
  expect("disc_layers", std::to_string(t.disc_layers));
  expect("disc_width", std::to_string(t.disc_width));
  expect("aggregation", to_string(t.aggregation));
  expect("residual", t.residual ? "1" : "0");
  if (t.max_nodes > 0) expect("max_nodes", std::to_string(t.max_nodes));
}

int cmd_train(const Config& cfg, std::ostream& out, std::ostream& err) {
  const TrainConfig t = train_config(cfg);
  const auto data = load(cfg, "data");
  const fs::path dir = cfg.path("out_dir");
  fs::create_directories(dir);
  {
    std::ostringstream os;
    cfg.dump(os);
    write_text(dir / "config.txt", os.str());
  }

  TrainState state = [&] {
    if (!cfg.has("resume")) return init_state(t, data);
    Checkpoint c = read_checkpoint(cfg.path("resume"));
    check_architecture(t, c);
    return restore_state(c);
  }();

  // The loss curve keeps earlier lines up to the resume point.
  std::ostringstream curve;
  curve << "# step loss_d loss_g gp ct l_c fm\n";
  if (cfg.has("resume")) {
    std::ifstream prev(dir / "loss.txt");
    std::string line;
    while (std::getline(prev, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (std::stol(line) <= state.step) curve << line << '\n';
    }
  }

  auto save = [&](const fs::path& p, const TrainState& s) {
    std::ostringstream os;
    write_checkpoint(os, make_checkpoint(t, s));
    write_text(p, os.str());
  };
  TrainHooks hooks;
  hooks.on_step = [&](const LossRecord& r) { curve << format_loss_record(r) << '\n'; };
  hooks.checkpoint_every = cfg.integer("checkpoint_every");
  hooks.on_checkpoint = [&](const TrainState& s) {
    save(dir / ("step-" + std::to_string(s.step) + ".ckpt"), s);
  };

  try {
    train(t, data, state, hooks);
  } catch (const DivergenceError& e) {
    write_text(dir / "loss.txt", curve.str());
    save(dir / "last_good.ckpt", state);
    err << "error: " << e.what() << "; last good state (step " << state.step << ") saved to "
        << (dir / "last_good.ckpt").string() << '\n';
    return kDivergence;
  }
  write_text(dir / "loss.txt", curve.str());
  save(dir / "final.ckpt", state);
  out << "trained to step " << state.step << " (epoch " << state.epoch << ")\n";
  return kOk;
}

// --- generate ---------------------------------------------------------------

int cmd_generate(const Config& cfg, std::ostream& out, std::ostream&) {
  auto loaded = load_generator(read_checkpoint(cfg.path("checkpoint")));
  const long count = cfg.integer("count");
  if (count < 1) throw UsageError("count must be >= 1");
  const double threshold = cfg.real("threshold");
  std::optional<int> fixed;
  if (cfg.has("class")) {
    fixed = static_cast<int>(cfg.integer("class"));
    if (*fixed < 0 || *fixed >= loaded.generator.config().num_classes)
      throw UsageError("class " + std::to_string(*fixed) + " is outside the model's classes");
  }
  Rng rng = Rng::stream(static_cast<std::uint64_t>(cfg.integer("seed")), "generate", 0);
  GraphDataset d;
  d.name = cfg.str("name");
  d.num_node_labels = loaded.generator.config().num_labels;
  d.num_graph_classes = loaded.generator.config().num_classes;
  d.graphs = generate_graphs(loaded.generator, loaded.variant, static_cast<int>(count), rng,
                             threshold, loaded.class_prior, fixed);
  validate(d);
  write_text(cfg.path("out"), dataset_text(d));
  out << "generated " << d.graphs.size() << " graphs\n";
  return kOk;
}

// --- evaluate ---------------------------------------------------------------

int cmd_evaluate(const Config& cfg, std::ostream& out, std::ostream&) {
  auto gen = load(cfg, "generated");
  auto ref = load(cfg, "reference");
  if (gen.num_node_labels != ref.num_node_labels)
    throw DataError("label spaces differ: generated has " + std::to_string(gen.num_node_labels) +
                    " labels, reference " + std::to_string(ref.num_node_labels));
  MmdSigmas s;
  s.degree = cfg.real("sigma_degree");
  s.clustering = cfg.real("sigma_clustering");
  s.orbit = cfg.real("sigma_orbit");
  s.label = cfg.real("sigma_label");
  std::ostringstream os;
  write_report(os, evaluate(gen, ref, s));
  if (cfg.boolean("per_class")) write_report(os, per_class_stats(gen, ref, s));
  emit(cfg, "out", os.str(), out);
  return kOk;
}

// --- classify / diversity ----------------------------------------------------

KernelOptions kernel_options(const Config& cfg) {
  KernelOptions k;
  try {
    k.kind = parse_kernel_kind(cfg.str("kernel"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  k.wl_iterations = static_cast<int>(cfg.integer("wl_iterations"));
  k.sp_cap = static_cast<int>(cfg.integer("sp_cap"));
  k.graphlet_size = static_cast<int>(cfg.integer("graphlet_size"));
  if (k.graphlet_size != 3 && k.graphlet_size != 4) throw UsageError("graphlet_size must be 3 or 4");
  return k;
}

const std::map<std::string, std::string> kKernelDefaults = {
    {"kernel", "wl"}, {"wl_iterations", "3"}, {"sp_cap", "10"}, {"graphlet_size", "3"}};

int cmd_classify(const Config& cfg, std::ostream& out, std::ostream&) {
  auto train = load(cfg, "train");
  auto test = load(cfg, "test");
  SvmOptions svm;
  svm.C = cfg.real("svm_c");
  const auto k = kernel_options(cfg);
  const int trials = static_cast<int>(cfg.integer("trials"));
  const auto seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  auto s = downstream_trials(train, test, k, svm, trials, seed);
  std::ostringstream os;
  os << "# kernel train_source accuracy n_train n_test seed\n";
  for (int t = 0; t < trials; ++t)
    os << to_string(k.kind) << ' ' << train.name << ' ' << format_double(s.accuracies[t]) << ' '
       << train.graphs.size() << ' ' << test.graphs.size() << ' ' << seed << '/' << t << '\n';
  os << "mean_accuracy=" << format_double(s.mean) << '\n';
  os << "stddev=" << format_double(s.stddev) << '\n';
  emit(cfg, "out", os.str(), out);
  return kOk;
}

int cmd_diversity(const Config& cfg, std::ostream& out, std::ostream&) {
  auto gen = load(cfg, "generated");
  auto training = load(cfg, "training");
  const int bins = static_cast<int>(cfg.integer("bins"));
  if (bins < 1) throw UsageError("bins must be >= 1");
  auto r = diversity(gen, training, kernel_options(cfg), bins);
  std::ostringstream os;
  os << "# normalized " << cfg.str("kernel") << " kernel distance, range [0, sqrt(2)]\n";
  if (!r.training_min.empty()) os << "# training_median=" << format_double(median(r.training_min)) << '\n';
  os << "# generated_median=" << format_double(median(r.generated_min)) << '\n';
  os << "# bin_lo bin_hi training generated\n";
  const double w = (r.training_hist.hi - r.training_hist.lo) / bins;
  for (int b = 0; b < bins; ++b)
    os << format_double(b * w) << ' ' << format_double((b + 1) * w) << ' '
       << r.training_hist.counts[b] << ' ' << r.generated_hist.counts[b] << '\n';
  emit(cfg, "out", os.str(), out);
  return kOk;
}

// --- baseline ---------------------------------------------------------------

int cmd_baseline(const Config& cfg, std::ostream& out, std::ostream&) {
  const std::string action = cfg.str("action");
  const auto seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  if (action == "fit") {
    auto data = load(cfg, "data");
    const std::string model = cfg.str("model");
    std::ostringstream os;
    if (model == "er") {
      write_baseline(os, er_fit(data));
    } else if (model == "ba") {
      write_baseline(os, ba_fit(data));
    } else if (model == "mmsb") {
      MmsbFitOptions o;
      o.K = static_cast<int>(cfg.integer("mmsb_k"));
      o.iters = static_cast<int>(cfg.integer("mmsb_iters"));
      o.alpha = cfg.real("mmsb_alpha");
      Rng rng = Rng::stream(seed, "mmsb.fit", 0);
      write_baseline(os, mmsb_fit(data, o, rng));
    } else {
      throw UsageError("unknown baseline model '" + model + "' (er|ba|mmsb)");
    }
    write_text(cfg.path("params"), os.str());
    out << "fitted " << model << '\n';
    return kOk;
  }
  if (action == "sample") {
    std::ifstream in(cfg.path("params"));
    if (!in) throw DataError("cannot open " + cfg.str("params"));
    auto b = read_baseline(in);
    const long count = cfg.integer("count");
    if (count < 1) throw UsageError("count must be >= 1");
    Rng rng = Rng::stream(seed, "baseline.sample", 0);
    GraphDataset d;
    d.name = cfg.str("name");
    const LabelSpace& space = b.kind == AnyBaseline::Kind::Er   ? b.er.space
                              : b.kind == AnyBaseline::Kind::Ba ? b.ba.space
                                                                : b.mmsb.space;
    d.num_node_labels = space.num_node_labels;
    d.num_graph_classes = space.num_graph_classes;
    d.graphs = sample_many(static_cast<int>(count), rng, [&](Rng& r) { return b.sample(r); });
    write_text(cfg.path("out"), dataset_text(d));
    out << "sampled " << count << " graphs\n";
    return kOk;
  }
  throw UsageError("baseline action must be fit or sample, got '" + action + "'");
}

struct Command {
  std::string name;
  std::string help;
  std::map<std::string, std::string> defaults;
  std::function<int(const Config&, std::ostream&, std::ostream&)> fn;
};

std::vector<Command> commands() {
  auto with_kernel = [](std::map<std::string, std::string> m) {
    m.insert(kKernelDefaults.begin(), kKernelDefaults.end());
    return m;
  };
  return {
      {"prepare", "extract ego networks from a host graph",
       {{"host", ""}, {"hops", "2"}, {"min_n", "30"}, {"max_n", "50"}, {"count", "100"},
        {"out", ""}, {"name", "ego"}},
       cmd_prepare},
      {"train", "train a graph GAN", train_defaults(), cmd_train},
      {"generate", "sample graphs from a checkpoint",
       {{"checkpoint", ""}, {"count", "100"}, {"threshold", "0.5"}, {"class", ""}, {"out", ""},
        {"name", "generated"}},
       cmd_generate},
      {"evaluate", "MMD report between generated and reference graphs",
       {{"generated", ""}, {"reference", ""}, {"per_class", "false"}, {"out", ""},
        {"sigma_degree", "1"}, {"sigma_clustering", "0.1"}, {"sigma_orbit", "1"},
        {"sigma_label", "0.5"}},
       cmd_evaluate},
      {"classify", "kernel SVM: train on one set, test on another",
       with_kernel({{"train", ""}, {"test", ""}, {"trials", "10"}, {"svm_c", "1"}, {"out", ""}}),
       cmd_classify},
      {"diversity", "nearest-neighbour kernel distance histograms",
       with_kernel({{"generated", ""}, {"training", ""}, {"bins", "20"}, {"out", ""}}),
       cmd_diversity},
      {"baseline", "fit or sample E-R / B-A / MMSB baselines",
       {{"action", "fit"}, {"model", "er"}, {"data", ""}, {"params", ""}, {"count", "100"},
        {"out", ""}, {"name", "baseline"}, {"mmsb_k", "2"}, {"mmsb_iters", "500"},
        {"mmsb_alpha", "0.1"}},
       cmd_baseline},
  };
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lggan: labeled graph generation, evaluation and baselines"};
  app.require_subcommand(1);
  auto cmds = commands();
  struct Parsed {
    std::string config;
    std::string seed;
  };
  std::vector<Parsed> parsed(cmds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    auto* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    sub->add_option("--config", parsed[i].config, "key = value config file");
    sub->add_option("--seed", parsed[i].seed, "random seed");
    sub->allow_extras();
    sub->footer("Any config key may be overridden with --key value.");
    subs.push_back(sub);
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      auto defaults = cmds[i].defaults;
      defaults["seed"] = "0";
      Config cfg(defaults);
      if (!parsed[i].config.empty()) cfg.merge_file(parsed[i].config);
      auto extras = subs[i]->remaining();
      for (std::size_t k = 0; k < extras.size(); ++k) {
        std::string key = extras[k];
        if (key.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + key + "'");
        key = key.substr(2);
        std::string value;
        if (auto eq = key.find('='); eq != std::string::npos) {
          value = key.substr(eq + 1);
          key.resize(eq);
        } else {
          if (k + 1 >= extras.size()) throw UsageError("--" + key + " needs a value");
          value = extras[++k];
        }
        cfg.set(key, value);
      }
      if (!parsed[i].seed.empty()) cfg.set("seed", parsed[i].seed);
      err << "# lggan " << cmds[i].name << " resolved config\n";
      cfg.dump(err);
      return cmds[i].fn(cfg, out, err);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    } catch (const DivergenceError& e) {
      err << "error: " << e.what() << '\n';
      return kDivergence;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kData;
    }
  }
  return kUsage;
}

}  // namespace lggan::cli
