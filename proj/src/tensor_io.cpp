#include "lggan/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lggan/dataset_io.hpp"

namespace lggan {

void Checkpoint::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of(" \t\n") != std::string::npos)
    throw std::invalid_argument("bad checkpoint key '" + key + "'");
  for (auto& [k, v] : meta)
    if (k == key) {
      v = value;
      return;
    }
  meta.emplace_back(key, value);
}

bool Checkpoint::has(const std::string& key) const {
  for (const auto& kv : meta)
    if (kv.first == key) return true;
  return false;
}

const std::string& Checkpoint::get(const std::string& key) const {
  for (const auto& kv : meta)
    if (kv.first == key) return kv.second;
  throw CheckpointError("checkpoint is missing '" + key + "'");
}

long Checkpoint::get_long(const std::string& key) const {
  const std::string& s = get(key);
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw CheckpointError("'" + key + "' is not an integer");
  return v;
}

double Checkpoint::get_double(const std::string& key) const {
  const std::string& s = get(key);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw CheckpointError("'" + key + "' is not a number");
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_checkpoint(std::ostream& os, const Checkpoint& c) {
  os << "lggan-checkpoint " << Checkpoint::kFormatVersion << '\n';
  for (const auto& [k, v] : c.meta) os << "meta " << k << ' ' << v << '\n';
  for (std::size_t i = 0; i < c.tensors.size(); ++i) {
    const auto& m = c.tensors.values[i];
    os << "tensor " << c.tensors.names[i] << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) {
        if (k) os << ' ';
        os << format_double(m(r, k));
      }
      os << '\n';
    }
  }
  os << "end\n";
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  std::ostringstream ss;
  write_checkpoint(ss, c);
  write_file_atomic(path, ss.str());
}

Checkpoint read_checkpoint(std::istream& is) {
  Checkpoint c;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) -> void { throw ParseError(lineno, what); };

  if (!std::getline(is, line)) throw ParseError(1, "empty checkpoint");
  ++lineno;
  {
    std::istringstream hs(line);
    std::string magic;
    int version = 0;
    if (!(hs >> magic >> version) || magic != "lggan-checkpoint") fail("not a checkpoint file");
    if (version != Checkpoint::kFormatVersion)
      fail("unsupported checkpoint version " + std::to_string(version));
  }
  bool ended = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "end") {
      ended = true;
      break;
    }
    if (kind == "meta") {
      std::string key, value;
      if (!(ls >> key)) fail("meta without key");
      std::getline(ls >> std::ws, value);
      c.meta.emplace_back(key, value);
    } else if (kind == "tensor") {
      std::string name;
      long rows = -1, cols = -1;
      if (!(ls >> name >> rows >> cols) || rows < 0 || cols < 0) fail("malformed tensor header");
      Eigen::MatrixXd m(rows, cols);
      for (long r = 0; r < rows; ++r) {
        if (!std::getline(is, line)) fail("truncated tensor '" + name + "'");
        ++lineno;
        const char* p = line.c_str();
        for (long k = 0; k < cols; ++k) {
          char* end = nullptr;
          double v = std::strtod(p, &end);
          if (end == p) fail("tensor '" + name + "' row has too few values");
          m(r, k) = v;
          p = end;
        }
        while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
        if (*p != '\0') fail("tensor '" + name + "' row has too many values");
      }
      c.tensors.add(name, std::move(m));
    } else {
      fail("unknown record '" + kind + "'");
    }
  }
  if (!ended) fail("missing 'end'");
  return c;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in);
}

// --- training state ---------------------------------------------------------

namespace {

std::string join_ints(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
  return s;
}

template <typename T, typename F>
std::vector<T> split_list(const std::string& s, F parse) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse(item));
  return out;
}

void put_adam(Checkpoint& c, const std::string& prefix, const Adam& opt) {
  const auto& cfg = opt.config();
  c.set(prefix + ".lr", format_double(cfg.learning_rate));
  c.set(prefix + ".beta1", format_double(cfg.beta1));
  c.set(prefix + ".beta2", format_double(cfg.beta2));
  c.set(prefix + ".epsilon", format_double(cfg.epsilon));
  c.set(prefix + ".steps", std::to_string(opt.steps()));
}

void put_tensors(Checkpoint& c, const std::string& prefix, const ParamSet& ps) {
  for (std::size_t i = 0; i < ps.size(); ++i) c.tensors.add(prefix + ps.names[i], ps.values[i]);
}

ParamSet take_tensors(const Checkpoint& c, const std::string& prefix, const ParamSet& like) {
  ParamSet out;
  for (const auto& name : like.names) {
    std::size_t idx;
    try {
      idx = c.tensors.index_of(prefix + name);
    } catch (const std::out_of_range&) {
      throw CheckpointError("checkpoint is missing tensor '" + prefix + name + "'");
    }
    out.add(name, c.tensors.values[idx]);
  }
  return out;
}

// Tensors whose name starts with `prefix`, names kept.
ParamSet prefixed(const Checkpoint& c, const std::string& prefix) {
  ParamSet out;
  for (std::size_t i = 0; i < c.tensors.size(); ++i)
    if (c.tensors.names[i].rfind(prefix, 0) == 0)
      out.add(c.tensors.names[i], c.tensors.values[i]);
  return out;
}

Adam take_adam(const Checkpoint& c, const std::string& prefix, const ParamSet& params) {
  AdamConfig cfg;
  cfg.learning_rate = c.get_double(prefix + ".lr");
  cfg.beta1 = c.get_double(prefix + ".beta1");
  cfg.beta2 = c.get_double(prefix + ".beta2");
  cfg.epsilon = c.get_double(prefix + ".epsilon");
  Adam opt(params, cfg);
  opt.restore(take_tensors(c, prefix + ".m/", params), take_tensors(c, prefix + ".v/", params),
              c.get_long(prefix + ".steps"));
  return opt;
}

GeneratorConfig generator_config(const Checkpoint& c) {
  GeneratorConfig g;
  g.latent_dim = static_cast<int>(c.get_long("latent_dim"));
  g.num_classes = static_cast<int>(c.get_long("num_classes"));
  g.conditional = c.get("variant") != "gan";
  g.hidden = split_list<int>(c.get("gen_hidden"), [](const std::string& s) { return std::stoi(s); });
  g.max_nodes = static_cast<int>(c.get_long("max_nodes"));
  g.num_labels = static_cast<int>(c.get_long("num_labels"));
  return g;
}

std::vector<double> prior_of(const Checkpoint& c) {
  return split_list<double>(c.get("class_prior"),
                            [](const std::string& s) { return std::strtod(s.c_str(), nullptr); });
}

}  // namespace

Checkpoint make_checkpoint(const TrainConfig& config, const TrainState& s) {
  Checkpoint c;
  const auto& gc = s.generator.config();
  const auto& dc = s.discriminator.config();
  c.set("variant", to_string(config.variant));
  c.set("objective", to_string(config.objective));
  c.set("step", std::to_string(s.step));
  c.set("epoch", std::to_string(s.epoch));
  c.set("cursor", std::to_string(s.cursor));
  c.set("seed", std::to_string(config.seed));
  c.set("latent_dim", std::to_string(gc.latent_dim));
  c.set("num_classes", std::to_string(gc.num_classes));
  c.set("num_labels", std::to_string(gc.num_labels));
  c.set("max_nodes", std::to_string(gc.max_nodes));
  c.set("gen_hidden", join_ints(gc.hidden));
  c.set("disc_layers", std::to_string(dc.layers));
  c.set("disc_width", std::to_string(dc.width));
  c.set("aggregation", to_string(dc.aggregation));
  c.set("residual", dc.residual ? "1" : "0");
  c.set("class_prior", join_doubles(s.class_prior));
  put_adam(c, "gen_adam", s.gen_opt);
  put_adam(c, "disc_adam", s.disc_opt);
  put_tensors(c, "", s.generator.params());
  put_tensors(c, "", s.discriminator.params());
  put_tensors(c, "gen_adam.m/", s.gen_opt.first_moment());
  put_tensors(c, "gen_adam.v/", s.gen_opt.second_moment());
  put_tensors(c, "disc_adam.m/", s.disc_opt.first_moment());
  put_tensors(c, "disc_adam.v/", s.disc_opt.second_moment());
  return c;
}

LoadedGenerator load_generator(const Checkpoint& c) {
  LoadedGenerator out;
  try {
    out.variant = parse_variant(c.get("variant"));
    GeneratorConfig gc = generator_config(c);
    out.generator = Generator(gc, prefixed(c, "gen."));
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint does not match the generator: ") + e.what());
  }
  out.class_prior = prior_of(c);
  out.step = c.get_long("step");
  return out;
}

TrainState restore_state(const Checkpoint& c) {
  TrainState s;
  try {
    LoadedGenerator lg = load_generator(c);
    s.generator = std::move(lg.generator);
    s.class_prior = std::move(lg.class_prior);
    DiscriminatorConfig dc;
    dc.max_nodes = s.generator.config().max_nodes;
    dc.num_labels = s.generator.config().num_labels;
    dc.num_classes = s.generator.config().num_classes;
    dc.layers = static_cast<int>(c.get_long("disc_layers"));
    dc.width = static_cast<int>(c.get_long("disc_width"));
    dc.aggregation = parse_aggregation(c.get("aggregation"));
    dc.residual = c.get("residual") == "1";
    dc.conditional = c.get("variant") == "cgan";
    s.discriminator = Discriminator(dc, prefixed(c, "disc."));
    s.gen_opt = take_adam(c, "gen_adam", s.generator.params());
    s.disc_opt = take_adam(c, "disc_adam", s.discriminator.params());
    s.step = c.get_long("step");
    s.epoch = c.get_long("epoch");
    s.cursor = c.get_long("cursor");
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("inconsistent checkpoint: ") + e.what());
  }
  return s;
}

}  // namespace lggan
