#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lggan/params.hpp"
#include "lggan/training.hpp"

namespace lggan {

// Text checkpoint:
//   lggan-checkpoint 1
//   meta <key> <value>
//   tensor <name> <rows> <cols>
//   <row-major values, one matrix row per line, 17 significant digits>
//   end
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  std::vector<std::pair<std::string, std::string>> meta;
  ParamSet tensors;

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  long get_long(const std::string& key) const;
  double get_double(const std::string& key) const;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_checkpoint(std::ostream& os, const Checkpoint& c);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint read_checkpoint(std::istream& is);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Shortest-exact decimal for a double (17 significant digits).
std::string format_double(double v);

// Full training state (weights, optimizer moments, counters, architecture).
Checkpoint make_checkpoint(const TrainConfig& config, const TrainState& state);
TrainState restore_state(const Checkpoint& c);

// Architecture + generator weights only; enough for sampling.
struct LoadedGenerator {
  Generator generator;
  Variant variant = Variant::Gan;
  std::vector<double> class_prior;
  long step = 0;
};
LoadedGenerator load_generator(const Checkpoint& c);

}  // namespace lggan
