#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lggan/autodiff.hpp"
#include "lggan/rng.hpp"

namespace lggan {

// Ordered collection of named dense tensors (model weights, optimizer moments).
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> values;

  std::size_t size() const { return values.size(); }

  std::size_t add(std::string name, Eigen::MatrixXd value) {
    names.push_back(std::move(name));
    values.push_back(std::move(value));
    return values.size() - 1;
  }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw std::out_of_range("no tensor named '" + name + "'");
  }

  const Eigen::MatrixXd& operator[](const std::string& name) const { return values[index_of(name)]; }
  Eigen::MatrixXd& operator[](const std::string& name) { return values[index_of(name)]; }

  bool all_finite() const {
    for (const auto& v : values)
      if (!v.allFinite()) return false;
    return true;
  }

  // Registers every tensor as a tape leaf.
  std::vector<ad::Var> bind(ad::Tape& tape, bool trainable) const {
    std::vector<ad::Var> vars;
    vars.reserve(values.size());
    for (const auto& v : values) vars.push_back(tape.leaf(v, trainable));
    return vars;
  }

  ParamSet zeros_like() const {
    ParamSet z;
    for (std::size_t i = 0; i < size(); ++i)
      z.add(names[i], Eigen::MatrixXd::Zero(values[i].rows(), values[i].cols()));
    return z;
  }

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    if (a.names != b.names || a.values.size() != b.values.size()) return false;
    for (std::size_t i = 0; i < a.values.size(); ++i)
      if (a.values[i].rows() != b.values[i].rows() || a.values[i].cols() != b.values[i].cols() ||
          a.values[i] != b.values[i])
        return false;
    return true;
  }
};

// Glorot-uniform initialisation.
inline Eigen::MatrixXd glorot(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Eigen::MatrixXd w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
  return w;
}

}  // namespace lggan
