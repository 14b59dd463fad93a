#pragma once

#include <cmath>
#include <vector>

#include "lggan/params.hpp"

namespace lggan {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

// Adaptive-moment optimizer over a ParamSet. Moments are kept as ParamSets so
// they serialize alongside the weights.
class Adam {
 public:
  Adam() = default;
  Adam(const ParamSet& params, AdamConfig config)
      : config_(config), first_(params.zeros_like()), second_(params.zeros_like()) {}

  void step(ParamSet& params, const std::vector<Eigen::MatrixXd>& grads) {
    ++steps_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& m = first_.values[i];
      auto& v = second_.values[i];
      m = config_.beta1 * m + (1.0 - config_.beta1) * grads[i];
      v = config_.beta2 * v + (1.0 - config_.beta2) * grads[i].cwiseAbs2();
      params.values[i].array() -=
          config_.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + config_.epsilon);
    }
  }

  const AdamConfig& config() const { return config_; }
  long steps() const { return steps_; }
  const ParamSet& first_moment() const { return first_; }
  const ParamSet& second_moment() const { return second_; }

  void restore(ParamSet first, ParamSet second, long steps) {
    first_ = std::move(first);
    second_ = std::move(second);
    steps_ = steps;
  }

 private:
  AdamConfig config_;
  ParamSet first_;
  ParamSet second_;
  long steps_ = 0;
};

}  // namespace lggan
