#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

namespace lggan {

// One PRNG family for the whole toolkit: std::mt19937_64 seeded through a
// splitmix64 mix of (seed, FNV-1a(purpose label), index). Streams with
// different labels or indices are independent and reproducible.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed = 0) : engine_(mix(seed)) {}

  static Rng stream(std::uint64_t seed, std::string_view purpose,
                    std::uint64_t index = 0) {
    std::uint64_t s = mix(seed ^ mix(fnv1a(purpose)));
    s = mix(s ^ mix(index + 0x632be59bd9b4e019ULL));
    return Rng(s, RawTag{});
  }

  Rng split(std::string_view purpose, std::uint64_t index = 0) {
    return stream(engine_(), purpose, index);
  }

  Engine& engine() { return engine_; }
  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  // (0, 1], safe to take the log of.
  double uniform_open() { return 1.0 - uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n).
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }

  // Draws an index with probability proportional to weights (all >= 0, sum > 0).
  int categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc && weights[i] > 0.0) return static_cast<int>(i);
    }
    for (std::size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0.0) return static_cast<int>(i);
    return 0;
  }

  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = std::uniform_int_distribution<int>(0, i)(engine_);
      std::swap(p[i], p[j]);
    }
    return p;
  }

  // Gammas drawn in log space (Gamma(a) = Gamma(a + 1) * U^(1/a)) so tiny
  // concentrations don't underflow to all zeros.
  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> out(alpha.size());
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      out[k] = std::log(gamma(alpha[k] + 1.0)) + std::log(uniform_open()) / alpha[k];
      hi = std::max(hi, out[k]);
    }
    double total = 0.0;
    for (double& v : out) total += (v = std::exp(v - hi));
    for (double& v : out) v /= total;
    return out;
  }

 private:
  struct RawTag {};
  Rng(std::uint64_t state, RawTag) : engine_(state) {}

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  Engine engine_;
};

}  // namespace lggan
