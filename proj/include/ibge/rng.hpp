#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ibge {

/// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for substream `stream` of `seed`. Nested derivations (e.g. chain,
/// then draw) compose by repeated application.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Explicitly seeded generator. Identical seeds give identical streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Gamma with shape k and unit scale.
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  int poisson(double rate) { return std::poisson_distribution<int>(rate)(engine_); }
  /// Uniform integer in [0, n).
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  std::vector<int> permutation(int n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ibge
