#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace zv {

/// Seedable generator used everywhere in the library. Independent streams for
/// replications are obtained with `Rng::for_stream(base, index)`.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  static Rng for_stream(std::uint64_t base_seed, std::uint64_t index) {
    return Rng(base_seed + index);
  }

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }

  /// Uniform on (0, 1); safe for log().
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  double normal() { return normal_(engine_); }

  /// Exponential with unit rate.
  double exponential() { return -std::log(uniform_open()); }

  engine_type& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace zv
