#pragma once

#include <cstdint>
#include <random>

namespace pafit {

/// splitmix64 finalizer. Used for every seed derivation in the project.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of replica `replica` (or trial, or any indexed sub-stream) derived from
/// `base_seed`:  mix64(mix64(base_seed) ^ (replica + 0x9E3779B97F4A7C15)).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t replica) noexcept;

/// Random stream owned by exactly one worker.
///
/// Engine is std::mt19937_64 (bit-exact by the standard). A "uniform" is one
/// engine output reduced to its top 53 bits; bits53() and uniform() each
/// consume exactly one engine output. poisson() delegates to
/// std::poisson_distribution and consumes an implementation-defined number of
/// outputs, so cross-toolchain reproducibility holds only for runs that never
/// draw a Poisson variate.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits53() { return engine_() >> 11; }

  /// Uniform on the open interval (0, 1): (bits53 + 1/2) / 2^53.
  double uniform() { return (static_cast<double>(bits53()) + 0.5) * 0x1.0p-53; }

  std::uint64_t poisson(double mean);

  bool operator==(const RandomStream&) const = default;

 private:
  std::mt19937_64 engine_;
};

}  // namespace pafit
