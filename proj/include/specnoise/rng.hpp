#pragma once

// Project PRNG. std::mt19937_64 has a standard-mandated output sequence;
// the variate transforms below are written out so samples do not depend on
// the standard library's distribution implementations.

#include <cstdint>
#include <random>

namespace specnoise {

/// SplitMix64 finalizer, used to decorrelate nearby seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed of replicate `index` in a run with base seed `base`.
constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) { return base ^ index; }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  /// Laplace(0, b): density exp(-|x|/b) / (2b).
  double laplace(double b);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace specnoise
