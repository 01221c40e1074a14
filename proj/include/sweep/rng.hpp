#pragma once

#include <cstdint>
#include <random>

namespace sweep {

/// SplitMix64 finalizer; a bijective avalanche on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for replicate `index` of a batch. Depends only on (seed_base, index),
/// never on scheduling.
std::uint64_t replicate_seed(std::uint64_t seed_base, std::uint64_t index);

/// Derives an independent stream seed from a parent seed and a stream tag.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe under log().
  double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  /// Exponential waiting time with the given total rate (> 0).
  double exponential(double rate);

  /// Uniform integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sweep
