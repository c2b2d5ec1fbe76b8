#pragma once

#include <cstdint>
#include <random>

namespace gridex {

// std::mt19937_64 output is fixed by the standard, the std distributions are
// not. All sampling goes through these helpers so that a seed reproduces the
// same episode on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [lo, hi] (inclusive), rejection sampled.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer over (base, stream); used for per-step seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace gridex
