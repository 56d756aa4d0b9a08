#pragma once

#include <array>
#include <cstdint>

namespace fluxlattice {

/// SplitMix64, used only to expand a 64-bit seed into xoshiro state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

/// xoshiro256++ (Blackman & Vigna), seeded through SplitMix64. Portable and
/// bit-reproducible across platforms, unlike the std distributions.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform in [-amplitude, amplitude).
  double symmetric(double amplitude);
  /// Uniform integer in [0, bound] (inclusive), bound < 2^32.
  std::uint64_t below_or_equal(std::uint64_t bound);

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace fluxlattice
