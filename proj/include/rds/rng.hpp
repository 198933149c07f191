#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rds {

// SplitMix64 output finalizer (Stafford's mix13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-mode generator keyed by (master_seed, stream). Output number i is
/// mix64(key + i * gamma), i.e. SplitMix64 evaluated at an arbitrary position,
/// so any draw can be produced without touching the ones before it.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  constexpr CounterRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(mix64(mix64(master_seed ^ 0x6A09E667F3BCC909ULL) + stream * 0xD1B54A32D192ED03ULL)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const { return mix64(key_ + counter * kGamma); }

  // Rademacher sign: the most significant output bit selects +1.
  constexpr int sign(std::uint64_t counter) const { return (bits(counter) >> 63) ? 1 : -1; }

  // Uniform on (0, 1) from the top 53 bits.
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller on counters 2c and 2c+1.
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace rds
