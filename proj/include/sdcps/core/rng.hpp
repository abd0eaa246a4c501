#pragma once

#include <cstdint>

namespace sdcps {

/// SplitMix64 (Steele, Lea, Flood 2014). State advances by the golden-ratio
/// increment 0x9E3779B97F4A7C15 and the output is finalized with the
/// Stafford variant-13 mixer (shifts 30/27/31, multipliers 0xBF58476D1CE4E5B9
/// and 0x94D049BB133111EB). `split` derives an independent stream by mixing
/// a stream id into the current state, so sub-components never share draws.
///
/// The distributions below are implemented here rather than taken from
/// <random> because the standard distributions are not bit-identical across
/// library implementations, and traces must replay exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t uniform_int(std::uint64_t bound);

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_range(std::int64_t lo, std::int64_t hi);

  /// Uniform double in [0, 1) with 53 bits of mantissa.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();

  bool bernoulli(double p) { return uniform01() < p; }

  Rng split(std::uint64_t stream_id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace sdcps
