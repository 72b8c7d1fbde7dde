#pragma once

#include <cstdint>
#include <limits>

namespace b92 {

/// Portable 64-bit pseudo random stream.
///
/// The generator is xorshift64* (Marsaglia shift register with shifts 12/25/27,
/// output multiplied by 0x2545F4914F6CDD1D). The internal state is derived from
/// the user seed through one SplitMix64 step so that every 64-bit seed,
/// including zero, yields a valid non-zero state. Given the same seed the
/// stream is identical on every platform.
///
/// Satisfies UniformRandomBitGenerator, so it can drive <random> distributions.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) noexcept : state_(splitmix64(seed)) {
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
  }

  static constexpr result_type min() noexcept { return 1; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  /// Uniform double in [0, 1) built from the top 53 bits of one draw.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  static constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace b92
