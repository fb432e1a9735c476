#pragma once

#include <cstdint>
#include <limits>

namespace topspec {

/// 64-bit avalanche mix (splitmix64 finaliser).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from (seed, key); used for per-site and per-sample streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) noexcept {
  return mix64(mix64(seed) ^ mix64(key + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: the n-th output is a pure function of (key, n).
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return mix64(key_ ^ mix64(counter_++)); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Uniform on the open interval (0, 1); exact 0 is redrawn.
  double open_uniform() noexcept {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace topspec
