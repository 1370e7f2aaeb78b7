#pragma once

#include <array>
#include <cstdint>

namespace isolab {

/// SplitMix64 finalizer; used for seeding and for deriving sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic sub-seed for chunk `index` of a stream seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Stable 64-bit FNV-1a hash of a string, for seeding named jobs.
std::uint64_t stable_hash(const char* text);

/// xoshiro256** (Blackman & Vigna, 2018), seeded by expanding a 64-bit seed
/// through SplitMix64. All derived variates are computed from the raw
/// 64-bit stream with fixed algorithms, so a seed produces the same
/// sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Uniform on (-1, 1).
  double symmetric_uniform() { return 2.0 * uniform_open() - 1.0; }
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Exp(1) by inversion.
  double exponential();
  /// Gamma(shape, 1): Marsaglia-Tsang for shape >= 1; for shape < 1 a
  /// Gamma(shape + 1) draw times U^{1/shape}.
  double gamma(double shape);
  /// +1 or -1 with equal probability.
  double sign() { return (next() >> 63) != 0 ? -1.0 : 1.0; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace isolab
