#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace llafs {

namespace detail {
inline constexpr int kZigguratLayers = 128;
struct Ziggurat {
  double x[kZigguratLayers + 1];
  double ratio[kZigguratLayers];
};
extern const Ziggurat kZiggurat;
}  // namespace detail

/// Derives an independent 64-bit stream seed from a parent seed and an index
/// (SplitMix64 finalizer over parent ^ golden-ratio-scaled index). Used for
/// per-pair streams and for retry sub-seeds so results never depend on
/// generation order or thread count.
std::uint64_t split_seed(std::uint64_t parent, std::uint64_t index) noexcept;

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256ss {
 public:
  using result_type = std::uint64_t;

  /// State filled from four consecutive SplitMix64 outputs.
  explicit Xoshiro256ss(std::uint64_t seed) noexcept;
  explicit Xoshiro256ss(const std::array<std::uint64_t, 4>& state) noexcept : s_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t out = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return out;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_;
};

/// Seeded random stream with platform-independent distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi] (inclusive), unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Normal(mean, sigma) via a 128-layer ziggurat.
  double normal(double mean = 0.0, double sigma = 1.0) {
    const std::uint64_t draw = engine_();
    const double u = 2.0 * (static_cast<double>(draw >> 11) * 0x1.0p-53) - 1.0;
    const auto i = static_cast<int>(draw & (detail::kZigguratLayers - 1));
    if (std::abs(u) < detail::kZiggurat.ratio[i]) return mean + sigma * u * detail::kZiggurat.x[i];
    return normal_slow(u, i, mean, sigma);
  }

 private:
  double normal_slow(double u, int i, double mean, double sigma);

  Xoshiro256ss engine_;
};

}  // namespace llafs
