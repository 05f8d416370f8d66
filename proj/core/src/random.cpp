#include "llafs/random.hpp"

#include <cmath>

#include "llafs/error.hpp"

namespace llafs {

std::uint64_t split_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  std::uint64_t z = parent ^ (0x9E3779B97F4A7C15ULL * (index + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Xoshiro256ss::Xoshiro256ss(std::uint64_t seed) noexcept {
  for (auto& word : s_) {
    seed += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = seed;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    word = z ^ (z >> 31);
  }
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw Error(ErrorCode::kParameter, "uniform_int: empty range");
  const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
  if (range == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit span
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return lo + static_cast<std::int64_t>(draw % range);
}

// Ziggurat tables, 128 layers (Marsaglia & Tsang 2000; Doornik 2005 layout).
namespace {

constexpr int kLayers = detail::kZigguratLayers;
constexpr double kTailStart = 3.442619855899;
constexpr double kLayerArea = 9.91256303526217e-3;

detail::Ziggurat make_tables() {
  detail::Ziggurat t{};
  double f = std::exp(-0.5 * kTailStart * kTailStart);
  t.x[0] = kLayerArea / f;
  t.x[1] = kTailStart;
  t.x[kLayers] = 0.0;
  for (int i = 2; i < kLayers; ++i) {
    t.x[i] = std::sqrt(-2.0 * std::log(kLayerArea / t.x[i - 1] + f));
    f = std::exp(-0.5 * t.x[i] * t.x[i]);
  }
  for (int i = 0; i < kLayers; ++i) t.ratio[i] = t.x[i + 1] / t.x[i];
  return t;
}

}  // namespace

const detail::Ziggurat detail::kZiggurat = make_tables();

double Rng::normal_slow(double u, int i, double mean, double sigma) {
  const detail::Ziggurat& t = detail::kZiggurat;
  while (true) {
    if (i == 0) {
      double z;
      double y;
      do {
        z = std::log(1.0 - uniform01()) / kTailStart;
        y = std::log(1.0 - uniform01());
      } while (-2.0 * y < z * z);
      return mean + sigma * (u < 0.0 ? z - kTailStart : kTailStart - z);
    }
    const double z = u * t.x[i];
    const double f0 = std::exp(-0.5 * (t.x[i] * t.x[i] - z * z));
    const double f1 = std::exp(-0.5 * (t.x[i + 1] * t.x[i + 1] - z * z));
    if (f1 + uniform01() * (f0 - f1) < 1.0) return mean + sigma * z;

    const std::uint64_t draw = engine_();
    u = 2.0 * (static_cast<double>(draw >> 11) * 0x1.0p-53) - 1.0;
    i = static_cast<int>(draw & (kLayers - 1));
    if (std::abs(u) < t.ratio[i]) return mean + sigma * u * t.x[i];
  }
}

}  // namespace llafs
