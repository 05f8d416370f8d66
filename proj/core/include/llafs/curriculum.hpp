#pragma once

#include <cstdint>
#include <vector>

#include "llafs/random.hpp"

namespace llafs {

/// Largest Euclidean distance between two points of the RGB cube, rounded up
/// to two decimals (sqrt(3) * 255 = 441.673...).
inline constexpr double kMaxRgbDistance = 441.68;

inline constexpr int kMaxHints = 15;

/// Hyper-parameters of the two curricula. Defaults are the published ones.
struct ScheduleConfig {
  double a0 = 100.0;   ///< initial lower fg/bg mean distance
  double b0 = 150.0;   ///< initial upper fg/bg mean distance
  double c_np = 50.0;  ///< final lower support/query fg distance
  double d_np = 100.0; ///< final upper support/query fg distance
  std::int64_t np = 60000;  ///< pretraining steps; divisible by 60

  /// Throws ErrorCode::kParameter when an invariant does not hold.
  void validate() const;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct DistanceBounds {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  friend bool operator==(const DistanceBounds&, const DistanceBounds&) = default;
};

struct StepParams {
  std::int64_t n = 0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  int m = 0;  ///< hinted polygon vertices

  friend bool operator==(const StepParams&, const StepParams&) = default;
};

/// Linear image-difficulty schedule, valid for 0 <= n <= Np.
DistanceBounds image_schedule(std::int64_t n, const ScheduleConfig& cfg);

/// Hint count: 15 - floor(n / (Np/30)) during the first half, 0 afterwards.
/// Valid for 0 <= n < Np.
int mask_schedule(std::int64_t n, const ScheduleConfig& cfg);

StepParams step_params(std::int64_t n, const ScheduleConfig& cfg);

/// Uniform sample of m distinct vertex indices in [0,16), returned sorted.
std::vector<int> sample_hint_indices(Rng& rng, int m);

}  // namespace llafs
