#include "llafs/curriculum.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>

#include "llafs/error.hpp"
#include "llafs/geometry.hpp"

namespace llafs {

void ScheduleConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kParameter, what); };
  if (!(a0 >= 0.0 && a0 <= b0 && b0 <= kMaxRgbDistance)) {
    fail("schedule requires 0 <= a0 <= b0 <= 441.68");
  }
  if (!(c_np >= 0.0 && c_np <= d_np && d_np <= kMaxRgbDistance)) {
    fail("schedule requires 0 <= c_np <= d_np <= 441.68");
  }
  if (np <= 0 || np % 60 != 0) {
    fail("schedule requires Np > 0 and divisible by 60, got " + std::to_string(np));
  }
}

DistanceBounds image_schedule(std::int64_t n, const ScheduleConfig& cfg) {
  cfg.validate();
  if (n < 0 || n > cfg.np) {
    throw Error(ErrorCode::kParameter, "image_schedule: step " + std::to_string(n) +
                                           " outside [0, " + std::to_string(cfg.np) + "]");
  }
  const double nd = static_cast<double>(n);
  const double np = static_cast<double>(cfg.np);
  DistanceBounds out;
  out.a = cfg.a0 - nd * cfg.a0 / np;
  out.b = out.a + cfg.b0 - cfg.a0;
  out.c = nd * cfg.c_np / np;
  out.d = out.c + cfg.d_np - cfg.c_np;
  return out;
}

int mask_schedule(std::int64_t n, const ScheduleConfig& cfg) {
  cfg.validate();
  if (n < 0 || n >= cfg.np) {
    throw Error(ErrorCode::kParameter, "mask_schedule: step " + std::to_string(n) +
                                           " outside [0, " + std::to_string(cfg.np) + ")");
  }
  if (n >= cfg.np / 2) return 0;
  const std::int64_t period = cfg.np / 30;
  return static_cast<int>(std::max<std::int64_t>(0, kMaxHints - n / period));
}

StepParams step_params(std::int64_t n, const ScheduleConfig& cfg) {
  const int m = mask_schedule(n, cfg);
  const DistanceBounds bounds = image_schedule(n, cfg);
  return {n, bounds.a, bounds.b, bounds.c, bounds.d, m};
}

std::vector<int> sample_hint_indices(Rng& rng, int m) {
  if (m < 0 || m > kMaxHints) {
    throw Error(ErrorCode::kParameter, "hint count must be in [0, 15], got " + std::to_string(m));
  }
  // Partial Fisher-Yates over the 16 vertex indices.
  std::array<int, kPolygonVertices> idx{};
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < m; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i, kPolygonVertices - 1));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  std::vector<int> out(idx.begin(), idx.begin() + m);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace llafs
