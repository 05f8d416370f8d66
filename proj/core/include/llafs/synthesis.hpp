#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "llafs/curriculum.hpp"
#include "llafs/geometry.hpp"
#include "llafs/random.hpp"

namespace llafs {

using Color = std::array<double, 3>;

inline constexpr double kDefaultNoiseSigma = 20.0;
inline constexpr int kMinLayoutSide = 64;
inline constexpr int kMaxSubregions = 5;
inline constexpr int kLayoutAttempts = 50;
inline constexpr int kMaxRejections = 10000;
inline constexpr int kPairAttempts = 8;
inline constexpr double kMinForegroundFraction = 0.02;
inline constexpr double kMaxForegroundFraction = 0.60;

double color_distance(const Color& a, const Color& b) noexcept;

struct NoiseSpec {
  Color mean{};
  double sigma = kDefaultNoiseSigma;

  void validate() const;
};

/// Interleaved 8-bit RGB raster, row-major.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint8_t at(int x, int y, int channel) const {
    return data_[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(channel)];
  }
  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// The similarity applied to a contour's control points: rotation and
/// scaling about `pivot`, then translation by (tx, ty).
struct Similarity {
  double rotation_deg = 0.0;
  double scale = 1.0;
  PointF pivot;
  double tx = 0.0;
  double ty = 0.0;

  PointF apply(const PointF& p) const noexcept;
};

/// Foreground contour plus a partition of the background into 1..5 disjoint
/// subregions that together cover every non-foreground pixel.
struct RegionLayout {
  BezierContour contour;
  Mask foreground;
  std::vector<Mask> background;
  /// Set on layouts derived by perturb_layout(); applied after the jitter.
  std::optional<Similarity> transform;
};

struct SupportMeans {
  Color foreground{};
  std::vector<Color> background;
};

struct QueryMeans {
  Color foreground{};
  std::vector<Color> background;
};

struct PerturbOptions {
  std::optional<double> scale;
  std::optional<double> rotation_deg;
  bool jitter = true;
};

struct GenerationOptions {
  double sigma = kDefaultNoiseSigma;
  std::size_t min_area = kDefaultMinArea;
  int contour_samples = 400;
};

struct PseudoPair {
  std::uint64_t seed = 0;
  StepParams step;
  int width = 0;
  int height = 0;
  RgbImage support_image;
  RgbImage query_image;
  Mask support_mask;
  Mask query_mask;
  std::vector<Polygon16> support_polygons;
  std::vector<Polygon16> query_polygons;
  SupportMeans support_means;
  QueryMeans query_means;
  double sigma = kDefaultNoiseSigma;
  std::vector<int> hinted_indices;
  RegionLayout support_layout;
  RegionLayout query_layout;
};

RegionLayout make_support_layout(Rng& rng, int width, int height, int contour_samples = 400);

SupportMeans sample_support_means(Rng& rng, double a, double b, std::size_t count);

RgbImage fill_regions(const RegionLayout& layout, const NoiseSpec& fg,
                      std::span<const NoiseSpec> bg, Rng& rng);

RegionLayout perturb_layout(const RegionLayout& support, Rng& rng, int width, int height,
                            const PerturbOptions& options = {});

QueryMeans sample_query_means(Rng& rng, const Color& m_sf, double a, double b, double c,
                              double d, std::size_t count);

/// Deterministic in (seed, step, width, height, options). Attempt r draws from
/// split_seed(seed, r); layout and constraint failures move on to the next of
/// the 8 attempts.
PseudoPair generate_pair(std::uint64_t seed, const StepParams& step, int width, int height,
                         const GenerationOptions& options = {});

}  // namespace llafs
