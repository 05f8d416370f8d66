#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace llafs {

inline constexpr int kPolygonVertices = 16;
inline constexpr double kRayAngleStepDeg = 360.0 / kPolygonVertices;  // 22.5
inline constexpr int kBezierControlPoints = 10;
inline constexpr int kMinBezierSamples = 32;
inline constexpr double kRayStep = 0.25;
inline constexpr int kDefaultMinArea = 16;

/// Continuous image-plane point. Pixel (x, y) covers [x, x+1) x [y, y+1);
/// y grows downward.
struct PointF {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PointF&, const PointF&) = default;
};

/// Integer pixel coordinate as emitted in polygons and coordinate tokens.
struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

using Polyline = std::vector<PointF>;

struct BezierContour {
  std::vector<PointF> control_points;
  int sample_count = 400;
};

/// Binary raster, row-major, one byte per pixel holding 0 or 1.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }

  std::uint8_t at(int x, int y) const { return bits_[index(x, y)]; }
  void set(int x, int y, std::uint8_t value = 1) { bits_[index(x, y)] = value ? 1 : 0; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }

  std::size_t count() const noexcept;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Sixteen vertices in clockwise screen order; vertex k sits on the ray at
/// k * 22.5 degrees measured clockwise from +x.
struct Polygon16 {
  std::array<Pixel, kPolygonVertices> vertices{};

  friend bool operator==(const Polygon16&, const Polygon16&) = default;
};

/// A polar ground-truth polygon together with the ray origin it was cast from.
struct PolarPolygon {
  Polygon16 polygon;
  PointF origin;
  std::size_t area = 0;
};

/// One 4-connected foreground component. Pixels are row-major indices in
/// ascending order, so pixels.front() is the component's top-left pixel.
struct Component {
  std::vector<std::size_t> pixels;
};

/// Samples the closed periodic cubic Bezier spline through the 10 control
/// points. Each consecutive control pair spans one cubic segment whose inner
/// handles come from Catmull-Rom tangents, so the curve is C1 and closed.
/// The result has contour.sample_count points and front() == back().
Polyline sample_bezier_contour(const BezierContour& contour);

/// Even-odd scanline fill; a pixel is set iff its center lies inside.
/// The polyline must be closed (front() == back()).
Mask rasterize(std::span<const PointF> polyline, int width, int height);

/// Mean of foreground pixel centers.
PointF mask_centroid(const Mask& mask);

/// 4-connected components with area >= min_area, ordered by descending area
/// and then by top-left pixel (row-major).
std::vector<Component> connected_components(const Mask& mask, std::size_t min_area);

/// Each component from connected_components() as its own mask.
std::vector<Mask> component_masks(const Mask& mask, std::size_t min_area);

std::vector<PolarPolygon> extract_polar_polygons(const Mask& mask,
                                                 std::size_t min_area = kDefaultMinArea);

/// Polar 16-ray ground truth for every component of the mask. See
/// extract_polar_polygons() for the ray origins.
std::vector<Polygon16> extract_polygon_gt(const Mask& mask,
                                          std::size_t min_area = kDefaultMinArea);

/// Vertex list of the polygon as a closed polyline (first vertex repeated).
Polyline polygon_outline(const Polygon16& polygon);

Mask polygon_to_mask(const Polygon16& polygon, int width, int height);

/// |a & b| / |a | b|, 1.0 when both are empty.
double mask_iou(const Mask& a, const Mask& b);

}  // namespace llafs
