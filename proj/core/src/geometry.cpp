#include "llafs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "llafs/error.hpp"

namespace llafs {

Mask::Mask(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kShape, "mask dimensions must be positive, got " +
                                       std::to_string(width) + "x" + std::to_string(height));
  }
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

PointF lerp(const PointF& a, const PointF& b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

// de Casteljau evaluation.
PointF lerp_bezier(const PointF& p0, const PointF& p1, const PointF& p2, const PointF& p3,
                   double t) {
  const PointF q0 = lerp(p0, p1, t);
  const PointF q1 = lerp(p1, p2, t);
  const PointF q2 = lerp(p2, p3, t);
  return lerp(lerp(q0, q1, t), lerp(q1, q2, t), t);
}

}  // namespace

Polyline sample_bezier_contour(const BezierContour& contour) {
  const auto& c = contour.control_points;
  if (c.size() != static_cast<std::size_t>(kBezierControlPoints)) {
    throw Error(ErrorCode::kInvalidContour,
                "expected 10 control points, got " + std::to_string(c.size()));
  }
  if (contour.sample_count < kMinBezierSamples) {
    throw Error(ErrorCode::kInvalidContour,
                "sample_count must be >= 32, got " + std::to_string(contour.sample_count));
  }
  constexpr int n = kBezierControlPoints;
  auto at = [&](int i) -> const PointF& { return c[static_cast<std::size_t>((i % n + n) % n)]; };

  struct Segment {
    PointF p0, p1, p2, p3;
  };
  std::array<Segment, kBezierControlPoints> segments;
  for (int i = 0; i < n; ++i) {
    const PointF& prev = at(i - 1);
    const PointF& start = at(i);
    const PointF& end = at(i + 1);
    const PointF& next = at(i + 2);
    segments[static_cast<std::size_t>(i)] = {
        start,
        {start.x + (end.x - prev.x) / 6.0, start.y + (end.y - prev.y) / 6.0},
        {end.x - (next.x - start.x) / 6.0, end.y - (next.y - start.y) / 6.0},
        end};
  }

  const int count = contour.sample_count;
  Polyline out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count - 1; ++j) {
    const double u = static_cast<double>(j) * n / static_cast<double>(count - 1);
    const int seg = std::min(static_cast<int>(u), n - 1);
    const Segment& s = segments[static_cast<std::size_t>(seg)];
    out.push_back(lerp_bezier(s.p0, s.p1, s.p2, s.p3, u - seg));
  }
  out.push_back(out.front());
  return out;
}

Mask rasterize(std::span<const PointF> polyline, int width, int height) {
  if (polyline.size() < 2 || polyline.front() != polyline.back()) {
    throw Error(ErrorCode::kInvalidContour, "polyline is not closed");
  }
  Mask mask(width, height);

  // Crossings per pixel row, sampled at the row's center line.
  std::vector<std::vector<double>> crossings(static_cast<std::size_t>(height));
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    PointF lo = polyline[i];
    PointF hi = polyline[i + 1];
    if (lo.y == hi.y) continue;
    // Canonical orientation so a segment yields the same crossing either way.
    if (hi.y < lo.y) std::swap(lo, hi);
    if (!(std::isfinite(lo.y) && std::isfinite(hi.y))) {
      throw Error(ErrorCode::kInvalidContour, "non-finite polyline coordinate");
    }
    // Rows whose center yc satisfies lo.y <= yc < hi.y.
    const double first = std::ceil(lo.y - 0.5);
    const double last = std::ceil(hi.y - 0.5) - 1.0;
    const int y0 = static_cast<int>(std::clamp(first, 0.0, static_cast<double>(height)));
    const int y1 = static_cast<int>(std::clamp(last, -1.0, static_cast<double>(height - 1)));
    const double slope = (hi.x - lo.x) / (hi.y - lo.y);
    for (int y = y0; y <= y1; ++y) {
      const double yc = y + 0.5;
      crossings[static_cast<std::size_t>(y)].push_back(lo.x + (yc - lo.y) * slope);
    }
  }

  for (int y = 0; y < height; ++y) {
    auto& xs = crossings[static_cast<std::size_t>(y)];
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Centers xc with xs[k] <= xc < xs[k+1].
      const double first = std::ceil(xs[k] - 0.5);
      const double last = std::ceil(xs[k + 1] - 0.5) - 1.0;
      const int x0 = static_cast<int>(std::clamp(first, 0.0, static_cast<double>(width)));
      const int x1 = static_cast<int>(std::clamp(last, -1.0, static_cast<double>(width - 1)));
      for (int x = x0; x <= x1; ++x) mask.set(x, y);
    }
  }
  return mask;
}

PointF mask_centroid(const Mask& mask) {
  double sx = 0.0;
  double sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) {
        sx += x + 0.5;
        sy += y + 0.5;
        ++n;
      }
    }
  }
  if (n == 0) throw Error(ErrorCode::kEmptyMask, "centroid of an empty mask");
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

namespace {

// Labels every 4-connected component in row-major discovery order.
std::vector<Component> label_all(const Mask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  const auto bits = mask.bits();
  std::vector<std::int32_t> label(bits.size(), -1);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < bits.size(); ++start) {
    if (!bits[start] || label[start] >= 0) continue;
    const auto id = static_cast<std::int32_t>(sizes.size());
    std::size_t size = 0;
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      ++size;
      const int x = static_cast<int>(idx % static_cast<std::size_t>(w));
      const int y = static_cast<int>(idx / static_cast<std::size_t>(w));
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
        const std::size_t n = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) +
                              static_cast<std::size_t>(nx);
        if (bits[n] && label[n] < 0) {
          label[n] = id;
          stack.push_back(n);
        }
      };
      visit(x + 1, y);
      visit(x - 1, y);
      visit(x, y + 1);
      visit(x, y - 1);
    }
    sizes.push_back(size);
  }
  std::vector<Component> out(sizes.size());
  for (std::size_t k = 0; k < sizes.size(); ++k) out[k].pixels.reserve(sizes[k]);
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] >= 0) out[static_cast<std::size_t>(label[i])].pixels.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<Component> connected_components(const Mask& mask, std::size_t min_area) {
  std::vector<Component> comps = label_all(mask);
  std::erase_if(comps, [&](const Component& c) { return c.pixels.size() < min_area; });
  // Discovery order is already row-major by top-left pixel, so a stable sort
  // by area gives the documented tie-break.
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    return a.pixels.size() > b.pixels.size();
  });
  return comps;
}

std::vector<Mask> component_masks(const Mask& mask, std::size_t min_area) {
  std::vector<Mask> out;
  for (const auto& comp : connected_components(mask, min_area)) {
    Mask m(mask.width(), mask.height());
    auto bits = m.bits();
    for (std::size_t idx : comp.pixels) bits[idx] = 1;
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

// Where the ray o + t*d leaves [0,w) x [0,h); assumes o is inside.
double exit_parameter(const PointF& o, double dx, double dy, int w, int h) {
  double t = std::numeric_limits<double>::infinity();
  if (dx > 1e-12) t = std::min(t, (w - o.x) / dx);
  if (dx < -1e-12) t = std::min(t, -o.x / dx);
  if (dy > 1e-12) t = std::min(t, (h - o.y) / dy);
  if (dy < -1e-12) t = std::min(t, -o.y / dy);
  return t;
}

Pixel to_vertex(const PointF& p, int w, int h) {
  const int x = static_cast<int>(std::lround(p.x));
  const int y = static_cast<int>(std::lround(p.y));
  return {std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)};
}

}  // namespace

std::vector<PolarPolygon> extract_polar_polygons(const Mask& mask, std::size_t min_area) {
  const int w = mask.width();
  const int h = mask.height();
  const auto comps = connected_components(mask, std::max<std::size_t>(min_area, 1));
  std::vector<std::int32_t> label(mask.size(), -1);

  std::vector<PolarPolygon> out;
  out.reserve(comps.size());
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    const auto& comp = comps[ci];
    for (std::size_t idx : comp.pixels) label[idx] = static_cast<std::int32_t>(ci);
    auto inside = [&](double px, double py) {
      if (px < 0.0 || py < 0.0 || px >= w || py >= h) return false;
      const std::size_t idx = static_cast<std::size_t>(py) * static_cast<std::size_t>(w) +
                              static_cast<std::size_t>(px);
      return label[idx] == static_cast<std::int32_t>(ci);
    };

    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t idx : comp.pixels) {
      sx += static_cast<double>(idx % static_cast<std::size_t>(w)) + 0.5;
      sy += static_cast<double>(idx / static_cast<std::size_t>(w)) + 0.5;
    }
    const double n = static_cast<double>(comp.pixels.size());
    PointF origin{sx / n, sy / n};
    if (!inside(origin.x, origin.y)) {
      double best = std::numeric_limits<double>::infinity();
      PointF best_center{};
      for (std::size_t idx : comp.pixels) {
        const PointF c{static_cast<double>(idx % static_cast<std::size_t>(w)) + 0.5,
                       static_cast<double>(idx / static_cast<std::size_t>(w)) + 0.5};
        const double d = (c.x - origin.x) * (c.x - origin.x) + (c.y - origin.y) * (c.y - origin.y);
        if (d < best) {
          best = d;
          best_center = c;
        }
      }
      origin = best_center;
    }

    PolarPolygon poly;
    poly.origin = origin;
    poly.area = comp.pixels.size();
    if (comp.pixels.size() == 1) {
      const std::size_t idx = comp.pixels.front();
      poly.polygon.vertices.fill({static_cast<int>(idx % static_cast<std::size_t>(w)),
                                  static_cast<int>(idx / static_cast<std::size_t>(w))});
      out.push_back(poly);
      continue;
    }
    for (int k = 0; k < kPolygonVertices; ++k) {
      const double theta = k * kRayAngleStepDeg * std::numbers::pi / 180.0;
      const double dx = std::cos(theta);
      const double dy = std::sin(theta);
      const double t_exit = exit_parameter(origin, dx, dy, w, h);

      PointF farthest = origin;
      bool prev_inside = true;  // the origin always lies in the component
      PointF prev = origin;
      for (int step = 1;; ++step) {
        const double t = step * kRayStep;
        if (t >= t_exit) {
          if (prev_inside) {
            // Still foreground at the border: use the border intersection.
            farthest = {origin.x + t_exit * dx, origin.y + t_exit * dy};
          }
          break;
        }
        const PointF p{origin.x + t * dx, origin.y + t * dy};
        const bool now_inside = inside(p.x, p.y);
        if (prev_inside && !now_inside) farthest = prev;
        prev_inside = now_inside;
        prev = p;
      }
      poly.polygon.vertices[static_cast<std::size_t>(k)] = to_vertex(farthest, w, h);
    }
    out.push_back(poly);
  }
  return out;
}

std::vector<Polygon16> extract_polygon_gt(const Mask& mask, std::size_t min_area) {
  std::vector<Polygon16> out;
  for (auto& p : extract_polar_polygons(mask, min_area)) out.push_back(p.polygon);
  return out;
}

Polyline polygon_outline(const Polygon16& polygon) {
  Polyline line;
  line.reserve(kPolygonVertices + 1);
  for (const Pixel& v : polygon.vertices) {
    line.push_back({static_cast<double>(v.x), static_cast<double>(v.y)});
  }
  line.push_back(line.front());
  return line;
}

Mask polygon_to_mask(const Polygon16& polygon, int width, int height) {
  const Polyline line = polygon_outline(polygon);
  return rasterize(line, width, height);
}

double mask_iou(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kShape, "mask_iou: dimension mismatch " + std::to_string(a.width()) +
                                       "x" + std::to_string(a.height()) + " vs " +
                                       std::to_string(b.width()) + "x" +
                                       std::to_string(b.height()));
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto ab = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    inter += static_cast<std::size_t>(ab[i] & bb[i]);
    uni += static_cast<std::size_t>(ab[i] | bb[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace llafs
