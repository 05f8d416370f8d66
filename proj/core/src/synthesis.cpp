#include "llafs/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "llafs/error.hpp"

namespace llafs {

double color_distance(const Color& a, const Color& b) noexcept {
  const double dr = a[0] - b[0];
  const double dg = a[1] - b[1];
  const double db = a[2] - b[2];
  return std::sqrt(dr * dr + dg * dg + db * db);
}

void NoiseSpec::validate() const {
  for (double m : mean) {
    if (!(m >= 0.0 && m <= 255.0)) {
      throw Error(ErrorCode::kParameter, "noise mean component outside [0,255]");
    }
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::kParameter, "noise sigma must be positive");
}

RgbImage::RgbImage(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kShape, "image dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, 0);
}

PointF Similarity::apply(const PointF& p) const noexcept {
  const double theta = rotation_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double dx = p.x - pivot.x;
  const double dy = p.y - pivot.y;
  return {pivot.x + scale * (cs * dx - sn * dy) + tx, pivot.y + scale * (sn * dx + cs * dy) + ty};
}

namespace {

PointF centroid_of(std::span<const PointF> pts) {
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& p : pts) {
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(pts.size());
  return {sx / n, sy / n};
}

// Ten uniform points in the box, ordered by angle about their mean.
BezierContour random_contour(Rng& rng, double x0, double y0, double x1, double y1, int samples) {
  BezierContour c;
  c.sample_count = samples;
  c.control_points.reserve(kBezierControlPoints);
  for (int i = 0; i < kBezierControlPoints; ++i) {
    const double x = rng.uniform(x0, x1);
    const double y = rng.uniform(y0, y1);
    c.control_points.push_back({x, y});
  }
  const PointF mid = centroid_of(c.control_points);
  std::stable_sort(c.control_points.begin(), c.control_points.end(),
                   [&](const PointF& a, const PointF& b) {
                     return std::atan2(a.y - mid.y, a.x - mid.x) <
                            std::atan2(b.y - mid.y, b.x - mid.x);
                   });
  return c;
}

Mask rasterize_contour(const BezierContour& c, int w, int h) {
  const Polyline line = sample_bezier_contour(c);
  return rasterize(line, w, h);
}

// Splits the complement of `foreground` into k subregions: k-1 random
// contours carve pieces out in turn and the remainder is the last one.
std::vector<Mask> partition_background(Rng& rng, const Mask& foreground, int samples) {
  const int w = foreground.width();
  const int h = foreground.height();
  const int k = static_cast<int>(rng.uniform_int(1, kMaxSubregions));

  Mask remaining(w, h);
  {
    auto rb = remaining.bits();
    const auto fb = foreground.bits();
    for (std::size_t i = 0; i < rb.size(); ++i) rb[i] = fb[i] ? 0 : 1;
  }
  if (remaining.count() == 0) {
    throw Error(ErrorCode::kLayoutGeneration, "foreground covers the whole image");
  }

  std::vector<Mask> parts;
  for (int part = 0; part + 1 < k; ++part) {
    bool placed = false;
    for (int attempt = 0; attempt < kLayoutAttempts && !placed; ++attempt) {
      const BezierContour c = random_contour(rng, 0.0, 0.0, w, h, samples);
      Mask region = rasterize_contour(c, w, h);
      auto rb = region.bits();
      const auto remb = remaining.bits();
      std::size_t taken = 0;
      std::size_t left = 0;
      for (std::size_t i = 0; i < rb.size(); ++i) {
        rb[i] = static_cast<std::uint8_t>(rb[i] & remb[i]);
        taken += rb[i];
        left += static_cast<std::size_t>(remb[i] & ~rb[i] & 1);
      }
      if (taken == 0 || left == 0) continue;
      auto remw = remaining.bits();
      for (std::size_t i = 0; i < rb.size(); ++i) {
        if (rb[i]) remw[i] = 0;
      }
      parts.push_back(std::move(region));
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorCode::kLayoutGeneration, "could not carve background subregion " +
                                                    std::to_string(part + 1) + " of " +
                                                    std::to_string(k));
    }
  }
  parts.push_back(std::move(remaining));
  return parts;
}

void check_side(int width, int height) {
  if (width < kMinLayoutSide || height < kMinLayoutSide) {
    throw Error(ErrorCode::kParameter, "image side must be >= 64, got " +
                                           std::to_string(width) + "x" + std::to_string(height));
  }
}

void check_bounds(double lo, double hi, const char* name) {
  if (!(lo >= 0.0 && lo <= hi && hi <= kMaxRgbDistance)) {
    throw Error(ErrorCode::kParameter, std::string("distance bounds ") + name +
                                           " must satisfy 0 <= lo <= hi <= 441.68, got [" +
                                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

Color uniform_color(Rng& rng) {
  Color c;
  for (double& v : c) v = rng.uniform(0.0, 255.0);
  return c;
}

// Rejection sampler over the uniform cube. A zero-width shell at distance 0
// is the center itself.
template <typename Accept>
Color sample_shell(Rng& rng, const Color& center, double lo, double hi, Accept&& accept,
                   const char* what) {
  if (hi == 0.0) {
    if (accept(center)) return center;
    throw Error(ErrorCode::kInfeasibleConstraint,
                std::string(what) + ": zero-distance choice violates the joint constraints");
  }
  for (int i = 0; i < kMaxRejections; ++i) {
    const Color cand = uniform_color(rng);
    const double dist = color_distance(cand, center);
    if (dist >= lo && dist <= hi && accept(cand)) return cand;
  }
  throw Error(ErrorCode::kInfeasibleConstraint,
              std::string(what) + ": no sample within 10000 rejections");
}

}  // namespace

RegionLayout make_support_layout(Rng& rng, int width, int height, int contour_samples) {
  check_side(width, height);
  const double total = static_cast<double>(width) * height;
  RegionLayout layout;
  bool ok = false;
  for (int attempt = 0; attempt < kLayoutAttempts; ++attempt) {
    layout.contour = random_contour(rng, 0.1 * width, 0.1 * height, 0.9 * width, 0.9 * height,
                                    contour_samples);
    layout.foreground = rasterize_contour(layout.contour, width, height);
    const double frac = static_cast<double>(layout.foreground.count()) / total;
    if (frac >= kMinForegroundFraction && frac <= kMaxForegroundFraction) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    throw Error(ErrorCode::kLayoutGeneration,
                "foreground area outside [2%, 60%] after 50 contour draws");
  }
  layout.background = partition_background(rng, layout.foreground, contour_samples);
  return layout;
}

SupportMeans sample_support_means(Rng& rng, double a, double b, std::size_t count) {
  check_bounds(a, b, "[a,b]");
  SupportMeans out;
  out.foreground = uniform_color(rng);
  out.background.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.background.push_back(
        sample_shell(rng, out.foreground, a, b, [](const Color&) { return true; }, "m_sb"));
  }
  return out;
}

RgbImage fill_regions(const RegionLayout& layout, const NoiseSpec& fg,
                      std::span<const NoiseSpec> bg, Rng& rng) {
  if (bg.size() != layout.background.size()) {
    throw Error(ErrorCode::kParameter, "expected " + std::to_string(layout.background.size()) +
                                           " background noise specs, got " +
                                           std::to_string(bg.size()));
  }
  fg.validate();
  for (const auto& spec : bg) spec.validate();

  const int w = layout.foreground.width();
  const int h = layout.foreground.height();
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);

  // Region of each pixel: 0 = foreground, i+1 = background subregion i.
  std::vector<std::uint8_t> region(n, 0xFF);
  const auto fb = layout.foreground.bits();
  for (std::size_t i = 0; i < n; ++i) {
    if (fb[i]) region[i] = 0;
  }
  for (std::size_t s = 0; s < layout.background.size(); ++s) {
    const auto sb = layout.background[s].bits();
    for (std::size_t i = 0; i < n; ++i) {
      if (sb[i]) region[i] = static_cast<std::uint8_t>(s + 1);
    }
  }

  RgbImage image(w, h);
  auto data = image.data();
  for (std::size_t i = 0; i < n; ++i) {
    if (region[i] == 0xFF) {
      throw Error(ErrorCode::kParameter, "layout does not cover pixel " + std::to_string(i));
    }
    const NoiseSpec& spec = region[i] == 0 ? fg : bg[region[i] - 1];
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const double v = std::clamp(rng.normal(spec.mean[ch], spec.sigma), 0.0, 255.0);
      data[i * 3 + ch] = static_cast<std::uint8_t>(v + 0.5);
    }
  }
  return image;
}

RegionLayout perturb_layout(const RegionLayout& support, Rng& rng, int width, int height,
                            const PerturbOptions& options) {
  check_side(width, height);
  if (support.contour.control_points.size() != static_cast<std::size_t>(kBezierControlPoints)) {
    throw Error(ErrorCode::kInvalidContour, "support layout has no 10-point contour");
  }
  std::vector<PointF> jittered = support.contour.control_points;
  if (options.jitter) {
    for (auto& p : jittered) {
      p.x += rng.normal();
      p.y += rng.normal();
    }
  }
  const PointF pivot = centroid_of(jittered);

  for (int attempt = 0; attempt < kLayoutAttempts; ++attempt) {
    Similarity sim;
    sim.pivot = pivot;
    sim.rotation_deg = options.rotation_deg ? *options.rotation_deg : rng.uniform(0.0, 360.0);
    sim.scale = options.scale ? *options.scale : rng.uniform(0.5, 1.5);

    BezierContour moved;
    moved.sample_count = support.contour.sample_count;
    for (const auto& p : jittered) moved.control_points.push_back(sim.apply(p));
    const Polyline line = sample_bezier_contour(moved);
    double minx = line.front().x, maxx = minx, miny = line.front().y, maxy = miny;
    for (const auto& p : line) {
      minx = std::min(minx, p.x);
      maxx = std::max(maxx, p.x);
      miny = std::min(miny, p.y);
      maxy = std::max(maxy, p.y);
    }
    if (maxx - minx > width || maxy - miny > height) continue;

    sim.tx = rng.uniform(-minx, width - maxx);
    sim.ty = rng.uniform(-miny, height - maxy);

    RegionLayout out;
    out.contour.sample_count = support.contour.sample_count;
    for (const auto& p : jittered) out.contour.control_points.push_back(sim.apply(p));
    out.foreground = rasterize_contour(out.contour, width, height);
    if (out.foreground.count() == 0) continue;
    out.transform = sim;
    out.background = partition_background(rng, out.foreground, support.contour.sample_count);
    return out;
  }
  throw Error(ErrorCode::kLayoutGeneration, "could not place query contour inside the image");
}

QueryMeans sample_query_means(Rng& rng, const Color& m_sf, double a, double b, double c,
                              double d, std::size_t count) {
  check_bounds(a, b, "[a,b]");
  check_bounds(c, d, "[c,d]");
  QueryMeans out;
  out.foreground = sample_shell(rng, m_sf, c, d, [](const Color&) { return true; }, "m_qf");
  const double qf_gap = color_distance(out.foreground, m_sf);
  out.background.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.background.push_back(sample_shell(
        rng, out.foreground, a, b,
        [&](const Color& cand) { return color_distance(cand, m_sf) > qf_gap; }, "m_qb"));
  }
  return out;
}

PseudoPair generate_pair(std::uint64_t seed, const StepParams& step, int width, int height,
                         const GenerationOptions& options) {
  check_side(width, height);
  check_bounds(step.a, step.b, "[a,b]");
  check_bounds(step.c, step.d, "[c,d]");
  if (step.m < 0 || step.m > kMaxHints) {
    throw Error(ErrorCode::kParameter, "hint count M must be in [0,15]");
  }
  if (!(options.sigma > 0.0)) throw Error(ErrorCode::kParameter, "sigma must be positive");

  std::string last_failure;
  for (int attempt = 0; attempt < kPairAttempts; ++attempt) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(attempt)));
    try {
      PseudoPair pair;
      pair.seed = seed;
      pair.step = step;
      pair.width = width;
      pair.height = height;
      pair.sigma = options.sigma;

      pair.support_layout = make_support_layout(rng, width, height, options.contour_samples);
      pair.support_means =
          sample_support_means(rng, step.a, step.b, pair.support_layout.background.size());
      std::vector<NoiseSpec> bg;
      for (const auto& m : pair.support_means.background) bg.push_back({m, options.sigma});
      pair.support_image = fill_regions(pair.support_layout,
                                        {pair.support_means.foreground, options.sigma}, bg, rng);

      pair.query_layout = perturb_layout(pair.support_layout, rng, width, height);
      pair.query_means = sample_query_means(rng, pair.support_means.foreground, step.a, step.b,
                                            step.c, step.d,
                                            pair.query_layout.background.size());
      bg.clear();
      for (const auto& m : pair.query_means.background) bg.push_back({m, options.sigma});
      pair.query_image =
          fill_regions(pair.query_layout, {pair.query_means.foreground, options.sigma}, bg, rng);

      pair.support_mask = pair.support_layout.foreground;
      pair.query_mask = pair.query_layout.foreground;
      pair.support_polygons = extract_polygon_gt(pair.support_mask, options.min_area);
      pair.query_polygons = extract_polygon_gt(pair.query_mask, options.min_area);
      if (pair.support_polygons.empty() || pair.query_polygons.empty()) {
        throw Error(ErrorCode::kLayoutGeneration, "no foreground component reaches min_area");
      }
      pair.hinted_indices = sample_hint_indices(rng, step.m);
      return pair;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kLayoutGeneration &&
          e.code() != ErrorCode::kInfeasibleConstraint) {
        throw;
      }
      last_failure = e.what();
    }
  }
  throw Error(ErrorCode::kLayoutGeneration,
              "pair generation failed after 8 attempts; last: " + last_failure);
}

}  // namespace llafs
