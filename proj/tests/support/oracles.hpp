#pragma once

// Independent reference implementations used as test oracles. Each is the
// slow, obvious version of something the library computes faster.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "llafs/geometry.hpp"
#include "llafs/synthesis.hpp"
#include "llafs/tablegen.hpp"

namespace oracle {

inline std::string fixture_path(std::string_view rel) {
  return std::string(LLAFS_FIXTURE_DIR) + "/" + std::string(rel);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// W. Randolph Franklin's PNPOLY crossing test.
inline bool pnpoly(const std::vector<llafs::PointF>& poly, double px, double py) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if (((a.y > py) != (b.y > py)) && (px < (b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x)) {
      inside = !inside;
    }
  }
  return inside;
}

/// Pixel-center point-in-polygon over the whole grid.
inline llafs::Mask brute_rasterize(const std::vector<llafs::PointF>& poly, int w, int h) {
  llafs::Mask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (pnpoly(poly, x + 0.5, y + 0.5)) m.set(x, y);
    }
  }
  return m;
}

inline llafs::Mask disk(double cx, double cy, double r, int w, int h) {
  llafs::Mask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      if (dx * dx + dy * dy <= r * r) m.set(x, y);
    }
  }
  return m;
}

inline double iou(const llafs::Mask& a, const llafs::Mask& b) {
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.bits().size(); ++i) {
    inter += a.bits()[i] && b.bits()[i];
    uni += a.bits()[i] || b.bits()[i];
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
}

/// Best total IoU over every partial bijection, by enumerating permutations
/// of the larger side. iou is rows x cols, row-major.
inline double brute_force_best_total(const std::vector<double>& iou, std::size_t rows,
                                     std::size_t cols) {
  const std::size_t n = std::max(rows, cols);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = rows >= cols ? perm[i] : i;
      const std::size_t c = rows >= cols ? i : perm[i];
      if (r < rows && c < cols) total += iou[r * cols + c];
    }
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Eq. 1 by the definition: a double loop with an inline cosine.
inline std::vector<std::vector<std::string>> exhaustive_table(
    const std::vector<llafs::Region>& regions, const std::vector<llafs::Attribute>& atts,
    double alpha) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : regions) {
    std::vector<std::string> row;
    for (const auto& a : atts) {
      long double dot = 0;
      long double nr = 0;
      long double na = 0;
      for (std::size_t k = 0; k < r.embedding.size(); ++k) {
        dot += static_cast<long double>(r.embedding[k]) * a.embedding[k];
        nr += static_cast<long double>(r.embedding[k]) * r.embedding[k];
        na += static_cast<long double>(a.embedding[k]) * a.embedding[k];
      }
      if (dot / std::sqrt(nr * na) > alpha) row.push_back(a.text);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Maps each region descriptor (a keyword) to its own axis and each phrase to
/// the normalised sum of the axes of keywords it contains, plus a constant
/// axis. A phrase matches a region at cosine > 0.2 iff it names its keyword.
class KeywordEmbedder final : public llafs::Embedder {
 public:
  explicit KeywordEmbedder(std::vector<std::string> keywords) : keywords_(std::move(keywords)) {}

  llafs::Embedding embed_region(std::string_view descriptor) const override {
    llafs::Embedding v(dimension(), 0.0);
    v[axis(descriptor)] = 1.0;
    return v;
  }
  llafs::Embedding embed_text(std::string_view phrase) const override {
    llafs::Embedding v(dimension(), 0.0);
    v[0] = 1.0;
    for (std::size_t k = 0; k < keywords_.size(); ++k) {
      if (phrase.find(keywords_[k]) != std::string_view::npos) v[k + 1] = 1.0;
    }
    return llafs::normalized(std::move(v));
  }
  std::size_t dimension() const override { return keywords_.size() + 1; }

 private:
  std::size_t axis(std::string_view kw) const {
    for (std::size_t k = 0; k < keywords_.size(); ++k) {
      if (keywords_[k] == kw) return k + 1;
    }
    return 0;
  }
  std::vector<std::string> keywords_;
};

/// Classifies each pixel by the nearer of the foreground mean and the closest
/// background mean (the midpoint hyperplane between means).
inline llafs::Mask midpoint_threshold(const llafs::RgbImage& img, const llafs::Color& fg,
                                      const std::vector<llafs::Color>& bg) {
  llafs::Mask m(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      auto d2 = [&](const llafs::Color& c) {
        double s = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          const double d = img.at(x, y, ch) - c[static_cast<std::size_t>(ch)];
          s += d * d;
        }
        return s;
      };
      const double dfg = d2(fg);
      double dbg = 1e300;
      for (const auto& c : bg) dbg = std::min(dbg, d2(c));
      if (dfg < dbg) m.set(x, y);
    }
  }
  return m;
}

inline double distance(const llafs::Color& a, const llafs::Color& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

/// Regular 16-gon of integer vertices, clockwise in y-down image coordinates.
inline llafs::Polygon16 regular_polygon(double cx, double cy, double r) {
  llafs::Polygon16 p;
  for (int k = 0; k < llafs::kPolygonVertices; ++k) {
    const double t = k * 22.5 * M_PI / 180.0;
    p.vertices[static_cast<std::size_t>(k)] = {static_cast<int>(std::lround(cx + r * std::sin(t))),
                                               static_cast<int>(std::lround(cy - r * std::cos(t)))};
  }
  return p;
}

}  // namespace oracle
