#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "llafs/curriculum.hpp"
#include "llafs/eval.hpp"
#include "llafs/geometry.hpp"
#include "llafs/instruction.hpp"
#include "llafs/random.hpp"
#include "llafs/synthesis.hpp"

namespace {

void BM_GeneratePair(benchmark::State& state) {
  const auto side = static_cast<int>(state.range(0));
  const auto step = llafs::step_params(30000, {});
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(llafs::generate_pair(seed++, step, side, side));
}
BENCHMARK(BM_GeneratePair)->Arg(128)->Arg(384)->Unit(benchmark::kMillisecond);

llafs::Mask ellipse_mask(int side) {
  llafs::BezierContour c;
  for (int k = 0; k < llafs::kBezierControlPoints; ++k) {
    const double t = k * 2.0 * std::numbers::pi / llafs::kBezierControlPoints;
    c.control_points.push_back({side / 2.0 + side * 0.3 * std::cos(t), side / 2.0 + side * 0.2 * std::sin(t)});
  }
  return llafs::rasterize(llafs::sample_bezier_contour(c), side, side);
}

void BM_ExtractPolygonGt(benchmark::State& state) {
  const auto m = ellipse_mask(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(llafs::extract_polygon_gt(m));
}
BENCHMARK(BM_ExtractPolygonGt)->Arg(128)->Arg(384)->Unit(benchmark::kMicrosecond);

void BM_ParsePolygonOutput(benchmark::State& state) {
  llafs::Rng rng(1);
  std::vector<llafs::Polygon16> objs(static_cast<std::size_t>(state.range(0)));
  for (auto& p : objs)
    for (auto& v : p.vertices)
      v = {static_cast<int>(rng.uniform_int(0, 383)), static_cast<int>(rng.uniform_int(0, 383))};
  const auto text = llafs::encode_polygon_tuple(objs);
  for (auto _ : state) benchmark::DoNotOptimize(llafs::parse_polygon_output(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParsePolygonOutput)->Arg(1)->Arg(8);

void BM_MatchMasks(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  std::vector<llafs::Mask> preds, gts;
  for (int i = 0; i < n; ++i) {
    llafs::Mask p(128, 128), g(128, 128);
    for (int y = 10 * i; y < 10 * i + 20; ++y)
      for (int x = 5; x < 60; ++x) {
        g.set(x, y);
        p.set(x + 3, y);
      }
    preds.push_back(p);
    gts.push_back(g);
  }
  for (auto _ : state) benchmark::DoNotOptimize(llafs::match_masks(preds, gts));
}
BENCHMARK(BM_MatchMasks)->Arg(2)->Arg(6)->Arg(10);

}  // namespace
BENCHMARK_MAIN();
