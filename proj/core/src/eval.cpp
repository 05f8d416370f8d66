#include "llafs/eval.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <json.hpp>
#include <limits>
#include <numeric>

#include "llafs/error.hpp"

namespace llafs {

std::vector<int> solve_assignment(std::span<const double> cost, std::size_t rows,
                                  std::size_t cols) {
  if (cost.size() != rows * cols) {
    throw Error(ErrorCode::kShape, "cost matrix has " + std::to_string(cost.size()) +
                                       " entries, expected " + std::to_string(rows * cols));
  }
  std::vector<int> out(rows, -1);
  if (rows == 0 || cols == 0) return out;

  // Shortest augmenting paths with potentials on an n x m problem, n <= m.
  const bool transposed = rows > cols;
  const std::size_t n = transposed ? cols : rows;
  const std::size_t m = transposed ? rows : cols;
  auto a = [&](std::size_t i, std::size_t j) {
    return transposed ? cost[(j - 1) * cols + (i - 1)] : cost[(i - 1) * cols + (j - 1)];
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transposed) {
      out[j - 1] = static_cast<int>(p[j] - 1);
    } else {
      out[p[j] - 1] = static_cast<int>(j - 1);
    }
  }
  return out;
}

double MatchResult::total_iou() const noexcept {
  double s = 0.0;
  for (const auto& a : assignments) s += a.iou;
  return s;
}

MatchResult match_masks(std::span<const Mask> predictions, std::span<const Mask> gts) {
  const std::size_t np = predictions.size();
  const std::size_t ng = gts.size();
  for (std::size_t i = 1; i < ng; ++i) {
    if (gts[i].width() != gts[0].width() || gts[i].height() != gts[0].height()) {
      throw Error(ErrorCode::kShape, "ground-truth masks differ in size");
    }
  }
  std::vector<double> iou(np * ng);
  std::vector<double> cost(np * ng);
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < ng; ++j) {
      iou[i * ng + j] = mask_iou(predictions[i], gts[j]);
      cost[i * ng + j] = 1.0 - iou[i * ng + j];
    }
  }
  const std::vector<int> row = solve_assignment(cost, np, ng);

  MatchResult out;
  std::vector<char> gt_used(ng, 0);
  for (std::size_t i = 0; i < np; ++i) {
    const int j = row[i];
    if (j < 0 || iou[i * ng + static_cast<std::size_t>(j)] <= 0.0) {
      out.unmatched_predictions.push_back(static_cast<int>(i));
      continue;
    }
    gt_used[static_cast<std::size_t>(j)] = 1;
    out.assignments.push_back({static_cast<int>(i), j, iou[i * ng + static_cast<std::size_t>(j)]});
  }
  std::sort(out.assignments.begin(), out.assignments.end(),
            [](const Assignment& x, const Assignment& y) { return x.gt < y.gt; });
  for (std::size_t j = 0; j < ng; ++j) {
    if (!gt_used[j]) out.unmatched_gts.push_back(static_cast<int>(j));
  }
  out.mean_iou = ng ? out.total_iou() / static_cast<double>(ng) : 0.0;
  return out;
}

MatchResult match_predictions(std::span<const Polygon16> predictions, std::span<const Mask> gts,
                              int width, int height) {
  for (const auto& g : gts) {
    if (g.width() != width || g.height() != height) {
      throw Error(ErrorCode::kShape, fmt::format("ground-truth mask is {}x{}, expected {}x{}",
                                                 g.width(), g.height(), width, height));
    }
  }
  std::vector<Mask> rendered;
  rendered.reserve(predictions.size());
  for (const auto& p : predictions) rendered.push_back(polygon_to_mask(p, width, height));
  return match_masks(rendered, gts);
}

EpisodeRecord score_episode(const PolygonTuple& parsed, std::span<const Mask> gt_masks,
                            ImageSize size, std::string id) {
  EpisodeRecord rec;
  rec.id = std::move(id);
  rec.predictions = parsed.objects.size();
  rec.match = match_predictions(parsed.objects, gt_masks, size.width, size.height);
  rec.object_iou.assign(gt_masks.size(), 0.0);
  for (const auto& a : rec.match.assignments) {
    rec.object_iou[static_cast<std::size_t>(a.gt)] = a.iou;
  }
  rec.mean_iou = rec.match.mean_iou;
  return rec;
}

EvalReport aggregate(std::span<const EpisodeRecord> records,
                     std::span<const std::string> fold_labels) {
  if (records.empty()) throw Error(ErrorCode::kParameter, "aggregate: no episode records");
  if (!fold_labels.empty() && fold_labels.size() != records.size()) {
    throw Error(ErrorCode::kParameter, "aggregate: fold labels do not match records");
  }
  EvalReport report;
  report.episodes.assign(records.begin(), records.end());
  std::vector<double> sums;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string label = fold_labels.empty() ? "all" : fold_labels[i];
    auto it = std::find_if(report.folds.begin(), report.folds.end(),
                           [&](const FoldSummary& f) { return f.label == label; });
    if (it == report.folds.end()) {
      report.folds.push_back({label, 0, 0.0});
      sums.push_back(0.0);
      it = report.folds.end() - 1;
    }
    const auto k = static_cast<std::size_t>(it - report.folds.begin());
    ++it->episodes;
    sums[k] += records[i].mean_iou;
  }
  double overall = 0.0;
  for (std::size_t k = 0; k < report.folds.size(); ++k) {
    report.folds[k].mean_iou = sums[k] / static_cast<double>(report.folds[k].episodes);
    overall += report.folds[k].mean_iou;
  }
  report.overall_iou = overall / static_cast<double>(report.folds.size());
  return report;
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "kind,id,episodes,objects,predictions,mean_iou\n";
  for (const auto& e : report.episodes) {
    out += fmt::format("episode,{},1,{},{},{:.6f}\n", e.id, e.object_iou.size(), e.predictions,
                       e.mean_iou);
  }
  for (const auto& f : report.folds) {
    out += fmt::format("fold,{},{},,,{:.6f}\n", f.label, f.episodes, f.mean_iou);
  }
  out += fmt::format("overall,,{},,,{:.6f}\n", report.episodes.size(), report.overall_iou);
  return out;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["overall_iou"] = report.overall_iou;
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (const auto& f : report.folds) {
    folds.push_back({{"label", f.label}, {"episodes", f.episodes}, {"mean_iou", f.mean_iou}});
  }
  j["folds"] = std::move(folds);
  nlohmann::ordered_json eps = nlohmann::ordered_json::array();
  for (const auto& e : report.episodes) {
    nlohmann::ordered_json matches = nlohmann::ordered_json::array();
    for (const auto& a : e.match.assignments) {
      matches.push_back({{"prediction", a.prediction}, {"gt", a.gt}, {"iou", a.iou}});
    }
    eps.push_back({{"id", e.id},
                   {"mean_iou", e.mean_iou},
                   {"object_iou", e.object_iou},
                   {"predictions", e.predictions},
                   {"matches", std::move(matches)},
                   {"unmatched_predictions", e.match.unmatched_predictions},
                   {"unmatched_gts", e.match.unmatched_gts}});
  }
  j["episodes"] = std::move(eps);
  return j.dump(2) + "\n";
}

std::string report_summary(const EvalReport& report) {
  std::string out = fmt::format("episodes: {}\n", report.episodes.size());
  for (const auto& f : report.folds) {
    out += fmt::format("  fold {:<10} episodes={:<6} mIoU={:.4f}\n", f.label, f.episodes,
                       f.mean_iou);
  }
  out += fmt::format("overall mIoU: {:.4f}\n", report.overall_iou);
  return out;
}

}  // namespace llafs
