#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "llafs/geometry.hpp"
#include "llafs/instruction.hpp"

namespace llafs {

/// Minimum-cost assignment on a rows x cols matrix (row-major). Returns, for
/// each row, its column or -1 when rows > cols. Every row is assigned when
/// rows <= cols. Exact, O(n^3).
std::vector<int> solve_assignment(std::span<const double> cost, std::size_t rows,
                                  std::size_t cols);

struct Assignment {
  int prediction = 0;
  int gt = 0;
  double iou = 0.0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct MatchResult {
  std::vector<Assignment> assignments;  ///< sorted by gt index
  std::vector<int> unmatched_predictions;
  std::vector<int> unmatched_gts;
  double mean_iou = 0.0;  ///< over gts; unmatched gts count as 0

  double total_iou() const noexcept;
};

/// Matches on 1 - IoU; pairs with IoU == 0 stay unmatched. With no gts the
/// mean is 0.
MatchResult match_masks(std::span<const Mask> predictions, std::span<const Mask> gts);

MatchResult match_predictions(std::span<const Polygon16> predictions, std::span<const Mask> gts,
                              int width, int height);

struct EpisodeRecord {
  std::string id;
  std::vector<double> object_iou;  ///< one entry per gt
  double mean_iou = 0.0;
  std::size_t predictions = 0;
  MatchResult match;
};

EpisodeRecord score_episode(const PolygonTuple& parsed, std::span<const Mask> gt_masks,
                            ImageSize size, std::string id = {});

struct FoldSummary {
  std::string label;
  std::size_t episodes = 0;
  double mean_iou = 0.0;
};

struct EvalReport {
  std::vector<FoldSummary> folds;  ///< in order of first appearance
  double overall_iou = 0.0;        ///< mean of fold means
  std::vector<EpisodeRecord> episodes;
};

/// fold_labels is parallel to records; empty means a single fold "all".
EvalReport aggregate(std::span<const EpisodeRecord> records,
                     std::span<const std::string> fold_labels = {});

/// Per-episode rows, then per-fold rows, then the overall row.
std::string report_to_csv(const EvalReport& report);
std::string report_to_json(const EvalReport& report);
/// Short human-readable summary.
std::string report_summary(const EvalReport& report);

}  // namespace llafs
