#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "llafs/curriculum.hpp"
#include "llafs/geometry.hpp"
#include "llafs/synthesis.hpp"

namespace llafs {

inline constexpr int kManifestVersion = 1;
inline constexpr std::string_view kManifestFile = "manifest.json";

enum class StepPolicy { kSequential, kFixed };

std::string_view to_string(StepPolicy policy) noexcept;

/// Flat key=value generation config. Lines starting with '#' are comments.
/// Keys: seed, count, size, a0, b0, c_np, d_np, np, sigma, min_area,
/// step_policy (sequential | fixed), step.
struct GenConfig {
  std::uint64_t seed = 0;
  std::int64_t count = 1000;
  int size = 384;
  ScheduleConfig schedule;
  double sigma = kDefaultNoiseSigma;
  std::size_t min_area = kDefaultMinArea;
  StepPolicy step_policy = StepPolicy::kSequential;
  std::int64_t step = 0;  ///< used by StepPolicy::kFixed

  /// Throws ErrorCode::kConfig.
  void validate() const;

  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

/// Throws ErrorCode::kConfig naming the line for unknown keys or bad values.
GenConfig parse_config(std::string_view text);
GenConfig load_config(const std::filesystem::path& path);
std::string render_config(const GenConfig& config);

/// Sequential spreads pairs evenly over [0, Np): n_i = floor(i * Np / count).
std::int64_t pair_step(const GenConfig& config, std::int64_t index);
std::uint64_t pair_seed(const GenConfig& config, std::int64_t index);

struct PairFile {
  std::string path;    ///< relative to the dataset root
  std::string sha256;

  friend bool operator==(const PairFile&, const PairFile&) = default;
};

struct PairRecord {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  StepParams step;
  Color support_fg_mean{};
  std::vector<Color> support_bg_means;
  Color query_fg_mean{};
  std::vector<Color> query_bg_means;
  std::vector<Polygon16> support_polygons;
  std::vector<Polygon16> query_polygons;
  std::vector<int> hinted_indices;
  /// Keys: support_image, support_mask, query_image, query_mask, instruction.
  std::map<std::string, PairFile> files;
  std::string content_digest;  ///< over the per-file digests

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct DatasetManifest {
  int version = kManifestVersion;
  int side = 384;
  ScheduleConfig schedule;
  std::uint64_t seed = 0;
  std::int64_t count = 0;
  double sigma = kDefaultNoiseSigma;
  std::size_t min_area = kDefaultMinArea;
  StepPolicy step_policy = StepPolicy::kSequential;
  std::int64_t step = 0;
  std::vector<PairRecord> pairs;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

std::string manifest_to_json(const DatasetManifest& manifest);
/// Throws ErrorCode::kValidation on schema violations.
DatasetManifest manifest_from_json(std::string_view text);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

std::string pair_record_to_json(const PairRecord& record);

/// Directory of pair i relative to the root: "pairs/000042".
std::string pair_directory(std::int64_t index);

/// Builds the record for a generated pair and writes its files under root.
PairRecord write_pair(const std::filesystem::path& root, std::int64_t index,
                      const PseudoPair& pair);

using ProgressFn = std::function<void(std::int64_t done, std::int64_t total)>;

/// Generates config.count pairs into out_dir using `jobs` worker threads and
/// writes the manifest last. Output is independent of `jobs`. Generation
/// failures throw ErrorCode::kLayoutGeneration naming the pair index.
DatasetManifest generate_dataset(const GenConfig& config, const std::filesystem::path& out_dir,
                                 unsigned jobs = 1, const ProgressFn& progress = {});

/// Checks record order, coordinate bounds, file existence and digests.
/// Returns one message per problem; empty when the dataset is valid.
std::vector<std::string> validate_dataset(const DatasetManifest& manifest,
                                          const std::filesystem::path& root);

/// Ground-truth object masks of a pair's query image.
std::vector<Mask> load_query_objects(const DatasetManifest& manifest, const PairRecord& record,
                                     const std::filesystem::path& root);

}  // namespace llafs
