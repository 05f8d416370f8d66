#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llafs/geometry.hpp"

namespace llafs {

inline constexpr double kDefaultAlpha = 0.2;
inline constexpr int kDefaultMaxRefineIterations = 3;
inline constexpr double kUnitNormTolerance = 1e-6;

using Embedding = std::vector<double>;

/// dot(u, v) / (|u| |v|).
double cosine(std::span<const double> u, std::span<const double> v);

/// Returns v / |v|; throws on a zero vector.
Embedding normalized(Embedding v);

/// A pre-segmented support region with its image embedding.
struct Region {
  std::string id;
  Polygon16 polygon;
  Embedding embedding;
};

struct Attribute {
  std::string text;
  Embedding embedding;
};

struct TableRow {
  std::string region_id;
  std::vector<std::string> attributes;

  friend bool operator==(const TableRow&, const TableRow&) = default;
};

enum class Resolution { kResolved, kUnresolved };

std::string_view to_string(Resolution r) noexcept;

/// One request/response exchanged with the expert, in canonical text form.
struct OracleExchange {
  std::string kind;  ///< "ambiguity" | "discriminate"
  std::string prompt;
  std::string response;

  friend bool operator==(const OracleExchange&, const OracleExchange&) = default;
};

struct Provenance {
  int iterations = 0;
  std::vector<std::string> ambiguous_classes;
  std::vector<std::string> discriminative_attributes;
  Resolution status = Resolution::kResolved;
  std::vector<OracleExchange> transcript;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct CorrespondingTable {
  std::string category;
  double alpha = kDefaultAlpha;
  std::vector<TableRow> rows;  ///< one per region, in region order
  Provenance provenance;

  const TableRow* find(std::string_view region_id) const noexcept;

  friend bool operator==(const CorrespondingTable&, const CorrespondingTable&) = default;
};

/// Row i lists, in attribute order, every attribute whose cosine similarity to
/// region i is strictly greater than alpha.
CorrespondingTable build_table(std::span<const Region> regions,
                               std::span<const Attribute> attributes,
                               double alpha = kDefaultAlpha);

/// Union of matched attributes over all rows, in first-occurrence order.
std::vector<std::string> matched_attributes(const CorrespondingTable& table);

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual Embedding embed_region(std::string_view descriptor) const = 0;
  virtual Embedding embed_text(std::string_view phrase) const = 0;
  virtual std::size_t dimension() const = 0;
};

/// Deterministic stand-in for a CLIP-style encoder: the vector is a unit
/// Gaussian draw seeded by an FNV-1a hash of the input. Unrelated inputs are
/// nearly orthogonal in high dimensions. Stateless, so safe to share.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 64, std::uint64_t salt = 0);

  Embedding embed_region(std::string_view descriptor) const override;
  Embedding embed_text(std::string_view phrase) const override;
  std::size_t dimension() const override { return dimension_; }

 private:
  Embedding draw(std::uint64_t seed) const;

  std::size_t dimension_;
  std::uint64_t salt_;
};

std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// Text fed to the text encoder for an attribute phrase: "A photo of <phrase>".
std::string attribute_prompt(std::string_view phrase);

std::vector<Attribute> embed_attributes(std::span<const std::string> phrases,
                                        const Embedder& embedder);

/// Structured expert used by the refinement loop. detect_ambiguity() returns
/// an empty list for the answer "no".
class ExpertOracle {
 public:
  virtual ~ExpertOracle() = default;

  virtual std::vector<std::string> list_attributes(std::string_view category) = 0;
  virtual std::vector<std::string> detect_ambiguity(
      std::string_view category, std::span<const std::string> partial_attributes) = 0;
  /// seen_attributes is empty on the first round; later rounds pass every
  /// discriminative attribute collected so far.
  virtual std::vector<std::string> discriminate(std::string_view category,
                                                std::span<const std::string> ambiguous_classes,
                                                std::span<const std::string> seen_attributes) = 0;
};

struct RefinedTable {
  CorrespondingTable table;
  std::vector<Attribute> attributes;  ///< input attributes plus accepted [d-att]
};

/// Expert-guided refinement. Ambiguity is detected once on the initial table;
/// then up to max_iterations rounds each request discriminative attributes,
/// embed the unseen ones, append them and rebuild the table. Stops as soon as a
/// new attribute matches a region (resolved) or after the last round
/// (unresolved).
RefinedTable refine_table(std::string_view category, std::span<const Region> regions,
                          std::span<const Attribute> attributes, const Embedder& embedder,
                          ExpertOracle& oracle, double alpha = kDefaultAlpha,
                          int max_iterations = kDefaultMaxRefineIterations);

std::string table_to_json(const CorrespondingTable& table);
CorrespondingTable table_from_json(std::string_view json);

}  // namespace llafs
