#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llafs/geometry.hpp"
#include "llafs/synthesis.hpp"
#include "llafs/tablegen.hpp"

namespace llafs {

/// Coordinate vocabulary: one token per axis value, [c-0] .. [c-383].
inline constexpr int kCoordVocabulary = 384;
inline constexpr std::string_view kMaskToken = "[mask]";

/// "[c-<value>]"; throws ErrorCode::kEncoding outside [0, 383].
std::string coord_token(int value);
/// Inverse of coord_token(); nullopt for anything that is not a token in range.
std::optional<int> parse_coord_token(std::string_view surface);

/// "(([c-x1],[c-y1]),([c-x2],[c-y2]),...,([c-x16],[c-y16]))"
std::string encode_polygon(const Polygon16& polygon);
/// "(P1, P2, ..., Pn)" with each P from encode_polygon().
std::string encode_polygon_tuple(std::span<const Polygon16> polygons);

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  ///< one past the closing parenthesis

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

struct PolygonTuple {
  std::vector<Polygon16> objects;
  std::vector<SourceSpan> spans;  ///< parallel to objects; empty when built by hand
};

/// Recursive-descent parser for model output:
///   TUPLE := '(' POLY (',' POLY)* ')' | POLY
///   POLY  := '(' PAIR (',' PAIR){15} ')'
///   PAIR  := '(' COORD ',' COORD ')'
///   COORD := '[c-' INT ']' | INT          (value in [0, 383])
/// Whitespace is allowed between tokens. Throws ParseError with the byte
/// offset of the first violation.
PolygonTuple parse_polygon_output(std::string_view text);

enum class InstructionKind { kTask, kInContext, kPretrain, kMultiShot };

std::string_view to_string(InstructionKind kind) noexcept;

/// A visual-token placeholder left in the text, e.g. "[support image]".
struct Slot {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct RenderedInstruction {
  InstructionKind kind = InstructionKind::kTask;
  std::string text;
  std::vector<Slot> slots;
};

struct ImageSize {
  int width = 384;
  int height = 384;
};

/// A support region as it appears in an instruction.
struct RegionOutline {
  std::string id;
  Polygon16 polygon;
};

/// One annotated support image of a K-shot episode.
struct SupportShot {
  std::vector<Polygon16> ground_truth;
  CorrespondingTable table;
  std::vector<RegionOutline> regions;
};

/// "(W, H)"
std::string render_image_size(ImageSize size);

RenderedInstruction render_task_instruction(std::string_view category, ImageSize size,
                                            std::span<const Polygon16> support_gt);

/// Attributes form a comma list. Each table row with at least one match
/// becomes "<region polygon> is <matches>"; rows follow table order and empty
/// rows are omitted. With no matches at all only the first sentence remains.
RenderedInstruction render_incontext_instruction(std::string_view category,
                                                 std::span<const std::string> attributes,
                                                 const CorrespondingTable& table,
                                                 std::span<const RegionOutline> regions);

/// Hinted vertices keep their coordinate tokens; every other vertex of the
/// query polygon becomes one [mask] token. The support foreground is the
/// support polygon in coordinate-token form.
RenderedInstruction render_pretrain_instruction(const PseudoPair& pair,
                                                std::span<const int> hinted_indices, int m);

RenderedInstruction render_multishot_instruction(std::string_view category,
                                                 std::span<const std::string> attributes,
                                                 std::span<const SupportShot> shots,
                                                 ImageSize size);

}  // namespace llafs
