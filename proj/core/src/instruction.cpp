#include "llafs/instruction.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "llafs/error.hpp"

namespace llafs {

std::string coord_token(int value) {
  if (value < 0 || value >= kCoordVocabulary) {
    throw Error(ErrorCode::kEncoding,
                "coordinate " + std::to_string(value) + " outside [0, 383]");
  }
  return "[c-" + std::to_string(value) + "]";
}

std::optional<int> parse_coord_token(std::string_view s) {
  if (s.size() < 5 || !s.starts_with("[c-") || s.back() != ']') return std::nullopt;
  const std::string_view digits = s.substr(3, s.size() - 4);
  if (digits.empty() || digits.size() > 3) return std::nullopt;
  if (digits.size() > 1 && digits.front() == '0') return std::nullopt;
  int v = 0;
  for (char ch : digits) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return std::nullopt;
    v = v * 10 + (ch - '0');
  }
  if (v >= kCoordVocabulary) return std::nullopt;
  return v;
}

std::string encode_polygon(const Polygon16& polygon) {
  std::string out = "(";
  for (std::size_t k = 0; k < polygon.vertices.size(); ++k) {
    if (k) out += ",";
    const Pixel& v = polygon.vertices[k];
    out += "(" + coord_token(v.x) + "," + coord_token(v.y) + ")";
  }
  out += ")";
  return out;
}

std::string encode_polygon_tuple(std::span<const Polygon16> polygons) {
  std::string out = "(";
  for (std::size_t i = 0; i < polygons.size(); ++i) {
    if (i) out += ", ";
    out += encode_polygon(polygons[i]);
  }
  out += ")";
  return out;
}

namespace {

class OutputParser {
 public:
  explicit OutputParser(std::string_view text) : text_(text) {}

  PolygonTuple run() {
    PolygonTuple out;
    skip_ws();
    if (looks_like_tuple()) {
      expect('(', "'(' opening the object tuple");
      parse_polygon(out);
      skip_ws();
      while (peek() == ',') {
        ++pos_;
        parse_polygon(out);
        skip_ws();
      }
      expect(')', "',' or ')' closing the object tuple");
    } else {
      parse_polygon(out);
    }
    skip_ws();
    if (pos_ != text_.size()) fail("end of input after the polygon tuple");
    return out;
  }

 private:
  [[noreturn]] void fail(std::string expectation) const {
    throw ParseError(pos_, "expected " + std::move(expectation));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c, std::string what) {
    skip_ws();
    if (peek() != c) fail(std::move(what));
    ++pos_;
  }

  // '(' '(' '(' opens a tuple of polygons; '(' '(' COORD opens a bare polygon.
  bool looks_like_tuple() const {
    std::size_t p = pos_;
    int parens = 0;
    while (p < text_.size() && parens < 3) {
      const char c = text_[p];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++p;
        continue;
      }
      if (c != '(') break;
      ++parens;
      ++p;
    }
    return parens >= 3;
  }

  void parse_polygon(PolygonTuple& out) {
    skip_ws();
    const std::size_t begin = pos_;
    expect('(', "'(' opening a polygon");
    Polygon16 poly;
    int count = 0;
    while (true) {
      Pixel v = parse_pair();
      if (count < kPolygonVertices) poly.vertices[static_cast<std::size_t>(count)] = v;
      ++count;
      skip_ws();
      if (peek() == ',') {
        if (count == kPolygonVertices) fail("16 vertices, found more");
        ++pos_;
        continue;
      }
      if (peek() == ')') {
        if (count != kPolygonVertices) {
          fail("16 vertices, found " + std::to_string(count));
        }
        ++pos_;
        break;
      }
      fail("',' or ')' after vertex " + std::to_string(count));
    }
    out.objects.push_back(poly);
    out.spans.push_back({begin, pos_});
  }

  Pixel parse_pair() {
    expect('(', "'(' opening a coordinate pair");
    Pixel v;
    v.x = parse_coord();
    expect(',', "',' between x and y");
    v.y = parse_coord();
    expect(')', "')' closing a coordinate pair");
    return v;
  }

  int parse_coord() {
    skip_ws();
    const std::size_t start = pos_;
    bool token = false;
    if (text_.substr(pos_).starts_with("[c-")) {
      token = true;
      pos_ += 3;
    }
    const std::size_t digits_at = pos_;
    long value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      if (pos_ - digits_at < 9) value = value * 10 + (text_[pos_] - '0');
      ++pos_;
    }
    if (pos_ == digits_at) {
      pos_ = start;
      fail(token ? "digits inside coordinate token" : "coordinate token or integer");
    }
    if (token) {
      if (peek() != ']') fail("']' closing coordinate token");
      ++pos_;
    }
    if (pos_ - digits_at > 9 || value >= kCoordVocabulary) {
      const std::size_t end = pos_;
      pos_ = start;
      throw ParseError(start, "expected coordinate in [0, 383], found '" +
                                  std::string(text_.substr(start, end - start)) + "'");
    }
    return static_cast<int>(value);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void require_category(std::string_view category) {
  if (category.empty()) throw Error(ErrorCode::kTemplateInput, "category must not be empty");
}

std::string join(std::span<const std::string> items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

// Accumulates instruction text and records where visual slots land.
class TextBuilder {
 public:
  explicit TextBuilder(InstructionKind kind) { out_.kind = kind; }

  TextBuilder& text(std::string_view s) {
    out_.text += s;
    return *this;
  }
  TextBuilder& slot(std::string name) {
    Slot s{name, out_.text.size(), 0};
    out_.text += name;
    s.end = out_.text.size();
    out_.slots.push_back(std::move(s));
    return *this;
  }
  RenderedInstruction finish() { return std::move(out_); }

 private:
  RenderedInstruction out_;
};

std::string size_text(ImageSize size) {
  if (size.width <= 0 || size.height <= 0 || size.width > kCoordVocabulary ||
      size.height > kCoordVocabulary) {
    throw Error(ErrorCode::kTemplateInput, "image size must lie in [1, 384]");
  }
  return render_image_size(size);
}

// "<poly> is <atts>, <poly> is <atts>" over non-empty rows, in table order.
std::string region_clauses(const CorrespondingTable& table,
                           std::span<const RegionOutline> regions) {
  std::string out;
  for (const auto& row : table.rows) {
    auto it = std::find_if(regions.begin(), regions.end(),
                           [&](const RegionOutline& r) { return r.id == row.region_id; });
    if (it == regions.end()) {
      throw Error(ErrorCode::kTemplateInput,
                  "table row '" + row.region_id + "' has no region polygon");
    }
    if (row.attributes.empty()) continue;
    if (!out.empty()) out += ", ";
    out += encode_polygon(it->polygon) + " is " + join(row.attributes, ", ");
  }
  return out;
}

constexpr std::string_view kTaskHead =
    "For each object within the class ";
constexpr std::string_view kTaskBody =
    " in an image, output coordinates of a 16-point polygon that encloses the object. These "
    "points should be arranged in a clockwise direction. The output should be a tuple in the "
    "format of (c1, c2, ..., cn), where cn is the coordinates for the n-th object and its format "
    "should be ";

}  // namespace

PolygonTuple parse_polygon_output(std::string_view text) { return OutputParser(text).run(); }

std::string_view to_string(InstructionKind kind) noexcept {
  switch (kind) {
    case InstructionKind::kTask: return "task";
    case InstructionKind::kInContext: return "incontext";
    case InstructionKind::kPretrain: return "pretrain";
    case InstructionKind::kMultiShot: return "multishot";
  }
  return "unknown";
}

std::string render_image_size(ImageSize size) {
  return "(" + std::to_string(size.width) + ", " + std::to_string(size.height) + ")";
}

RenderedInstruction render_task_instruction(std::string_view category, ImageSize size,
                                            std::span<const Polygon16> support_gt) {
  require_category(category);
  if (support_gt.empty()) {
    throw Error(ErrorCode::kTemplateInput, "support ground truth has no objects");
  }
  const std::string sz = size_text(size);
  TextBuilder b(InstructionKind::kTask);
  b.text(kTaskHead)
      .text(category)
      .text(kTaskBody)
      .text("((x1,y1),(x2,y2),...,(x16,y16)). The coordinate value should be within ")
      .text(sz)
      .text(". For example, for image ")
      .slot("[support image]")
      .text(", the output should be ")
      .text(encode_polygon_tuple(support_gt))
      .text(".");
  return b.finish();
}

RenderedInstruction render_incontext_instruction(std::string_view category,
                                                 std::span<const std::string> attributes,
                                                 const CorrespondingTable& table,
                                                 std::span<const RegionOutline> regions) {
  require_category(category);
  if (attributes.empty()) throw Error(ErrorCode::kTemplateInput, "attribute list is empty");
  const std::string clauses = region_clauses(table, regions);
  TextBuilder b(InstructionKind::kInContext);
  b.text("The ").text(category).text(" has ").text(join(attributes, ", ")).text(".");
  if (!clauses.empty()) {
    b.text(" For example, in ").slot("[support image]").text(", ").text(clauses).text(".");
  }
  return b.finish();
}

RenderedInstruction render_pretrain_instruction(const PseudoPair& pair,
                                                std::span<const int> hinted_indices, int m) {
  if (m < 0 || m > kMaxHints) {
    throw Error(ErrorCode::kTemplateInput, "M must lie in [0, 15], got " + std::to_string(m));
  }
  if (hinted_indices.size() != static_cast<std::size_t>(m)) {
    throw Error(ErrorCode::kTemplateInput, "expected " + std::to_string(m) +
                                               " hinted indices, got " +
                                               std::to_string(hinted_indices.size()));
  }
  std::set<int> hinted;
  for (int i : hinted_indices) {
    if (i < 0 || i >= kPolygonVertices || !hinted.insert(i).second) {
      throw Error(ErrorCode::kTemplateInput,
                  "hinted indices must be distinct and in [0, 16), got " + std::to_string(i));
    }
  }
  if (pair.support_polygons.empty() || pair.query_polygons.empty()) {
    throw Error(ErrorCode::kTemplateInput, "pair has no support or query polygon");
  }
  const Polygon16& target = pair.query_polygons.front();
  std::string masked = "(";
  for (int k = 0; k < kPolygonVertices; ++k) {
    if (k) masked += ",";
    if (hinted.contains(k)) {
      const Pixel& v = target.vertices[static_cast<std::size_t>(k)];
      masked += "(" + coord_token(v.x) + "," + coord_token(v.y) + ")";
    } else {
      masked += kMaskToken;
    }
  }
  masked += ")";

  const std::string sz = size_text({pair.width, pair.height});
  TextBuilder b(InstructionKind::kPretrain);
  b.text(
       "For the target object in a query image that has the same class as the support image "
       "foreground, output coordinates of a 16-point polygon that encloses the object. These "
       "points should be arranged in a clockwise direction and the format of their coordinates "
       "is ((x1,y1),(x2,y2),...,(x16,y16)). The coordinate value should be within ")
      .text(sz)
      .text(". For support image ")
      .slot("[pseudo support image]")
      .text(", the foreground is ")
      .text(encode_polygon(pair.support_polygons.front()))
      .text(". For the target object in the query image ")
      .slot("[pseudo query image]")
      .text(", the output should be ")
      .text(masked)
      .text(". What is the remaining points?");
  return b.finish();
}

RenderedInstruction render_multishot_instruction(std::string_view category,
                                                 std::span<const std::string> attributes,
                                                 std::span<const SupportShot> shots,
                                                 ImageSize size) {
  require_category(category);
  if (shots.empty()) throw Error(ErrorCode::kTemplateInput, "multi-shot needs K >= 1 supports");
  if (attributes.empty()) throw Error(ErrorCode::kTemplateInput, "attribute list is empty");
  const std::string sz = size_text(size);

  TextBuilder b(InstructionKind::kMultiShot);
  b.text(kTaskHead)
      .text(category)
      .text(kTaskBody)
      .text("((x1,y1),(x2,y2),…,(x16,y16)). The coordinate value should be within ")
      .text(sz)
      .text(". To accomplish this task, you can refer to the following properties of ")
      .text(category)
      .text(": ")
      .text(category)
      .text(" has ")
      .text(join(attributes, ", "))
      .text(". For example, ");
  for (std::size_t k = 0; k < shots.size(); ++k) {
    const SupportShot& shot = shots[k];
    if (shot.ground_truth.empty()) {
      throw Error(ErrorCode::kTemplateInput,
                  "support " + std::to_string(k + 1) + " has no ground-truth objects");
    }
    if (k) b.text("; ");
    b.text("for image ")
        .slot("[support image " + std::to_string(k + 1) + "]")
        .text(", the output should be ")
        .text(encode_polygon_tuple(shot.ground_truth));
    const std::string clauses = region_clauses(shot.table, shot.regions);
    if (!clauses.empty()) b.text(", because in these regions, ").text(clauses);
  }
  b.text(". For image ").slot("[query image]").text(", what is the output?");
  return b.finish();
}

}  // namespace llafs
