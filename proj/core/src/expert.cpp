#include "llafs/expert.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "llafs/digest.hpp"
#include "llafs/error.hpp"

namespace llafs {

namespace {

std::string join(std::span<const std::string> items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Consumes `prefix` (case-insensitive) from the front of s.
bool eat(std::string_view& s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  if (lower(s.substr(0, prefix.size())) != lower(prefix)) return false;
  s.remove_prefix(prefix.size());
  return true;
}

std::string_view strip_period(std::string_view s) {
  s = trim(s);
  while (!s.empty() && s.back() == '.' && !s.ends_with("...")) s.remove_suffix(1);
  return trim(s);
}

std::vector<std::string> split_list(std::string_view body, std::string_view raw) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= body.size()) {
    const std::size_t comma = body.find(',', start);
    std::string_view item =
        trim(body.substr(start, comma == std::string_view::npos ? body.npos : comma - start));
    eat(item, "and ");
    item = strip_period(item);
    if (!item.empty() && item != "..." && item != "…") items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (items.empty()) throw OracleProtocolError("answer lists no items", std::string(raw));
  return items;
}

std::vector<std::string> parse_has_answer(std::string_view response, std::string_view category,
                                          bool allow_article) {
  std::string_view s = trim(response);
  if (allow_article) {
    if (!eat(s, "a ") && !eat(s, "an ")) eat(s, "the ");
  } else {
    eat(s, "the ");
  }
  s = trim(s);
  if (!eat(s, category)) {
    throw OracleProtocolError("answer does not start with the class name '" +
                                  std::string(category) + "'",
                              std::string(response));
  }
  s = trim(s);
  if (!eat(s, "has ") && !eat(s, "has:")) {
    throw OracleProtocolError("expected '" + std::string(category) + " has ...'",
                              std::string(response));
  }
  return split_list(strip_period(s), response);
}

}  // namespace

std::string attributes_prompt(std::string_view category) {
  const std::string c(category);
  return "What does a " + c + " look like? Please answer in the format of: A " + c +
         " has A, B, C,..., where A, B, and C are noun phrases to describe a " + c + ".";
}

std::string ambiguity_prompt(std::string_view category, std::span<const std::string> partial) {
  return "Except for " + std::string(category) + ", which classes also have " +
         join(partial, ", ") +
         "? Please answer in the format of: the following classes also have them: A, B, C, "
         "..., , where A, B and C are the name of classes. If there is no such a class, reply "
         "'no'.";
}

std::string discriminate_prompt(std::string_view category, std::span<const std::string> classes) {
  const std::string c(category);
  const std::string ac = join(classes, ", ");
  return "What does " + c + " look different from " + ac +
         "? Please answer in the format of: " + c +
         " has A, B, C,..., where A,B and C are noun phrases to describe the difference of " + c +
         " compared to " + ac + ".";
}

std::string discriminate_followup_prompt(std::string_view category,
                                         std::span<const std::string> classes,
                                         std::span<const std::string> seen_attributes) {
  const std::string c(category);
  const std::string ac = join(classes, ", ");
  return "Apart from " + join(seen_attributes, ", ") +
         ", tell me more differences in appearance between " + c + " and " + ac +
         ". Please answer in the format of: " + c +
         " has A, B, C,..., where A,B and C are noun phrases to describe more differences of " +
         c + " compared to " + ac + " apart from the given ones.";
}

std::vector<std::string> parse_attribute_answer(std::string_view response,
                                                std::string_view category) {
  return parse_has_answer(response, category, true);
}

std::optional<std::vector<std::string>> parse_ambiguity_answer(std::string_view response) {
  std::string_view s = strip_period(response);
  std::string bare = lower(s);
  if (bare.size() >= 2 && (bare.front() == '\'' || bare.front() == '"' || bare.front() == '`') &&
      (bare.back() == '\'' || bare.back() == '"')) {
    bare = bare.substr(1, bare.size() - 2);
  }
  if (bare == "no") return std::nullopt;
  if (!eat(s, "the following classes also have them")) {
    throw OracleProtocolError("expected 'no' or 'the following classes also have them: ...'",
                              std::string(response));
  }
  s = trim(s);
  if (!s.empty() && s.front() == ':') s.remove_prefix(1);
  return split_list(s, response);
}

std::vector<std::string> parse_discriminative_answer(std::string_view response,
                                                     std::string_view category) {
  return parse_has_answer(response, category, true);
}

std::string render_attribute_answer(std::string_view category,
                                    std::span<const std::string> items) {
  return "A " + std::string(category) + " has " + join(items, ", ") + ".";
}

std::string render_ambiguity_answer(std::span<const std::string> classes) {
  if (classes.empty()) return "no";
  return "the following classes also have them: " + join(classes, ", ");
}

std::string render_discriminative_answer(std::string_view category,
                                         std::span<const std::string> items) {
  return std::string(category) + " has " + join(items, ", ") + ".";
}

std::string canonical_prompt(std::string_view prompt) {
  std::string out;
  bool space = false;
  for (char ch : trim(prompt)) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      space = true;
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(ch);
  }
  return out;
}

std::string prompt_key(std::string_view prompt) { return sha256_hex(canonical_prompt(prompt)); }

ScriptedChat ScriptedChat::from_text(std::string_view text) {
  ScriptedChat chat;
  enum class State { kIdle, kRequest, kResponse } state = State::kIdle;
  std::string request;
  std::string response;
  auto flush = [&] {
    if (state == State::kResponse) chat.add(request, std::string(trim(response)));
    request.clear();
    response.clear();
  };
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.starts_with(">>>")) {
      flush();
      state = State::kRequest;
      request = std::string(trim(std::string_view(line).substr(3)));
    } else if (line.starts_with("<<<")) {
      if (state != State::kRequest) {
        throw Error(ErrorCode::kValidation,
                    "fixture line " + std::to_string(lineno) + ": response without request");
      }
      state = State::kResponse;
      response = std::string(trim(std::string_view(line).substr(3)));
    } else if (state == State::kRequest) {
      request += "\n" + line;
    } else if (state == State::kResponse) {
      if (line.starts_with('#')) continue;
      response += "\n" + line;
    } else if (!trim(line).empty() && !line.starts_with('#')) {
      throw Error(ErrorCode::kValidation,
                  "fixture line " + std::to_string(lineno) + ": text outside an entry");
    }
  }
  if (state == State::kRequest) {
    throw Error(ErrorCode::kValidation, "fixture ends with a request that has no response");
  }
  flush();
  return chat;
}

ScriptedChat ScriptedChat::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open fixture " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

void ScriptedChat::add(std::string_view prompt, std::string response) {
  scripts_[prompt_key(prompt)].pending.push_back(std::move(response));
}

std::string ScriptedChat::complete(std::string_view prompt) {
  requests_.push_back(canonical_prompt(prompt));
  auto it = scripts_.find(prompt_key(prompt));
  if (it == scripts_.end()) {
    throw Error(ErrorCode::kOracleProtocol,
                "no scripted response for prompt: " + canonical_prompt(prompt));
  }
  Script& s = it->second;
  if (!s.pending.empty()) {
    s.last = std::move(s.pending.front());
    s.pending.pop_front();
  }
  return s.last;
}

std::vector<std::string> ChatExpertOracle::list_attributes(std::string_view category) {
  return parse_attribute_answer(backend_.complete(attributes_prompt(category)), category);
}

std::vector<std::string> ChatExpertOracle::detect_ambiguity(
    std::string_view category, std::span<const std::string> partial) {
  auto classes = parse_ambiguity_answer(backend_.complete(ambiguity_prompt(category, partial)));
  return classes ? *classes : std::vector<std::string>{};
}

std::vector<std::string> ChatExpertOracle::discriminate(std::string_view category,
                                                        std::span<const std::string> classes,
                                                        std::span<const std::string> seen) {
  const std::string prompt = seen.empty()
                                 ? discriminate_prompt(category, classes)
                                 : discriminate_followup_prompt(category, classes, seen);
  return parse_discriminative_answer(backend_.complete(prompt), category);
}

}  // namespace llafs
