#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llafs/tablegen.hpp"

namespace llafs {

// Chat prompts: the question followed by its answer-format control sentence.

std::string attributes_prompt(std::string_view category);
std::string ambiguity_prompt(std::string_view category, std::span<const std::string> partial);
std::string discriminate_prompt(std::string_view category, std::span<const std::string> classes);
/// Variant used from the second round on.
std::string discriminate_followup_prompt(std::string_view category,
                                         std::span<const std::string> classes,
                                         std::span<const std::string> seen_attributes);

// Answer grammars. Matching is case-insensitive; lists are comma separated
// with an optional leading "and" on an item; "..." items and empty items are
// dropped; a trailing period is ignored. Violations throw OracleProtocolError
// carrying the raw response.

/// "A <category> has X, Y, Z."
std::vector<std::string> parse_attribute_answer(std::string_view response,
                                                std::string_view category);
/// "the following classes also have them: A, B" or "no" (returns nullopt).
std::optional<std::vector<std::string>> parse_ambiguity_answer(std::string_view response);
/// "<category> has X, Y, Z"
std::vector<std::string> parse_discriminative_answer(std::string_view response,
                                                     std::string_view category);

std::string render_attribute_answer(std::string_view category, std::span<const std::string> items);
std::string render_ambiguity_answer(std::span<const std::string> classes);
std::string render_discriminative_answer(std::string_view category,
                                         std::span<const std::string> items);

/// Whitespace runs collapsed to one space, ends trimmed.
std::string canonical_prompt(std::string_view prompt);
/// SHA-256 (hex) of canonical_prompt(prompt).
std::string prompt_key(std::string_view prompt);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(std::string_view prompt) = 0;
};

/// Replays request/response pairs keyed by prompt_key(). A prompt scripted
/// more than once answers in order and then repeats its last answer.
///
/// Fixture text format:
///   # comment
///   >>> <request line(s)>
///   <<< <response line(s)>
/// A request runs until the next "<<<" line; a response until the next
/// ">>>" line or end of file. Not thread-safe.
class ScriptedChat final : public ChatBackend {
 public:
  ScriptedChat() = default;

  static ScriptedChat from_text(std::string_view text);
  static ScriptedChat from_file(const std::filesystem::path& path);

  void add(std::string_view prompt, std::string response);
  std::string complete(std::string_view prompt) override;

  /// Canonical prompts in the order they were asked.
  const std::vector<std::string>& requests() const noexcept { return requests_; }

 private:
  struct Script {
    std::deque<std::string> pending;
    std::string last;
  };
  std::map<std::string, Script> scripts_;
  std::vector<std::string> requests_;
};

/// ExpertOracle that renders the chat prompts, sends them to a backend and
/// parses the answers with the grammars above.
class ChatExpertOracle final : public ExpertOracle {
 public:
  explicit ChatExpertOracle(ChatBackend& backend) : backend_(backend) {}

  std::vector<std::string> list_attributes(std::string_view category) override;
  std::vector<std::string> detect_ambiguity(std::string_view category,
                                            std::span<const std::string> partial) override;
  std::vector<std::string> discriminate(std::string_view category,
                                        std::span<const std::string> classes,
                                        std::span<const std::string> seen) override;

 private:
  ChatBackend& backend_;
};

}  // namespace llafs
