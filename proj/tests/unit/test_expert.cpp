#include <doctest.h>

#include "llafs/error.hpp"
#include "llafs/expert.hpp"

using Strings = std::vector<std::string>;

namespace {

bool protocol_error(auto&& fn, std::string_view raw) {
  try {
    fn();
  } catch (const llafs::OracleProtocolError& e) {
    return e.raw_response() == raw;
  }
  return false;
}

}  // namespace

TEST_SUITE("expert") {
  TEST_CASE("prompts") {
    CHECK(llafs::attributes_prompt("owl") ==
          "What does a owl look like? Please answer in the format of: A owl has A, B, C,..., "
          "where A, B, and C are noun phrases to describe a owl.");
    const Strings classes{"hawk", "eagle"};
    CHECK(llafs::discriminate_prompt("owl", classes) ==
          "What does owl look different from hawk, eagle? Please answer in the format of: owl "
          "has A, B, C,..., where A,B and C are noun phrases to describe the difference of owl "
          "compared to hawk, eagle.");
    CHECK(llafs::discriminate_followup_prompt("owl", classes, Strings{"ear tufts"}).starts_with(
        "Apart from ear tufts, tell me more differences in appearance between owl and hawk, eagle."));
    CHECK(llafs::ambiguity_prompt("owl", Strings{"large eyes"}).starts_with(
        "Except for owl, which classes also have large eyes? "));
  }

  TEST_CASE("attribute answers") {
    CHECK(llafs::parse_attribute_answer("A owl has large eyes, a short beak, and soft feathers.", "owl") ==
          Strings{"large eyes", "a short beak", "soft feathers"});
    CHECK(llafs::parse_attribute_answer("an OWL has: eyes, ..., beak", "owl") == Strings{"eyes", "beak"});
    CHECK(llafs::parse_attribute_answer("Owl has eyes", "owl") == Strings{"eyes"});
    CHECK(protocol_error([] { llafs::parse_attribute_answer("A cat has eyes", "owl"); }, "A cat has eyes"));
    CHECK(protocol_error([] { llafs::parse_attribute_answer("owl is round", "owl"); }, "owl is round"));
    CHECK(protocol_error([] { llafs::parse_attribute_answer("owl has ..., ,", "owl"); }, "owl has ..., ,"));
  }

  TEST_CASE("ambiguity answers") {
    CHECK_FALSE(llafs::parse_ambiguity_answer("no").has_value());
    CHECK_FALSE(llafs::parse_ambiguity_answer(" No. ").has_value());
    CHECK_FALSE(llafs::parse_ambiguity_answer("'no'").has_value());
    CHECK(*llafs::parse_ambiguity_answer("The following classes also have them: hawk, and eagle.") ==
          Strings{"hawk", "eagle"});
    CHECK(*llafs::parse_ambiguity_answer("the following classes also have them: A, B, C, ..., ") ==
          Strings{"A", "B", "C"});
    CHECK(protocol_error([] { llafs::parse_ambiguity_answer("hawks, probably"); }, "hawks, probably"));
    CHECK(protocol_error([] { llafs::parse_ambiguity_answer("nope"); }, "nope"));
  }

  TEST_CASE("discriminative answers") {
    CHECK(llafs::parse_discriminative_answer("owl has facial disc, ear tufts.", "owl") ==
          Strings{"facial disc", "ear tufts"});
    CHECK(llafs::parse_discriminative_answer("The owl has facial disc", "owl") == Strings{"facial disc"});
    CHECK(protocol_error([] { llafs::parse_discriminative_answer("", "owl"); }, ""));
  }

  TEST_CASE("accepted answers round-trip through the renderers") {
    const Strings items{"large eyes", "short beak"};
    for (const std::string raw : {"A owl has large eyes, short beak.", "an owl has large eyes, and short beak"}) {
      const auto parsed = llafs::parse_attribute_answer(raw, "owl");
      const auto again = llafs::render_attribute_answer("owl", parsed);
      CHECK(again == "A owl has large eyes, short beak.");
      CHECK(llafs::parse_attribute_answer(again, "owl") == parsed);
    }
    const auto cls = *llafs::parse_ambiguity_answer("the following classes also have them: hawk, eagle.");
    CHECK(*llafs::parse_ambiguity_answer(llafs::render_ambiguity_answer(cls)) == cls);
    CHECK(llafs::render_ambiguity_answer({}) == "no");
    const auto d = llafs::parse_discriminative_answer("owl has ear tufts, and silent flight.", "owl");
    CHECK(llafs::render_discriminative_answer("owl", d) == "owl has ear tufts, silent flight.");
    CHECK(llafs::parse_discriminative_answer(llafs::render_discriminative_answer("owl", d), "owl") == d);
  }

  TEST_CASE("canonical prompts and keys") {
    CHECK(llafs::canonical_prompt("  a\n\tb   c ") == "a b c");
    CHECK(llafs::prompt_key("a  b") == llafs::prompt_key("a\nb"));
    CHECK(llafs::prompt_key("a b") != llafs::prompt_key("a c"));
    CHECK(llafs::prompt_key("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  }

  TEST_CASE("scripted chat") {
    auto chat = llafs::ScriptedChat::from_text(
        "# comment\n"
        ">>> first\n  prompt\n"
        "<<< one\n"
        ">>> first prompt\n"
        "<<< two\nlines\n"
        "\n"
        ">>> other\n"
        "<<< x\n");
    CHECK(chat.complete("first prompt") == "one");
    CHECK(chat.complete("first\tprompt") == "two\nlines");
    CHECK(chat.complete("first prompt") == "two\nlines");
    CHECK(chat.complete("other") == "x");
    CHECK(chat.requests() == Strings{"first prompt", "first prompt", "first prompt", "other"});
    CHECK_THROWS_AS(chat.complete("unknown"), llafs::Error);

    CHECK_THROWS_AS(llafs::ScriptedChat::from_text("<<< orphan\n"), llafs::Error);
    CHECK_THROWS_AS(llafs::ScriptedChat::from_text(">>> dangling\n"), llafs::Error);
    CHECK_THROWS_AS(llafs::ScriptedChat::from_text("stray\n"), llafs::Error);
    CHECK_THROWS_AS(llafs::ScriptedChat::from_file("/nonexistent/fixture.txt"), llafs::Error);
  }

  TEST_CASE("chat expert oracle") {
    llafs::ScriptedChat chat;
    chat.add(llafs::attributes_prompt("owl"), "A owl has large eyes, short beak.");
    const Strings partial{"large eyes"};
    chat.add(llafs::ambiguity_prompt("owl", partial), "no");
    const Strings classes{"hawk"};
    chat.add(llafs::discriminate_prompt("owl", classes), "owl has ear tufts");
    chat.add(llafs::discriminate_followup_prompt("owl", classes, Strings{"ear tufts"}), "owl has talons");
    llafs::ChatExpertOracle oracle(chat);
    CHECK(oracle.list_attributes("owl") == Strings{"large eyes", "short beak"});
    CHECK(oracle.detect_ambiguity("owl", partial).empty());
    CHECK(oracle.discriminate("owl", classes, {}) == Strings{"ear tufts"});
    CHECK(oracle.discriminate("owl", classes, Strings{"ear tufts"}) == Strings{"talons"});
  }
}
