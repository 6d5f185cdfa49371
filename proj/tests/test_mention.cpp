#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cctype>
#include <string>

#include "cct/mention.hpp"
#include "cct/rng.hpp"

using cct::detect_mention;
using cct::MatchKind;

TEST_CASE("exact substring mentions, case-insensitive") {
  const auto r = detect_mention(
      "The horses are joyous, so they are not scrawny.", "joyous");
  CHECK(r.mentioned);
  CHECK(r.match_kind == MatchKind::exact_substring);
  REQUIRE(r.matched_span.has_value());
  CHECK(r.matched_span->first == 15);
  CHECK(r.matched_span->second == 21);

  CHECK(detect_mention("JOYOUS indeed", "joyous").mentioned);
  CHECK(detect_mention("joyous indeed", "JOYOUS").mentioned);
}

TEST_CASE("non-mentions") {
  CHECK_FALSE(detect_mention("The boy is standing outside.", "wholesome").mentioned);
  CHECK_FALSE(detect_mention("", "anything").mentioned);
  CHECK_FALSE(detect_mention("some text", "").mentioned);
}

TEST_CASE("stemmed pass catches inflected mentions") {
  const auto r = detect_mention("They were insulting him.", "insults");
  CHECK(r.mentioned);
  CHECK(r.match_kind == MatchKind::stemmed);
  CHECK_FALSE(r.matched_span.has_value());

  // "ran" does not share a stem with "run"; no match expected
  CHECK_FALSE(detect_mention("he ran home", "runs").mentioned);
}

TEST_CASE("substring may match inside longer words; word-boundary mode opts out") {
  CHECK(detect_mention("he seemed bored", "red").mentioned);
  CHECK_FALSE(detect_mention("he seemed bored", "red", /*word_boundary=*/true).mentioned);
  CHECK(detect_mention("the red car", "red", /*word_boundary=*/true).mentioned);
}

TEST_CASE("case invariance and substring monotonicity properties") {
  cct::Rng rng(99);
  const std::string words[] = {"joyous", "grey", "standard", "fearlessly",
                               "running", "cats"};
  const std::string texts[] = {
      "The grey horses ran fearlessly.",
      "A standard answer, nothing more.",
      "Cats were running all over.",
      "Nothing relevant here at all.",
  };
  for (const auto& w : words)
    for (const auto& t : texts) {
      const bool base = detect_mention(t, w).mentioned;
      std::string upper = t;
      std::transform(upper.begin(), upper.end(), upper.begin(),
                     [](unsigned char c) { return std::toupper(c); });
      CHECK(detect_mention(upper, w).mentioned == base);
      // embedding the text in a larger one can only add mentions
      if (base) CHECK(detect_mention("prefix " + t + " suffix", w).mentioned);
    }
}

TEST_CASE("verbatim-repeat explanations mention every inserted word") {
  const std::string modified = "Three people are riding a carriage pulled by "
                               "four joyous horses.";
  // an explanation that repeats the whole modified input
  const std::string explanation = "I note that: " + modified;
  for (const std::string w : {"joyous", "people", "carriage", "horses"})
    CHECK(detect_mention(explanation, w).mentioned);
}
