#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <string>
#include <utility>

#include "cct/rng.hpp"
#include "cct/stemmer.hpp"

using cct::stem;

// Frozen fixtures produced by the Snowball project's generated English
// stemmer (rust-stemmers 1.2.0, Algorithm::English).
static constexpr std::array<std::pair<const char*, const char*>, 40> kFixtures{{
    {"cats", "cat"},
    {"running", "run"},
    {"a", "a"},
    {"ties", "tie"},
    {"cries", "cri"},
    {"generously", "generous"},
    {"conspicuous", "conspicu"},
    {"abatements", "abat"},
    {"nationality", "nation"},
    {"rational", "ration"},
    {"hopping", "hop"},
    {"hoping", "hope"},
    {"agreed", "agre"},
    {"feed", "feed"},
    {"luxuriated", "luxuri"},
    {"dying", "die"},
    {"lying", "lie"},
    {"skies", "sky"},
    {"early", "earli"},
    {"only", "onli"},
    {"news", "news"},
    {"communism", "communism"},
    {"happiness", "happi"},
    {"relational", "relat"},
    {"sensational", "sensat"},
    {"electricity", "electr"},
    {"vietnamization", "vietnam"},
    {"predication", "predic"},
    {"adjustable", "adjust"},
    {"defensible", "defens"},
    {"irritant", "irrit"},
    {"replacement", "replac"},
    {"dependent", "depend"},
    {"activate", "activ"},
    {"effective", "effect"},
    {"goodness", "good"},
    {"formalize", "formal"},
    {"sensitivities", "sensit"},
    {"boundaries", "boundari"},
    {"beautifully", "beauti"},
}};

TEST_CASE("stem matches the Snowball reference on frozen fixtures") {
  for (const auto& [word, expected] : kFixtures)
    CHECK(stem(word) == expected);
}

TEST_CASE("stem lowercases and handles exceptional forms") {
  CHECK(stem("Running") == "run");
  CHECK(stem("SKIES") == "sky");
  CHECK(stem("bias") == "bias");
  CHECK(stem("andes") == "andes");
  CHECK(stem("inning") == "inning");
  CHECK(stem("innings") == "inning");
  CHECK(stem("proceed") == "proceed");
  CHECK(stem("succeeding") == "succeed");
}

TEST_CASE("stem strips apostrophe suffixes") {
  CHECK(stem("dog's") == "dog");
  CHECK(stem("dogs'") == "dog");
  CHECK(stem("'cause") == "caus");
}

TEST_CASE("stem is idempotent over a 10k-word generated sample") {
  cct::Rng rng(20260810);
  static const std::string suffixes[] = {
      "",     "s",    "es",    "ed",   "ing",  "ly",    "ment", "ness",
      "ation", "ator", "ative", "al",   "ally", "ality", "ize",  "izer",
      "ous",  "ful",  "less",  "ible", "able", "ance",  "ent",  "ive",
      "ity",  "ied",  "ies",   "ion",  "eed"};
  for (int i = 0; i < 10000; ++i) {
    std::string w;
    const int len = 2 + static_cast<int>(rng.below(8));
    for (int k = 0; k < len; ++k)
      w.push_back(static_cast<char>('a' + rng.below(26)));
    w += suffixes[rng.below(std::size(suffixes))];
    const std::string once = stem(w);
    const std::string twice = stem(once);
    REQUIRE(twice == once);
  }
}
