#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "cct/dataset.hpp"
#include "cct/intervention.hpp"
#include "cct/model.hpp"
#include "cct/naturalness.hpp"
#include "cct/wordnet.hpp"

using namespace cct;
namespace fs = std::filesystem;

static const fs::path kFixtures = CCT_TEST_FIXTURES;

namespace {

Example paper_example() {
  const auto esnli =
      ingest_dataset(kFixtures / "datasets/esnli_mini.jsonl", Task::esnli);
  return esnli[0];  // carriage/horses example, pre-annotated
}

WordInventory fixture_inventory() {
  return load_wordnet(kFixtures / "wordnet/index.adj",
                      kFixtures / "wordnet/index.adv");
}

}  // namespace

TEST_CASE("insertion places word before anchor; segment-initial case transfer") {
  CHECK(apply_insertion("Three people riding.", "joyous", 6) ==
        "Three joyous people riding.");
  // capitalized segment-initial anchor hands its capitalization over
  CHECK(apply_insertion("Man wearing blue.", "shaky", 0) ==
        "Shaky man wearing blue.");
  // lowercase segment-initial anchor keeps everything lowercase
  CHECK(apply_insertion("cars are useful.", "grey", 0) == "grey cars are useful.");
}

TEST_CASE("removal inverts insertion byte-exactly") {
  const std::string originals[] = {"Man wearing blue.", "cars are useful.",
                                   "Three people riding."};
  const std::size_t offsets[] = {0, 0, 6};
  for (int i = 0; i < 3; ++i) {
    Intervention iv;
    iv.inserted_word = "joyous";
    iv.modified_text = apply_insertion(originals[i], "joyous", offsets[i]);
    CHECK(remove_insertion(iv, offsets[i]) == originals[i]);
  }
}

TEST_CASE("generate_interventions: counts, distinctness, class discipline") {
  const Example ex = paper_example();
  const WordInventory inv = fixture_inventory();
  InterventionConfig config;  // 4 positions x 20 candidates

  Rng rng(derive_seed(42, "intervene", ex.id));
  const auto interventions = generate_interventions(ex, inv, rng, config);
  CHECK(interventions.size() == 80);

  std::set<std::pair<std::size_t, std::string>> pairs;
  std::set<std::size_t> anchors;
  for (const Intervention& iv : interventions) {
    pairs.insert({iv.anchor_token_index, iv.inserted_word});
    anchors.insert(iv.anchor_token_index);
    // ADJ before NOUN, ADV before VERB, never crossed
    const Token& anchor = ex.tokens->at(iv.anchor_token_index);
    CHECK(anchor.pos == iv.anchor_pos);
    if (anchor.pos == Pos::NOUN) CHECK(iv.word_class == Pos::ADJ);
    if (anchor.pos == Pos::VERB) CHECK(iv.word_class == Pos::ADV);
    const auto& pool = inv.for_word_class(iv.word_class);
    CHECK(std::binary_search(pool.begin(), pool.end(), iv.inserted_word));
  }
  CHECK(pairs.size() == 80);
  CHECK(anchors.size() == 4);
}

TEST_CASE("generate_interventions is a pure function of (example, seed)") {
  const Example ex = paper_example();
  const WordInventory inv = fixture_inventory();
  Rng rng1(derive_seed(7, "intervene", ex.id));
  Rng rng2(derive_seed(7, "intervene", ex.id));
  Rng rng3(derive_seed(8, "intervene", ex.id));
  const auto a = generate_interventions(ex, inv, rng1);
  const auto b = generate_interventions(ex, inv, rng2);
  const auto c = generate_interventions(ex, inv, rng3);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("insertion locality holds for every generated intervention") {
  const Example ex = paper_example();
  const WordInventory inv = fixture_inventory();
  Rng rng(derive_seed(99, "intervene", ex.id));
  for (const Intervention& iv : generate_interventions(ex, inv, rng)) {
    const Token& anchor = ex.tokens->at(iv.anchor_token_index);
    CHECK(remove_insertion(iv, anchor.char_offset) == ex.field(iv.segment));
  }
}

TEST_CASE("no eligible anchors yields an empty list") {
  Example ex;
  ex.id = "none";
  ex.task = Task::comve;
  ex.fields = {{"sentence0", "yes indeed"}, {"sentence1", "quite so"}};
  ex.gold_label = 0;
  ex.tokens = std::vector<Token>{};  // annotated, but nothing tagged
  Rng rng(1);
  CHECK(generate_interventions(ex, fixture_inventory(), rng).empty());
}

TEST_CASE("candidates whose stem occurs in the input are excluded") {
  const WordInventory inv = fixture_inventory();
  Example ex;
  ex.id = "stems";
  ex.task = Task::comve;
  // "grey" and "joyous" appear in the input; "gloriously" stems to "glorious"
  ex.fields = {{"sentence0", "the grey cat seemed joyous"},
               {"sentence1", "it walked gloriously by"}};
  ex.gold_label = 0;
  std::vector<Token> toks;
  Token t;
  t.surface = "cat";
  t.pos = Pos::NOUN;
  t.char_offset = 9;
  t.segment = "sentence0";
  toks.push_back(t);
  t.surface = "walked";
  t.pos = Pos::VERB;
  t.char_offset = 3;
  t.segment = "sentence1";
  toks.push_back(t);
  ex.tokens = toks;

  InterventionConfig config;
  config.positions = 2;
  config.candidates_per_position = 1000;  // take the whole pool
  Rng rng(5);
  const auto interventions = generate_interventions(ex, inv, rng, config);
  for (const Intervention& iv : interventions) {
    CHECK(iv.inserted_word != "grey");
    CHECK(iv.inserted_word != "joyous");
    CHECK(iv.inserted_word != "gloriously");
  }

  config.exclude_input_stems = false;
  Rng rng2(5);
  bool saw_excluded = false;
  for (const auto& iv : generate_interventions(ex, inv, rng2, config))
    saw_excluded |= (iv.inserted_word == "grey" || iv.inserted_word == "joyous" ||
                     iv.inserted_word == "gloriously");
  CHECK(saw_excluded);
}

TEST_CASE("filter keeps max(1, round(f*N)) by score with stable tie-break") {
  std::vector<Intervention> ivs;
  for (int i = 0; i < 80; ++i) {
    Intervention iv;
    iv.example_id = "e";
    iv.anchor_token_index = i % 4;
    iv.inserted_word = "w" + std::to_string(i);
    iv.naturalness_score = (i * 37 % 80) / 80.0;
    ivs.push_back(iv);
  }
  const auto kept = filter_top_fraction(ivs, 0.2);
  CHECK(kept.size() == 16);
  // monotonicity: every kept score >= every discarded score
  double min_kept = 2.0;
  for (const auto& iv : kept) min_kept = std::min(min_kept, *iv.naturalness_score);
  for (const auto& iv : ivs)
    if (!iv.kept) CHECK(*iv.naturalness_score <= min_kept);

  SECTION("single intervention is always kept") {
    std::vector<Intervention> one(ivs.begin(), ivs.begin() + 1);
    CHECK(filter_top_fraction(one, 0.2).size() == 1);
  }

  SECTION("equal scores select a stable subset across reruns") {
    for (auto& iv : ivs) iv.naturalness_score = 0.5;
    const auto first = filter_top_fraction(ivs, 0.2);
    std::vector<Intervention> again = ivs;
    const auto second = filter_top_fraction(again, 0.2);
    REQUIRE(first.size() == second.size());
    CHECK(first == second);
    // tie-break is (anchor_token_index, inserted_word) lexicographic
    for (std::size_t i = 1; i < first.size(); ++i) {
      const auto a = std::make_pair(first[i - 1].anchor_token_index,
                                    first[i - 1].inserted_word);
      const auto b =
          std::make_pair(first[i].anchor_token_index, first[i].inserted_word);
      CHECK(a < b);
    }
  }

  SECTION("empty input, empty output") {
    std::vector<Intervention> none;
    CHECK(filter_top_fraction(none, 0.2).empty());
  }
}

TEST_CASE("naturalness scoring renormalizes yes/no first-token mass") {
  ModelResponse resp;
  resp.label_position_found = true;

  resp.label_token_probs = {{"Yes", 0.9}, {"No", 0.1}};
  CHECK_THAT(score_naturalness_response(resp).score,
             Catch::Matchers::WithinAbs(0.9, 1e-12));

  resp.label_token_probs = {{"Yes", 0.03}, {"No", 0.01}, {"Maybe", 0.5}};
  CHECK_THAT(score_naturalness_response(resp).score,
             Catch::Matchers::WithinAbs(0.75, 1e-12));

  // case and punctuation variants of the first token still count
  resp.label_token_probs = {{" yes", 0.2}, {"Yes,", 0.2}, {"NO", 0.1}};
  CHECK_THAT(score_naturalness_response(resp).score,
             Catch::Matchers::WithinAbs(0.8, 1e-12));

  // neither token present: 0.5 with a flag
  resp.label_token_probs = {{"Maybe", 0.9}};
  const auto flagged = score_naturalness_response(resp);
  CHECK(flagged.score == 0.5);
  CHECK(flagged.flagged);

  // no logprobs at all: parse the generated text
  resp.label_token_probs.clear();
  resp.generated_text = "Yes, it reads fine.";
  CHECK(score_naturalness_response(resp).score == 1.0);
  resp.generated_text = "No.";
  CHECK(score_naturalness_response(resp).score == 0.0);
}

TEST_CASE("stub judge hardwired to yes gives every intervention 1.0") {
  StubJudge judge(StubJudge::Mode::yes);
  Intervention iv;
  iv.modified_text = "The grey cat sat.";
  const auto ns = score_naturalness(iv, "The cat sat.", judge);
  CHECK(ns.score == 1.0);
  CHECK_FALSE(ns.flagged);
}

TEST_CASE("naturalness prompt carries both sentences in the template") {
  const std::string p = naturalness_prompt("The cat sat.", "The grey cat sat.");
  CHECK(p.find("Sentence 1: \"The cat sat.\"") != std::string::npos);
  CHECK(p.find("Sentence 2: \"The grey cat sat.\"") != std::string::npos);
  CHECK(p.rfind("[INST]", 0) == 0);
  CHECK(p.find("[/INST]") != std::string::npos);
  CHECK(p.find("begin your answer with \"Yes\" or \"No\"") != std::string::npos);

  const std::string custom =
      naturalness_prompt("a", "b", "Q: {sentence1} vs {sentence2}?");
  CHECK(custom == "Q: a vs b?");
  CHECK_THROWS(naturalness_prompt("a", "b", "no placeholders"));
}

TEST_CASE("intervention JSON round-trip") {
  Intervention iv;
  iv.example_id = "e9";
  iv.segment = "hypothesis";
  iv.anchor_token_index = 3;
  iv.anchor_pos = Pos::VERB;
  iv.inserted_word = "gloriously";
  iv.word_class = Pos::ADV;
  iv.modified_text = "Children are gloriously playing.";
  iv.naturalness_score = 0.875;
  iv.kept = true;
  CHECK(intervention_from_json(intervention_to_json(iv)) == iv);
  iv.naturalness_score = std::nullopt;
  CHECK(intervention_from_json(intervention_to_json(iv)) == iv);
}
