#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cct/cache.hpp"
#include "cct/dataset.hpp"
#include "cct/manifest.hpp"
#include "cct/records.hpp"
#include "cct/rng.hpp"

using namespace cct;

namespace fs = std::filesystem;

static const fs::path kFixtures = CCT_TEST_FIXTURES;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() /
                     ("cct-test-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double recomputed_tvd(const EvaluationRecord& r) {
  double s = 0;
  for (std::size_t i = 0; i < r.pre_distribution.probs.size(); ++i)
    s += std::abs(r.pre_distribution.probs[i] - r.post_distribution->probs[i]);
  return 0.5 * s;
}

EvaluationRecord random_record(Rng& rng, const std::string& id) {
  EvaluationRecord r;
  r.example_id = id;
  r.pre_distribution = LabelDistribution::for_task(Task::comve);
  r.pre_distribution.probs = {rng.unit() * 0.5, rng.unit() * 0.5};
  r.pre_label = r.pre_distribution.argmax_label();
  if (rng.bernoulli(0.7)) {
    Intervention iv;
    iv.example_id = id;
    iv.segment = "sentence0";
    iv.anchor_token_index = rng.below(5);
    iv.anchor_pos = rng.bernoulli(0.5) ? Pos::NOUN : Pos::VERB;
    iv.word_class = iv.anchor_pos == Pos::NOUN ? Pos::ADJ : Pos::ADV;
    iv.inserted_word = "word" + std::to_string(rng.below(100));
    iv.modified_text = "some " + iv.inserted_word + " text";
    iv.naturalness_score = rng.bernoulli(0.8)
                               ? std::optional<double>(rng.unit())
                               : std::nullopt;
    iv.kept = true;
    r.intervention = iv;
    r.post_distribution = LabelDistribution::for_task(Task::comve);
    r.post_distribution->probs = {rng.unit() * 0.5, rng.unit() * 0.5};
    r.post_label = r.post_distribution->argmax_label();
    r.impact = recomputed_tvd(r);
    r.mentioned = rng.bernoulli(0.5);
    r.explanation_text = "because " + iv.inserted_word;
  } else {
    r.explanation_text = "baseline explanation";
  }
  return r;
}

}  // namespace

TEST_CASE("ingest_dataset reads the three schemas") {
  const auto esnli =
      ingest_dataset(kFixtures / "datasets/esnli_mini.jsonl", Task::esnli);
  REQUIRE(esnli.size() == 6);
  CHECK(esnli[0].id == "esnli-1");
  CHECK(esnli[0].field("text") ==
        "Three people are riding a carriage pulled by four horses.");
  CHECK(esnli[0].gold_label == 1);  // neutral
  REQUIRE(esnli[0].tokens.has_value());
  CHECK(esnli[0].tokens->at(1).surface == "people");
  CHECK(esnli[0].tokens->at(1).pos == Pos::NOUN);

  const auto comve =
      ingest_dataset(kFixtures / "datasets/comve_mini.jsonl", Task::comve);
  REQUIRE(comve.size() == 3);
  for (const auto& ex : comve) CHECK((ex.gold_label == 0 || ex.gold_label == 1));

  const auto ecqa =
      ingest_dataset(kFixtures / "datasets/ecqa_mini.jsonl", Task::ecqa);
  REQUIRE(ecqa.size() == 2);
  CHECK(ecqa[0].field("option3") == "house");
  CHECK(ecqa[0].gold_label == 3);
}

TEST_CASE("ingest rejects malformed lines with line numbers") {
  const fs::path dir = temp_dir("ingest");

  SECTION("malformed json") {
    std::ofstream(dir / "bad.jsonl")
        << R"({"id":"x","sentence0":"a","sentence1":"b","label":0,"explanation":""})"
        << "\n{not json\n";
    try {
      ingest_dataset(dir / "bad.jsonl", Task::comve);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
  SECTION("unknown label string") {
    std::ofstream(dir / "label.jsonl")
        << R"({"id":"x","text":"a","hypothesis":"b","label":"maybe","explanation":""})"
        << '\n';
    CHECK_THROWS_AS(ingest_dataset(dir / "label.jsonl", Task::esnli),
                    SchemaError);
  }
  SECTION("wrong option count") {
    std::ofstream(dir / "opts.jsonl")
        << R"({"id":"x","question":"q","options":["a","b","c"],"label":1,"explanation":""})"
        << '\n';
    CHECK_THROWS_AS(ingest_dataset(dir / "opts.jsonl", Task::ecqa), SchemaError);
  }
  SECTION("label out of range") {
    std::ofstream(dir / "range.jsonl")
        << R"({"id":"x","sentence0":"a","sentence1":"b","label":2,"explanation":""})"
        << '\n';
    CHECK_THROWS_AS(ingest_dataset(dir / "range.jsonl", Task::comve),
                    SchemaError);
  }
  SECTION("token offsets must match the text") {
    std::ofstream(dir / "tok.jsonl")
        << R"({"id":"x","sentence0":"a cat","sentence1":"b","label":0,"explanation":"",)"
        << R"("tokens":[{"surface":"cat","pos":"NOUN","char_offset":0,"segment":"sentence0"}]})"
        << '\n';
    CHECK_THROWS_AS(ingest_dataset(dir / "tok.jsonl", Task::comve), SchemaError);
  }
  fs::remove_all(dir);
}

TEST_CASE("ingest: empty file gives empty list; determinism on bytes") {
  const fs::path dir = temp_dir("empty");
  std::ofstream(dir / "empty.jsonl");
  CHECK(ingest_dataset(dir / "empty.jsonl", Task::comve).empty());

  const auto a =
      ingest_dataset(kFixtures / "datasets/comve_mini.jsonl", Task::comve);
  const auto b =
      ingest_dataset(kFixtures / "datasets/comve_mini.jsonl", Task::comve);
  CHECK(a == b);
  fs::remove_all(dir);
}

TEST_CASE("ingest scale: one example per line at the e-SNLI test-set size") {
  const fs::path dir = temp_dir("scale");
  {
    std::ofstream out(dir / "esnli.jsonl");
    for (int i = 0; i < 9842; ++i)
      out << R"({"id":"e)" << i
          << R"(","text":"a","hypothesis":"b","label":"neutral","explanation":"x"})"
          << '\n';
  }
  CHECK(ingest_dataset(dir / "esnli.jsonl", Task::esnli).size() == 9842);
  fs::remove_all(dir);
}

TEST_CASE("records round-trip field-for-field") {
  const fs::path dir = temp_dir("records");
  const fs::path path = dir / "records.jsonl";

  SECTION("zero records give an empty file") {
    write_records({}, path);
    CHECK(fs::file_size(path) == 0);
    CHECK(read_records(path).empty());
  }

  SECTION("random records round-trip exactly") {
    Rng rng(2718);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<EvaluationRecord> records;
      const std::size_t n = 1 + rng.below(8);
      for (std::size_t i = 0; i < n; ++i)
        records.push_back(random_record(rng, "ex" + std::to_string(i)));
      write_records(records, path);
      const auto back = read_records(path);
      REQUIRE(back.size() == records.size());
      for (std::size_t i = 0; i < records.size(); ++i)
        CHECK(back[i] == records[i]);
    }
  }

  SECTION("distributions survive with full precision") {
    EvaluationRecord r;
    r.example_id = "p";
    r.pre_distribution = LabelDistribution::for_task(Task::esnli);
    r.pre_distribution.probs = {0.001, 0.75, 0.2489999999999999991};
    r.pre_label = 1;
    Intervention iv;
    iv.example_id = "p";
    iv.inserted_word = "joyous";
    iv.modified_text = "joyous text";
    r.intervention = iv;
    r.post_distribution = LabelDistribution::for_task(Task::esnli);
    r.post_distribution->probs = {0.001, 0.049, 0.944};
    r.post_label = 2;
    r.impact = 0.7045;
    r.mentioned = true;
    write_records({r}, path);
    const auto back = read_records(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].pre_distribution.probs == r.pre_distribution.probs);
    CHECK(back[0].impact == r.impact);
  }
  fs::remove_all(dir);
}

TEST_CASE("baseline/intervention record invariants validate") {
  EvaluationRecord baseline;
  baseline.example_id = "b";
  baseline.pre_distribution = LabelDistribution::for_task(Task::comve);
  baseline.pre_distribution.probs = {0.9, 0.1};
  CHECK_NOTHROW(validate_record(baseline));
  baseline.impact = 0.3;
  CHECK_THROWS_AS(validate_record(baseline), SchemaError);
}

TEST_CASE("cache stores, hits, and treats corruption as a miss") {
  const fs::path dir = temp_dir("cache");
  ResponseCache cache(dir / "cache");

  CHECK_FALSE(cache.lookup("model", "prompt").has_value());

  cache.store("model", "prompt", "payload bytes \x01\x02");
  const auto hit = cache.lookup("model", "prompt");
  REQUIRE(hit.has_value());
  CHECK(*hit == "payload bytes \x01\x02");

  // one-character prompt difference lands in a different key
  cache.store("model", "prompt", "other");
  CHECK(*cache.lookup("model", "prompt") == "other");
  CHECK(*cache.lookup("model", "prompt") == "payload bytes \x01\x02");
  CHECK(ResponseCache::key("model", "prompt") !=
        ResponseCache::key("model", "prompt"));
  CHECK(ResponseCache::key("model", "prompt") !=
        ResponseCache::key("model2", "prompt"));

  // layout: <dir>/<first-2-hex>/<hash>.json
  const std::string key = ResponseCache::key("model", "prompt");
  CHECK(fs::exists(dir / "cache" / key.substr(0, 2) / (key + ".json")));

  // corrupt the entry; lookup degrades to a miss
  std::ofstream(dir / "cache" / key.substr(0, 2) / (key + ".json"))
      << "{truncated";
  CHECK_FALSE(cache.lookup("model", "prompt").has_value());
  fs::remove_all(dir);
}

TEST_CASE("manifest round-trips and validates") {
  RunManifest m;
  m.run_id = "r1";
  m.model_id = "glassbox";
  m.prompt_order = PromptOrder::EP;
  m.dataset = Task::ecqa;
  m.rng_seed = 0xdeadbeefcafe1234ULL;
  m.few_shot_count = 20;
  m.filter_keep_fraction = 0.2;
  m.created_at = "2026-08-10T00:00:00Z";

  const auto j = manifest_to_json(m);
  const RunManifest back = manifest_from_json(j);
  CHECK(back.run_id == m.run_id);
  CHECK(back.rng_seed == m.rng_seed);
  CHECK(back.prompt_order == PromptOrder::EP);
  CHECK(manifest_hash(back) == manifest_hash(m));
  CHECK(j.at("verbalizers").at("3") == "3");

  RunManifest bad = m;
  bad.few_shot_count = 0;
  CHECK_THROWS_AS(bad.validate(), SchemaError);
  bad = m;
  bad.filter_keep_fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(), SchemaError);
}
