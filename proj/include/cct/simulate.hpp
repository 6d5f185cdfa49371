#pragma once

// Fully offline glass-box sweeps: a synthetic pre-annotated dataset, a
// two-point impact lexicon (half the candidate words push the prediction
// hard, half do nothing), and a configurable explanation policy. This is the
// harness that demonstrates what each metric can and cannot see: the
// verbatim policy defeats CT unfaithfulness (0%) while leaving CCT
// degenerate; the oracle policy drives CCT toward 1; the random policy
// centers it on 0.

#include <string>
#include <vector>

#include "cct/glassbox.hpp"
#include "cct/pipeline.hpp"
#include "cct/report.hpp"

namespace cct {

struct SimulationSpec {
  GlassBoxPolicy policy;
  int n_examples = 125;
  int positions = 4;
  int candidates_per_position = 20;
  double keep_fraction = 0.2;
  std::uint64_t seed = 1234;
  int n_impact_words = 100;  // alternating high / zero impact by index
  double high_delta = 6.0;   // logit push toward label 1
  double noise = 0.0;
  int concurrency = 1;
  std::filesystem::path run_dir;  // optional persistence
};

struct SimulationResult {
  RunManifest manifest;
  std::vector<Example> test_set;
  std::vector<Example> train_pool;
  WordInventory inventory;
  GlassBoxConfig config;
  RunResult run;
  FaithfulnessReport report;
};

namespace sim_detail {

// Candidate word for index i: lowercase alphabetic, unique, and
// prefix-coded by class so the lexicon stays collision-free under substring
// matching: high-impact words start "zua", zero-impact words start "zub".
inline std::string impact_word(int i, bool high, bool adverb) {
  std::string w = high ? "zua" : "zub";
  w += adverb ? 'v' : 'j';
  w += static_cast<char>('a' + (i / 26) % 26);
  w += static_cast<char>('a' + i % 26);
  return w;
}

struct SentencePart {
  std::string word;
  Pos pos;
};

// Deterministic sentence with annotated noun/verb anchors. The vocabulary is
// disjoint from the candidate words by construction.
inline std::pair<std::string, std::vector<Token>> make_sentence(Rng& rng) {
  static const std::vector<std::string> nouns{
      "cat", "dog",  "tree",  "house", "bird",
      "fox", "lake", "stone", "chair", "cloud"};
  static const std::vector<std::string> verbs{"walks", "sees",  "finds",
                                              "holds", "meets", "keeps"};
  static const std::vector<std::string> fillers{"the", "near", "under", "by"};

  std::vector<SentencePart> parts;
  parts.push_back({fillers[rng.below(fillers.size())], Pos::OTHER});
  parts.push_back({nouns[rng.below(nouns.size())], Pos::NOUN});
  parts.push_back({verbs[rng.below(verbs.size())], Pos::VERB});
  parts.push_back({"the", Pos::OTHER});
  parts.push_back({nouns[rng.below(nouns.size())], Pos::NOUN});

  std::string text;
  std::vector<Token> tokens;
  for (const SentencePart& p : parts) {
    if (!text.empty()) text += ' ';
    Token t;
    t.surface = p.word;
    t.pos = p.pos;
    t.char_offset = text.size();
    text += p.word;
    if (p.pos != Pos::OTHER) tokens.push_back(std::move(t));
  }
  return {text, tokens};
}

inline Example make_comve_example(const std::string& id, Rng& rng) {
  Example ex;
  ex.id = id;
  ex.task = Task::comve;
  auto [s0, t0] = make_sentence(rng);
  auto [s1, t1] = make_sentence(rng);
  ex.fields = {{"sentence0", s0}, {"sentence1", s1}};
  ex.gold_label = static_cast<int>(rng.below(2));
  ex.reference_explanation = "one sentence does not hold";
  std::vector<Token> tokens;
  for (Token& t : t0) {
    t.segment = "sentence0";
    tokens.push_back(std::move(t));
  }
  for (Token& t : t1) {
    t.segment = "sentence1";
    tokens.push_back(std::move(t));
  }
  ex.tokens = std::move(tokens);
  validate_example(ex);
  return ex;
}

}  // namespace sim_detail

// Builds the synthetic corpus, inventory, and glass-box configuration for a
// spec, without running anything.
inline SimulationResult make_simulation(const SimulationSpec& spec) {
  SimulationResult sim;

  sim.config.labels = label_ids(Task::comve);
  sim.config.base_logits = {2.0, 0.0};  // label 0 unless pushed
  sim.config.policy = spec.policy;
  sim.config.noise = spec.noise;
  for (int i = 0; i < spec.n_impact_words; ++i) {
    const bool high = (i % 2 == 0);
    const bool adverb = (i % 4 >= 2);  // alternate classes within each parity
    const std::string w = sim_detail::impact_word(i, high, adverb);
    sim.config.impact_lexicon[w] =
        high ? std::vector<double>{0.0, spec.high_delta}
             : std::vector<double>{0.0, 0.0};
    (adverb ? sim.inventory.adverbs : sim.inventory.adjectives).push_back(w);
  }
  std::sort(sim.inventory.adjectives.begin(), sim.inventory.adjectives.end());
  std::sort(sim.inventory.adverbs.begin(), sim.inventory.adverbs.end());
  sim.inventory.source_version = "synthetic";

  Rng data_rng(derive_seed(spec.seed, "sim-data"));
  for (int i = 0; i < spec.n_examples; ++i)
    sim.test_set.push_back(
        sim_detail::make_comve_example("sim-" + std::to_string(i), data_rng));
  for (int i = 0; i < 20; ++i)
    sim.train_pool.push_back(sim_detail::make_comve_example(
        "train-" + std::to_string(i), data_rng));

  sim.manifest.run_id = "simulate-" + std::string(to_string(spec.policy.kind));
  sim.manifest.model_id = "glassbox";
  sim.manifest.prompt_order = PromptOrder::PE;
  sim.manifest.dataset = Task::comve;
  sim.manifest.rng_seed = spec.seed;
  sim.manifest.few_shot_count = 20;
  sim.manifest.intervention_config.positions = spec.positions;
  sim.manifest.intervention_config.candidates_per_position =
      spec.candidates_per_position;
  sim.manifest.intervention_config.source_version = "synthetic";
  sim.manifest.filter_keep_fraction = spec.keep_fraction;
  sim.manifest.created_at = "1970-01-01T00:00:00Z";
  return sim;
}

inline SimulationResult run_simulation(const SimulationSpec& spec) {
  SimulationResult sim = make_simulation(spec);

  GlassBoxClient client(sim.config);
  StubJudge judge(StubJudge::Mode::seeded, derive_seed(spec.seed, "sim-judge"));

  RunOptions opts;
  opts.run_dir = spec.run_dir;
  opts.concurrency = spec.concurrency;
  opts.use_cache = false;
  sim.run = run_evaluation(sim.manifest, sim.test_set, sim.train_pool, client,
                           judge, sim.inventory, opts);

  std::map<std::string, int> gold;
  for (const Example& ex : sim.test_set) gold[ex.id] = ex.gold_label;
  sim.report = compute_report(sim.run.records, &gold,
                              sim.run.interventions.size(),
                              sim.run.failures.size(), ReportOptions{},
                              sim.manifest.run_id);
  return sim;
}

}  // namespace cct
