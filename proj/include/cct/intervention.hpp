#pragma once

// Counterfactual interventional additions: insert a random adjective before
// a noun or a random adverb before a verb, at randomly chosen anchor
// positions, drawing candidates from the WordNet inventories.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cct/example.hpp"
#include "cct/rng.hpp"
#include "cct/stemmer.hpp"
#include "cct/mention.hpp"
#include "cct/wordnet.hpp"

namespace cct {

struct Intervention {
  std::string example_id;
  std::string segment;
  std::size_t anchor_token_index = 0;  // index into Example.tokens
  Pos anchor_pos = Pos::NOUN;          // NOUN or VERB
  std::string inserted_word;
  Pos word_class = Pos::ADJ;           // ADJ before NOUN, ADV before VERB
  std::string modified_text;           // full segment text after insertion
  std::optional<double> naturalness_score;
  bool kept = false;

  bool operator==(const Intervention&) const = default;
};

inline nlohmann::json intervention_to_json(const Intervention& iv) {
  nlohmann::json j{{"example_id", iv.example_id},
                   {"segment", iv.segment},
                   {"anchor_token_index", iv.anchor_token_index},
                   {"anchor_pos", std::string(to_string(iv.anchor_pos))},
                   {"inserted_word", iv.inserted_word},
                   {"word_class", std::string(to_string(iv.word_class))},
                   {"modified_text", iv.modified_text},
                   {"kept", iv.kept}};
  j["naturalness_score"] = iv.naturalness_score
                               ? nlohmann::json(*iv.naturalness_score)
                               : nlohmann::json(nullptr);
  return j;
}

inline Intervention intervention_from_json(const nlohmann::json& j) {
  Intervention iv;
  iv.example_id = j.at("example_id").get<std::string>();
  iv.segment = j.at("segment").get<std::string>();
  iv.anchor_token_index = j.at("anchor_token_index").get<std::size_t>();
  iv.anchor_pos = *pos_from_string(j.at("anchor_pos").get<std::string>());
  iv.inserted_word = j.at("inserted_word").get<std::string>();
  iv.word_class = *pos_from_string(j.at("word_class").get<std::string>());
  iv.modified_text = j.at("modified_text").get<std::string>();
  if (!j.at("naturalness_score").is_null())
    iv.naturalness_score = j.at("naturalness_score").get<double>();
  iv.kept = j.at("kept").get<bool>();
  return iv;
}

namespace detail {

inline bool is_upper_ascii(char c) { return c >= 'A' && c <= 'Z'; }
inline char lower_ascii(char c) {
  return is_upper_ascii(c) ? static_cast<char>(c - 'A' + 'a') : c;
}
inline char upper_ascii(char c) {
  return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}

}  // namespace detail

// Inserts `word + " "` at `offset` in `segment_text`. At segment-initial
// anchors the inserted word takes over the anchor's capitalization and the
// anchor is lowercased, so the edit stays exactly invertible.
inline std::string apply_insertion(std::string_view segment_text,
                                   std::string_view word, std::size_t offset) {
  std::string out(segment_text);
  std::string ins(word);
  if (offset == 0 && !out.empty()) {
    if (detail::is_upper_ascii(out[0]) && !ins.empty())
      ins[0] = detail::upper_ascii(ins[0]);
    out[0] = detail::lower_ascii(out[0]);
  }
  out.insert(offset, ins + " ");
  return out;
}

// Exact inverse of apply_insertion.
inline std::string remove_insertion(const Intervention& iv,
                                    std::size_t offset) {
  std::string out = iv.modified_text;
  const std::size_t ins_len = iv.inserted_word.size() + 1;
  const bool inserted_was_upper =
      offset == 0 && !out.empty() && detail::is_upper_ascii(out[0]);
  out.erase(offset, ins_len);
  if (offset == 0 && !out.empty() && inserted_was_upper)
    out[0] = detail::upper_ascii(out[0]);
  return out;
}

struct InterventionConfig {
  int positions = 4;
  int candidates_per_position = 20;
  std::vector<std::string> segments;   // empty -> task default
  bool exclude_input_stems = true;
  std::string pos_provider = "pre-annotated";
  std::string source_version = "wordnet-3.0";

  const std::vector<std::string>& segments_for(Task t) const {
    return segments.empty() ? default_intervention_segments(t) : segments;
  }
};

inline nlohmann::json intervention_config_to_json(const InterventionConfig& c) {
  return {{"positions", c.positions},
          {"candidates_per_position", c.candidates_per_position},
          {"segments", c.segments},
          {"exclude_input_stems", c.exclude_input_stems},
          {"pos_provider", c.pos_provider},
          {"source_version", c.source_version}};
}

inline InterventionConfig intervention_config_from_json(
    const nlohmann::json& j) {
  InterventionConfig c;
  c.positions = j.value("positions", 4);
  c.candidates_per_position = j.value("candidates_per_position", 20);
  c.segments = j.value("segments", std::vector<std::string>{});
  c.exclude_input_stems = j.value("exclude_input_stems", true);
  c.pos_provider = j.value("pos_provider", std::string("pre-annotated"));
  c.source_version = j.value("source_version", std::string("wordnet-3.0"));
  return c;
}

// Samples up to `positions` distinct NOUN/VERB anchors uniformly without
// replacement from the configured segments, then for each anchor up to
// `candidates_per_position` distinct words from the matching inventory.
// Candidates whose stem already occurs (stemmed) in the example's input are
// excluded when `exclude_input_stems` is set. Pure function of
// (example, inventory, seed, config).
inline std::vector<Intervention> generate_interventions(
    const Example& example, const WordInventory& inventory, Rng& rng,
    const InterventionConfig& config = {}) {
  std::vector<Intervention> out;
  if (!example.tokens) return out;

  const auto& segments = config.segments_for(example.task);
  std::vector<std::size_t> anchor_indices;
  for (std::size_t i = 0; i < example.tokens->size(); ++i) {
    const Token& tok = (*example.tokens)[i];
    if (tok.pos != Pos::NOUN && tok.pos != Pos::VERB) continue;
    if (std::find(segments.begin(), segments.end(), tok.segment) ==
        segments.end())
      continue;
    anchor_indices.push_back(i);
  }
  if (anchor_indices.empty()) return out;

  std::set<std::string> input_stems;
  if (config.exclude_input_stems)
    for (const std::string& w : detail::split_words(example.joined_input()))
      input_stems.insert(stem(w));

  const std::size_t n_anchors =
      std::min<std::size_t>(config.positions, anchor_indices.size());
  for (std::size_t pick : rng.sample_indices(anchor_indices.size(), n_anchors)) {
    const std::size_t token_index = anchor_indices[pick];
    const Token& anchor = (*example.tokens)[token_index];
    const Pos word_class = anchor.pos == Pos::NOUN ? Pos::ADJ : Pos::ADV;
    const auto& pool = inventory.for_word_class(word_class);

    std::size_t taken = 0;
    // Walk a full without-replacement permutation so stem-excluded
    // candidates do not shrink the sample below the requested count.
    for (std::size_t widx :
         rng.sample_indices(pool.size(), pool.size())) {
      if (taken == static_cast<std::size_t>(config.candidates_per_position))
        break;
      const std::string& word = pool[widx];
      if (config.exclude_input_stems && input_stems.count(stem(word)))
        continue;
      Intervention iv;
      iv.example_id = example.id;
      iv.segment = anchor.segment;
      iv.anchor_token_index = token_index;
      iv.anchor_pos = anchor.pos;
      iv.inserted_word = word;
      iv.word_class = word_class;
      iv.modified_text = apply_insertion(example.field(anchor.segment), word,
                                         anchor.char_offset);
      out.push_back(std::move(iv));
      ++taken;
    }
  }
  return out;
}

// Keeps the max(1, round(keep_fraction * N)) highest-scoring interventions
// of one example. Ties broken by (anchor_token_index, inserted_word) so
// selection is stable across reruns. Returns the kept subset; also flips the
// `kept` flags on the input.
inline std::vector<Intervention> filter_top_fraction(
    std::vector<Intervention>& interventions, double keep_fraction = 0.2) {
  for (Intervention& iv : interventions) iv.kept = false;
  if (interventions.empty()) return {};

  std::vector<std::size_t> order(interventions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Intervention& x = interventions[a];
    const Intervention& y = interventions[b];
    const double sx = x.naturalness_score.value_or(0.0);
    const double sy = y.naturalness_score.value_or(0.0);
    if (sx != sy) return sx > sy;
    if (x.anchor_token_index != y.anchor_token_index)
      return x.anchor_token_index < y.anchor_token_index;
    return x.inserted_word < y.inserted_word;
  });

  const auto n = static_cast<double>(interventions.size());
  const std::size_t keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(keep_fraction * n)));
  std::vector<Intervention> kept;
  for (std::size_t i = 0; i < std::min(keep, order.size()); ++i) {
    interventions[order[i]].kept = true;
    kept.push_back(interventions[order[i]]);
  }
  return kept;
}

}  // namespace cct
