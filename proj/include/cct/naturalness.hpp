#pragma once

// Naturalness scoring of an intervention: ask the judge whether the modified
// sentence still makes sense and read the probability it begins its answer
// affirmatively. Score = P(Yes-variants) / (P(Yes-variants) + P(No-variants))
// over the first-token alternatives; deterministic given a cached response.

#include <cctype>
#include <string>

#include "cct/intervention.hpp"
#include "cct/model.hpp"
#include "cct/prompt.hpp"

namespace cct {

struct NaturalnessScore {
  double score = 0.5;
  bool flagged = false;  // neither Yes nor No mass observed
};

namespace detail {

inline std::string yesno_key(std::string_view token) {
  std::string t;
  for (char c : token) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) t.push_back(static_cast<char>(std::tolower(u)));
  }
  return t;
}

}  // namespace detail

inline NaturalnessScore score_naturalness_response(const ModelResponse& resp) {
  double yes = 0.0, no = 0.0;
  for (const auto& [tok, p] : resp.label_token_probs) {
    const std::string k = detail::yesno_key(tok);
    if (k == "yes") yes += p;
    if (k == "no") no += p;
  }
  if (yes + no > 0.0) return {yes / (yes + no), false};
  // No logprobs available: fall back to parsing the generated text.
  const std::string k = detail::yesno_key(
      resp.generated_text.substr(0, resp.generated_text.find_first_of(" \n,.")));
  if (k == "yes") return {1.0, false};
  if (k == "no") return {0.0, false};
  return {0.5, true};
}

inline NaturalnessScore score_naturalness(
    const Intervention& intervention, const std::string& original_text,
    ModelClient& judge,
    const std::string& template_text = kDefaultNaturalnessTemplate) {
  ModelRequest req;
  req.prompt =
      naturalness_prompt(original_text, intervention.modified_text, template_text);
  req.query_text = intervention.modified_text;
  req.is_judge = true;
  req.max_tokens = 4;
  return score_naturalness_response(judge.complete(req));
}

}  // namespace cct
