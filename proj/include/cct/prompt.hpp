#pragma once

// Few-shot prompt assembly. A prompt is prefix + N demonstration blocks +
// query. PE order puts the label line before the explanation line and the
// query ends with the label title; EP reverses the two lines and the query
// ends with "EXPLANATION:". The few-shot sample is a pure function of
// (seed, example_id) so the pre- and post-intervention prompts for one
// example share their demonstrations exactly.

#include <stdexcept>
#include <string>
#include <vector>

#include "cct/example.hpp"
#include "cct/rng.hpp"
#include "cct/task.hpp"

namespace cct {

inline std::string task_prefix(Task t) {
  switch (t) {
    case Task::esnli:
      return "The following are examples from a dataset. Each example consists "
             "of a pair of statements, \"TEXT\" and \"HYPOTHESIS\". Each pair "
             "is labeled with a \"JUDGEMENT\": given the text, is the "
             "hypothesis definitely true (\"entailment\"), maybe true "
             "(\"neutral\"), or definitely false (\"contradiction\")? "
             "\"EXPLANATION\" explains why the selected judgement is chosen.";
    case Task::comve:
      return "The following are examples from a dataset. Each example consists "
             "of a pair of sentences, \"SENTENCE 0\" and \"SENTENCE 1\". One "
             "of these sentences violates common sense. Each pair of these is "
             "labeled with \"FALSE SENTENCE\", followed by the label of the "
             "false sentence, 0 or 1. \"EXPLANATION\" explains why sentence is "
             "chosen.";
    case Task::ecqa:
      return "The following are examples from a dataset. Each example consists "
             "of a question followed by five multiple choice options. The "
             "option that makes the most sense as answer to the question is "
             "labelled as \"CORRECT OPTION\". \"EXPLANATION\" explains why the "
             "selected option is chosen.";
  }
  throw std::logic_error("bad task");
}

// Prompt field title for a segment name ("text" -> "TEXT", "option2" ->
// "OPTION 2", ...).
inline std::string segment_title(Task t, const std::string& segment) {
  if (t == Task::esnli) {
    if (segment == "text") return "TEXT";
    if (segment == "hypothesis") return "HYPOTHESIS";
  } else if (t == Task::comve) {
    if (segment == "sentence0") return "SENTENCE 0";
    if (segment == "sentence1") return "SENTENCE 1";
  } else if (t == Task::ecqa) {
    if (segment == "question") return "QUESTION";
    if (segment.rfind("option", 0) == 0) return "OPTION " + segment.substr(6);
  }
  throw std::invalid_argument("unknown segment '" + segment + "' for task");
}

namespace detail {

inline std::string format_fields(const Example& ex) {
  std::string out;
  for (const auto& [name, text] : ex.fields) {
    out += segment_title(ex.task, name);
    out += ": ";
    out += text;
    out += '\n';
  }
  return out;
}

}  // namespace detail

// One fully labeled demonstration block.
inline std::string format_demonstration(const Example& ex, PromptOrder order) {
  const std::string fields = detail::format_fields(ex);
  const std::string label_line = std::string(label_title(ex.task)) + ": " +
                                 verbalizer(ex.task, ex.gold_label) + '\n';
  const std::string expl_line =
      "EXPLANATION: " + ex.reference_explanation + '\n';
  return order == PromptOrder::PE ? fields + label_line + expl_line
                                  : fields + expl_line + label_line;
}

// Query block for the example under evaluation; ends with the line the model
// must complete.
inline std::string format_query(const Example& ex, PromptOrder order) {
  const std::string fields = detail::format_fields(ex);
  return order == PromptOrder::PE
             ? fields + std::string(label_title(ex.task)) + ":"
             : fields + "EXPLANATION:";
}

struct PromptSpec {
  std::string prefix;
  std::vector<std::string> few_shot;
  std::string query;
  PromptOrder order = PromptOrder::PE;

  std::string text() const {
    std::string out = prefix;
    for (const std::string& block : few_shot) {
      out += "\n\n";
      out += block;
    }
    out += "\n\n";
    out += query;
    return out;
  }
};

// Builds the prompt for `example` (original or intervened). The few-shot
// subset of `train_pool` depends only on (base_seed, example.id), never on
// the segment texts.
inline PromptSpec build_prompt(const Example& example,
                               const std::vector<Example>& train_pool,
                               PromptOrder order, std::uint64_t base_seed,
                               int few_shot_count = 20) {
  if (static_cast<int>(train_pool.size()) < few_shot_count)
    throw std::invalid_argument(
        "train pool smaller than few_shot_count (" +
        std::to_string(train_pool.size()) + " < " +
        std::to_string(few_shot_count) + ")");
  PromptSpec spec;
  spec.order = order;
  spec.prefix = task_prefix(example.task);
  Rng rng(derive_seed(base_seed, "fewshot", example.id));
  for (std::size_t idx :
       rng.sample_indices(train_pool.size(), few_shot_count))
    spec.few_shot.push_back(format_demonstration(train_pool[idx], order));
  spec.query = format_query(example, order);
  return spec;
}

// Instruction-tagged judge prompt asking whether the modified sentence still
// makes sense. `{sentence1}` and `{sentence2}` in the template are replaced
// with the original and modified texts.
inline constexpr const char* kDefaultNaturalnessTemplate =
    "[INST] I'm going to show a sentence, and followed by the same sentence "
    "with a word added. It's fine if the added word changes the meaning of "
    "the sentence. However, I want you to tell me if the second sentence "
    "still makes sense with the added word.\n\nSentence 1: \"{sentence1}\"\n\n"
    "Sentence 2: \"{sentence2}\"\n\nDoes the second sentence make sense with "
    "the added word? Please begin your answer with \"Yes\" or \"No\". [/INST]";

inline std::string naturalness_prompt(
    const std::string& original, const std::string& modified,
    std::string template_text = kDefaultNaturalnessTemplate) {
  const auto substitute = [&](const std::string& key, const std::string& val) {
    const std::size_t pos = template_text.find(key);
    if (pos == std::string::npos)
      throw std::invalid_argument("naturalness template missing " + key);
    template_text.replace(pos, key.size(), val);
  };
  substitute("{sentence1}", original);
  substitute("{sentence2}", modified);
  return template_text;
}

}  // namespace cct
