#pragma once

// Task registry: label sets, verbalizer tokens, segment names, and the
// prompt field titles each classification task uses.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cct {

enum class Task { esnli, ecqa, comve };
enum class PromptOrder { PE, EP };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::esnli: return "esnli";
    case Task::ecqa: return "ecqa";
    case Task::comve: return "comve";
  }
  throw std::logic_error("bad task");
}

inline std::optional<Task> task_from_string(std::string_view s) {
  if (s == "esnli") return Task::esnli;
  if (s == "ecqa") return Task::ecqa;
  if (s == "comve") return Task::comve;
  return std::nullopt;
}

inline std::string_view to_string(PromptOrder o) {
  return o == PromptOrder::PE ? "PE" : "EP";
}

inline std::optional<PromptOrder> prompt_order_from_string(std::string_view s) {
  if (s == "PE" || s == "pe") return PromptOrder::PE;
  if (s == "EP" || s == "ep") return PromptOrder::EP;
  return std::nullopt;
}

// Full label-id set, ascending. esnli: 0..2, ecqa: 1..5, comve: 0..1.
inline const std::vector<int>& label_ids(Task t) {
  static const std::vector<int> esnli{0, 1, 2};
  static const std::vector<int> ecqa{1, 2, 3, 4, 5};
  static const std::vector<int> comve{0, 1};
  switch (t) {
    case Task::esnli: return esnli;
    case Task::ecqa: return ecqa;
    case Task::comve: return comve;
  }
  throw std::logic_error("bad task");
}

// Surface token whose probability stands for the class in model output.
inline std::string verbalizer(Task t, int label) {
  if (t == Task::esnli) {
    switch (label) {
      case 0: return "entailment";
      case 1: return "neutral";
      case 2: return "contradiction";
    }
    throw std::out_of_range("esnli label out of range");
  }
  for (int id : label_ids(t))
    if (id == label) return std::to_string(label);
  throw std::out_of_range("label out of range for task");
}

inline std::optional<int> label_from_name(Task t, std::string_view name) {
  for (int id : label_ids(t))
    if (verbalizer(t, id) == name) return id;
  return std::nullopt;
}

// Title of the label line in prompts ("JUDGEMENT:", "CORRECT OPTION:", ...).
inline std::string_view label_title(Task t) {
  switch (t) {
    case Task::esnli: return "JUDGEMENT";
    case Task::ecqa: return "CORRECT OPTION";
    case Task::comve: return "FALSE SENTENCE";
  }
  throw std::logic_error("bad task");
}

inline const std::vector<std::string>& segment_names(Task t) {
  static const std::vector<std::string> esnli{"text", "hypothesis"};
  static const std::vector<std::string> ecqa{"question", "option1", "option2",
                                             "option3", "option4", "option5"};
  static const std::vector<std::string> comve{"sentence0", "sentence1"};
  switch (t) {
    case Task::esnli: return esnli;
    case Task::ecqa: return ecqa;
    case Task::comve: return comve;
  }
  throw std::logic_error("bad task");
}

// Segments interventions target by default: esnli edits either statement,
// ecqa only the question, comve either sentence.
inline const std::vector<std::string>& default_intervention_segments(Task t) {
  static const std::vector<std::string> esnli{"text", "hypothesis"};
  static const std::vector<std::string> ecqa{"question"};
  static const std::vector<std::string> comve{"sentence0", "sentence1"};
  switch (t) {
    case Task::esnli: return esnli;
    case Task::ecqa: return ecqa;
    case Task::comve: return comve;
  }
  throw std::logic_error("bad task");
}

}  // namespace cct
