#pragma once

// Does an explanation mention the inserted word? Two passes: case-insensitive
// substring search (may match inside longer words, which the original test
// procedure allows), then a stemmed comparison over the explanation's words.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cct/stemmer.hpp"

namespace cct {

enum class MatchKind { exact_substring, stemmed, none };

inline std::string_view to_string(MatchKind k) {
  switch (k) {
    case MatchKind::exact_substring: return "exact-substring";
    case MatchKind::stemmed: return "stemmed";
    case MatchKind::none: return "none";
  }
  return "none";
}

struct MentionResult {
  bool mentioned = false;
  MatchKind match_kind = MatchKind::none;
  std::optional<std::pair<std::size_t, std::size_t>> matched_span;  // [start,end)
};

namespace detail {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

inline bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-';
}

// Split on every character that is not alphanumeric or hyphen.
inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !word_char(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && word_char(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

// Case-insensitive substring pass, then stemmed word-by-word pass (both
// sides stemmed). `word_boundary` restricts the substring pass to whole
// words; off by default to match the historical test behavior.
inline MentionResult detect_mention(std::string_view explanation,
                                    std::string_view inserted_word,
                                    bool word_boundary = false) {
  MentionResult res;
  if (inserted_word.empty() || explanation.empty()) return res;

  const std::string expl = detail::to_lower(explanation);
  const std::string word = detail::to_lower(inserted_word);

  std::size_t pos = expl.find(word);
  while (pos != std::string::npos) {
    const bool left_ok = pos == 0 || !detail::word_char(expl[pos - 1]);
    const bool right_ok = pos + word.size() == expl.size() ||
                          !detail::word_char(expl[pos + word.size()]);
    if (!word_boundary || (left_ok && right_ok)) {
      res.mentioned = true;
      res.match_kind = MatchKind::exact_substring;
      res.matched_span = {pos, pos + word.size()};
      return res;
    }
    pos = expl.find(word, pos + 1);
  }

  const std::string target = stem(word);
  for (const std::string& w : detail::split_words(expl))
    if (stem(w) == target) {
      res.mentioned = true;
      res.match_kind = MatchKind::stemmed;
      return res;
    }
  return res;
}

}  // namespace cct
