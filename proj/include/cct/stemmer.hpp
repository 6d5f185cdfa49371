#pragma once

// English Porter2 (Snowball) stemmer. Suffix tables follow the published
// algorithm; matching is longest-suffix-first with no fallback when a region
// condition fails, which is the part naive re-implementations usually get
// wrong. Validated against the Snowball-generated reference implementation
// (see tests/test_stemmer.cpp for the frozen fixture table).

#include <array>
#include <cctype>
#include <string>
#include <string_view>

namespace cct {
namespace porter2_detail {

inline bool is_v(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

inline bool ends_with(const std::string& w, std::string_view s) {
  return w.size() >= s.size() &&
         w.compare(w.size() - s.size(), s.size(), s) == 0;
}

// Region boundary: position just past the first non-vowel that follows a
// vowel, scanning from `i`; end of word when no such pair exists.
inline std::size_t after_vowel_nonvowel(const std::string& w, std::size_t i) {
  while (i < w.size() && !is_v(w[i])) ++i;  // go past a vowel...
  while (i < w.size() && is_v(w[i])) ++i;
  return i < w.size() ? i + 1 : w.size();   // ...then past a non-vowel
}

inline void mark_regions(const std::string& w, std::size_t& p1,
                         std::size_t& p2) {
  p1 = p2 = w.size();
  std::size_t i = 0;
  if (w.starts_with("gener") || w.starts_with("arsen"))
    i = 5;
  else if (w.starts_with("commun"))
    i = 6;
  else
    i = after_vowel_nonvowel(w, 0);
  p1 = i;
  p2 = after_vowel_nonvowel(w, p1);
}

// Short syllable ending at cursor c: non-vowel, vowel, non-vowel(not w/x/Y)
// read rightward to c, or vowel + non-vowel at the very start of the word.
inline bool shortv_at(const std::string& w, std::size_t c) {
  if (c >= 3 && !is_v(w[c - 1]) && w[c - 1] != 'w' && w[c - 1] != 'x' &&
      w[c - 1] != 'Y' && is_v(w[c - 2]) && !is_v(w[c - 3]))
    return true;
  return c == 2 && is_v(w[0]) && !is_v(w[1]);
}

inline bool ends_in_double(const std::string& w) {
  if (w.size() < 2) return false;
  const char a = w[w.size() - 1];
  if (a != w[w.size() - 2]) return false;
  return a == 'b' || a == 'd' || a == 'f' || a == 'g' || a == 'm' ||
         a == 'n' || a == 'p' || a == 'r' || a == 't';
}

inline bool exception1(std::string& w) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 11>
      mapped{{{"skis", "ski"},
              {"skies", "sky"},
              {"dying", "die"},
              {"lying", "lie"},
              {"tying", "tie"},
              {"idly", "idl"},
              {"gently", "gentl"},
              {"ugly", "ugli"},
              {"early", "earli"},
              {"only", "onli"},
              {"singly", "singl"}}};
  for (const auto& [k, v] : mapped)
    if (w == k) {
      w = v;
      return true;
    }
  static constexpr std::array<std::string_view, 7> invariant{
      "sky", "news", "howe", "atlas", "cosmos", "bias", "andes"};
  for (auto k : invariant)
    if (w == k) return true;
  return false;
}

inline bool exception2(const std::string& w) {
  static constexpr std::array<std::string_view, 8> keys{
      "inning", "outing",  "canning", "herring",
      "earring", "proceed", "exceed",  "succeed"};
  for (auto k : keys)
    if (w == k) return true;
  return false;
}

inline void step0(std::string& w) {
  if (ends_with(w, "'s'"))
    w.erase(w.size() - 3);
  else if (ends_with(w, "'s"))
    w.erase(w.size() - 2);
  else if (ends_with(w, "'"))
    w.erase(w.size() - 1);
}

inline void step1a(std::string& w) {
  if (ends_with(w, "sses")) {
    w.erase(w.size() - 2);
    return;
  }
  if (ends_with(w, "ied") || ends_with(w, "ies")) {
    const std::size_t stem_len = w.size() - 3;
    w.erase(stem_len);
    w += (stem_len >= 2) ? "i" : "ie";
    return;
  }
  if (ends_with(w, "us") || ends_with(w, "ss")) return;
  if (ends_with(w, "s")) {
    // delete when a vowel precedes the letter before the s
    for (std::size_t i = 0; i + 2 < w.size(); ++i)
      if (is_v(w[i])) {
        w.pop_back();
        return;
      }
  }
}

inline void step1b(std::string& w, std::size_t p1) {
  static constexpr std::array<std::string_view, 6> sufs{
      "eedly", "ingly", "edly", "eed", "ing", "ed"};
  std::string_view m;
  for (auto s : sufs)
    if (ends_with(w, s)) {
      m = s;
      break;
    }
  if (m.empty()) return;
  if (m == "eed" || m == "eedly") {
    if (w.size() - m.size() >= p1) {
      w.erase(w.size() - m.size());
      w += "ee";
    }
    return;
  }
  const std::size_t stem_len = w.size() - m.size();
  bool stem_has_vowel = false;
  for (std::size_t i = 0; i < stem_len; ++i)
    if (is_v(w[i])) {
      stem_has_vowel = true;
      break;
    }
  if (!stem_has_vowel) return;
  w.erase(stem_len);
  if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
    w += 'e';
  } else if (ends_in_double(w)) {
    w.pop_back();
  } else if (w.size() == p1 && shortv_at(w, w.size())) {
    w += 'e';
  }
}

inline void step1c(std::string& w) {
  const std::size_t n = w.size();
  if (n >= 3 && (w[n - 1] == 'y' || w[n - 1] == 'Y') && !is_v(w[n - 2]))
    w[n - 1] = 'i';
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

// Applies the longest matching suffix rule when the whole suffix lies in the
// region starting at `boundary`. Returns the matched rule or nullptr. No
// fallback to shorter rules when the region test fails.
inline const Rule* longest_match(const std::string& w, const Rule* rules,
                                 std::size_t count) {
  const Rule* best = nullptr;
  for (std::size_t i = 0; i < count; ++i)
    if (ends_with(w, rules[i].suffix))
      if (!best || rules[i].suffix.size() > best->suffix.size())
        best = &rules[i];
  return best;
}

inline void replace_suffix(std::string& w, const Rule& r) {
  w.erase(w.size() - r.suffix.size());
  w += r.replacement;
}

inline void step2(std::string& w, std::size_t p1) {
  static constexpr Rule rules[] = {
      {"ational", "ate"}, {"fulness", "ful"}, {"iveness", "ive"},
      {"ousness", "ous"}, {"ization", "ize"}, {"tional", "tion"},
      {"biliti", "ble"},  {"lessli", "less"}, {"ation", "ate"},
      {"alism", "al"},    {"aliti", "al"},    {"ousli", "ous"},
      {"entli", "ent"},   {"fulli", "ful"},   {"iviti", "ive"},
      {"enci", "ence"},   {"anci", "ance"},   {"abli", "able"},
      {"izer", "ize"},    {"ator", "ate"},    {"alli", "al"},
      {"ogi", "og"},      {"bli", "ble"},     {"li", ""}};
  const Rule* r = longest_match(w, rules, std::size(rules));
  if (!r || w.size() - r->suffix.size() < p1) return;
  if (r->suffix == "ogi") {
    if (w.size() >= 4 && w[w.size() - 4] == 'l') replace_suffix(w, *r);
    return;
  }
  if (r->suffix == "li") {
    static constexpr std::string_view valid_li = "cdeghkmnrt";
    if (w.size() >= 3 &&
        valid_li.find(w[w.size() - 3]) != std::string_view::npos)
      replace_suffix(w, *r);
    return;
  }
  replace_suffix(w, *r);
}

inline void step3(std::string& w, std::size_t p1, std::size_t p2) {
  static constexpr Rule rules[] = {
      {"ational", "ate"}, {"tional", "tion"}, {"alize", "al"},
      {"icate", "ic"},    {"iciti", "ic"},    {"ative", ""},
      {"ical", "ic"},     {"ness", ""},       {"ful", ""}};
  const Rule* r = longest_match(w, rules, std::size(rules));
  if (!r || w.size() - r->suffix.size() < p1) return;
  if (r->suffix == "ative" && w.size() - r->suffix.size() < p2) return;
  replace_suffix(w, *r);
}

inline void step4(std::string& w, std::size_t p2) {
  static constexpr Rule rules[] = {
      {"ement", ""}, {"ance", ""}, {"ence", ""}, {"able", ""}, {"ible", ""},
      {"ment", ""},  {"ant", ""},  {"ent", ""},  {"ism", ""},  {"ate", ""},
      {"iti", ""},   {"ous", ""},  {"ive", ""},  {"ize", ""},  {"ion", ""},
      {"al", ""},    {"er", ""},   {"ic", ""}};
  const Rule* r = longest_match(w, rules, std::size(rules));
  if (!r || w.size() - r->suffix.size() < p2) return;
  if (r->suffix == "ion") {
    const char c = w.size() >= 4 ? w[w.size() - 4] : '\0';
    if (c == 's' || c == 't') replace_suffix(w, *r);
    return;
  }
  replace_suffix(w, *r);
}

inline void step5(std::string& w, std::size_t p1, std::size_t p2) {
  const std::size_t n = w.size();
  if (n == 0) return;
  if (w[n - 1] == 'e') {
    if (n - 1 >= p2 || (n - 1 >= p1 && !shortv_at(w, n - 1))) w.pop_back();
    return;
  }
  if (w[n - 1] == 'l' && n - 1 >= p2 && n >= 2 && w[n - 2] == 'l')
    w.pop_back();
}

}  // namespace porter2_detail

// Porter2 stem of a single word; lowercases its input, idempotent on its
// own output.
inline std::string stem(std::string_view input) {
  using namespace porter2_detail;
  std::string w;
  w.reserve(input.size());
  for (char c : input)
    w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  if (exception1(w)) return w;
  if (w.size() <= 2) return w;
  if (w[0] == '\'') w.erase(0, 1);

  // Mark consonant-y as 'Y' so region and syllable tests can tell them apart.
  bool y_marked = false;
  if (!w.empty() && w[0] == 'y') {
    w[0] = 'Y';
    y_marked = true;
  }
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] == 'y' && is_v(w[i - 1])) {
      w[i] = 'Y';
      y_marked = true;
    }

  std::size_t p1 = 0, p2 = 0;
  mark_regions(w, p1, p2);

  step0(w);
  step1a(w);
  if (!exception2(w)) {
    step1b(w, p1);
    step1c(w);
    step2(w, p1);
    step3(w, p1, p2);
    step4(w, p2);
    step5(w, p1, p2);
  }

  if (y_marked)
    for (char& c : w)
      if (c == 'Y') c = 'y';
  return w;
}

}  // namespace cct
