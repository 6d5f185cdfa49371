#pragma once

// WordNet 3.x index.* parsing. Index files are space-delimited, one lemma
// per line, with a license header whose lines start with two spaces:
//
//   joyous a 1 1 & 1 0 01813007
//
// Only the first field matters here. Multiword lemmas (underscore), lemmas
// with digits, and single-letter lemmas are excluded from inventories.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cct/example.hpp"

namespace cct {

namespace detail {

inline bool eligible_lemma(const std::string& lemma) {
  if (lemma.size() < 2) return false;
  for (char c : lemma) {
    if (c >= 'a' && c <= 'z') continue;
    if (c == '-') continue;
    return false;  // digits, underscores, uppercase, punctuation
  }
  return true;
}

}  // namespace detail

// Lemmas from one index file, lexicographically sorted and deduplicated.
inline std::vector<std::string> load_wordnet_index(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open WordNet index: " + path.string());
  std::vector<std::string> lemmas;
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() >= 2 && line[0] == ' ' && line[1] == ' ') continue;  // header
    if (line.empty()) continue;
    const auto end = line.find(' ');
    std::string lemma = line.substr(0, end);
    std::transform(lemma.begin(), lemma.end(), lemma.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (detail::eligible_lemma(lemma)) lemmas.push_back(std::move(lemma));
  }
  std::sort(lemmas.begin(), lemmas.end());
  lemmas.erase(std::unique(lemmas.begin(), lemmas.end()), lemmas.end());
  if (lemmas.empty())
    throw std::runtime_error("no lemmas parsed from " + path.string() +
                             " (wrong file?)");
  return lemmas;
}

// Adjective/adverb inventories used to draw intervention candidates.
struct WordInventory {
  std::vector<std::string> adjectives;  // sorted, deduplicated
  std::vector<std::string> adverbs;     // sorted, deduplicated
  std::string source_version;

  const std::vector<std::string>& for_word_class(Pos word_class) const {
    if (word_class == Pos::ADJ) return adjectives;
    if (word_class == Pos::ADV) return adverbs;
    throw std::invalid_argument("word class must be ADJ or ADV");
  }
};

inline WordInventory load_wordnet(const std::filesystem::path& index_adj,
                                  const std::filesystem::path& index_adv,
                                  std::string source_version = "wordnet-3.0") {
  WordInventory inv;
  inv.adjectives = load_wordnet_index(index_adj);
  inv.adverbs = load_wordnet_index(index_adv);
  inv.source_version = std::move(source_version);
  return inv;
}

// Noun/verb index membership, backing the builtin fallback POS tagger.
struct PosLexicon {
  std::vector<std::string> nouns;  // sorted
  std::vector<std::string> verbs;  // sorted

  bool is_noun(const std::string& w) const {
    return std::binary_search(nouns.begin(), nouns.end(), w);
  }
  bool is_verb(const std::string& w) const {
    return std::binary_search(verbs.begin(), verbs.end(), w);
  }
};

inline PosLexicon load_pos_lexicon(const std::filesystem::path& index_noun,
                                   const std::filesystem::path& index_verb) {
  return PosLexicon{load_wordnet_index(index_noun),
                    load_wordnet_index(index_verb)};
}

}  // namespace cct
