#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cct/task.hpp"

namespace cct {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Pos { NOUN, VERB, ADJ, ADV, OTHER };

inline std::string_view to_string(Pos p) {
  switch (p) {
    case Pos::NOUN: return "NOUN";
    case Pos::VERB: return "VERB";
    case Pos::ADJ: return "ADJ";
    case Pos::ADV: return "ADV";
    case Pos::OTHER: return "OTHER";
  }
  throw std::logic_error("bad pos");
}

inline std::optional<Pos> pos_from_string(std::string_view s) {
  if (s == "NOUN") return Pos::NOUN;
  if (s == "VERB") return Pos::VERB;
  if (s == "ADJ") return Pos::ADJ;
  if (s == "ADV") return Pos::ADV;
  if (s == "OTHER") return Pos::OTHER;
  return std::nullopt;
}

struct Token {
  std::string surface;
  Pos pos = Pos::OTHER;
  std::size_t char_offset = 0;
  std::string segment;

  bool operator==(const Token&) const = default;
};

// One dataset instance: named text segments, gold label, reference
// explanation, optionally POS tokens.
struct Example {
  std::string id;
  Task task = Task::esnli;
  std::vector<std::pair<std::string, std::string>> fields;  // segment -> text
  int gold_label = 0;
  std::string reference_explanation;
  std::optional<std::vector<Token>> tokens;

  bool operator==(const Example&) const = default;

  const std::string& field(std::string_view name) const {
    for (const auto& [k, v] : fields)
      if (k == name) return v;
    throw std::out_of_range("no such segment: " + std::string(name));
  }

  bool has_field(std::string_view name) const {
    for (const auto& [k, v] : fields)
      if (k == name) return true;
    return false;
  }

  std::string& mutable_field(std::string_view name) {
    for (auto& [k, v] : fields)
      if (k == name) return v;
    throw std::out_of_range("no such segment: " + std::string(name));
  }

  bool has_tokens() const { return tokens.has_value() && !tokens->empty(); }

  // All segment texts joined with single spaces, in segment order.
  std::string joined_input() const {
    std::string out;
    for (const auto& [k, v] : fields) {
      if (!out.empty()) out += ' ';
      out += v;
    }
    return out;
  }
};

inline void validate_example(const Example& ex) {
  const auto& names = segment_names(ex.task);
  if (ex.fields.size() != names.size())
    throw SchemaError("example " + ex.id + ": expected " +
                      std::to_string(names.size()) + " segments, got " +
                      std::to_string(ex.fields.size()));
  for (std::size_t i = 0; i < names.size(); ++i)
    if (ex.fields[i].first != names[i])
      throw SchemaError("example " + ex.id + ": segment " +
                        std::to_string(i) + " must be '" + names[i] + "'");

  bool label_ok = false;
  for (int id : label_ids(ex.task)) label_ok |= (id == ex.gold_label);
  if (!label_ok)
    throw SchemaError("example " + ex.id + ": gold label " +
                      std::to_string(ex.gold_label) + " invalid for task " +
                      std::string(to_string(ex.task)));

  if (ex.tokens) {
    // Offsets strictly increasing within a segment and in-bounds.
    std::string last_segment;
    std::size_t last_offset = 0;
    for (const Token& tok : *ex.tokens) {
      if (!ex.has_field(tok.segment))
        throw SchemaError("example " + ex.id + ": token references unknown segment '" +
                          tok.segment + "'");
      const std::string& text = ex.field(tok.segment);
      if (tok.char_offset + tok.surface.size() > text.size())
        throw SchemaError("example " + ex.id + ": token '" + tok.surface +
                          "' out of bounds in segment '" + tok.segment + "'");
      if (text.compare(tok.char_offset, tok.surface.size(), tok.surface) != 0)
        throw SchemaError("example " + ex.id + ": token '" + tok.surface +
                          "' does not match segment text at offset " +
                          std::to_string(tok.char_offset));
      if (tok.segment == last_segment && tok.char_offset <= last_offset)
        throw SchemaError("example " + ex.id +
                          ": token offsets not strictly increasing in segment '" +
                          tok.segment + "'");
      last_segment = tok.segment;
      last_offset = tok.char_offset;
    }
  }
}

inline nlohmann::json tokens_to_json(const std::vector<Token>& toks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Token& t : toks)
    arr.push_back({{"surface", t.surface},
                   {"pos", std::string(to_string(t.pos))},
                   {"char_offset", t.char_offset},
                   {"segment", t.segment}});
  return arr;
}

inline std::vector<Token> tokens_from_json(const nlohmann::json& arr) {
  std::vector<Token> out;
  for (const auto& j : arr) {
    Token t;
    t.surface = j.at("surface").get<std::string>();
    auto p = pos_from_string(j.at("pos").get<std::string>());
    if (!p) throw SchemaError("unknown pos tag: " + j.at("pos").dump());
    t.pos = *p;
    t.char_offset = j.at("char_offset").get<std::size_t>();
    t.segment = j.at("segment").get<std::string>();
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace cct
