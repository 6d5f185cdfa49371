#pragma once

// Part-of-speech providers behind one interface. Fixture datasets ship
// pre-annotated tokens so the pipeline runs hermetically; the builtin
// provider tags by WordNet noun/verb index membership (priority
// NOUN > VERB > OTHER); the external providers speak a small JSON contract:
//   in:  {"text": <segment text>}
//   out: {"tokens": [{"surface","pos","char_offset"}]}
// over a line-delimited subprocess pipe or HTTP POST.

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cct/example.hpp"
#include "cct/mention.hpp"
#include "cct/wordnet.hpp"

namespace cct {

class PosProvider {
 public:
  virtual ~PosProvider() = default;
  virtual std::string name() const = 0;
  // Tokens for one segment; `segment` is left empty and filled by the caller.
  virtual std::vector<Token> tag(const std::string& text) = 0;
};

// Tokenizer shared by the builtin provider: maximal runs of
// alphanumeric-or-hyphen characters, with original offsets.
inline std::vector<Token> tokenize_segment(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !detail::word_char(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && detail::word_char(text[j])) ++j;
    if (j > i) {
      Token t;
      t.surface = text.substr(i, j - i);
      t.char_offset = i;
      t.pos = Pos::OTHER;
      out.push_back(std::move(t));
    }
    i = j;
  }
  return out;
}

class BuiltinLexiconProvider : public PosProvider {
 public:
  explicit BuiltinLexiconProvider(PosLexicon lexicon)
      : lexicon_(std::move(lexicon)) {}

  std::string name() const override { return "builtin-lexicon"; }

  std::vector<Token> tag(const std::string& text) override {
    std::vector<Token> tokens = tokenize_segment(text);
    for (Token& t : tokens) {
      const std::string w = detail::to_lower(t.surface);
      if (lexicon_.is_noun(w))
        t.pos = Pos::NOUN;
      else if (lexicon_.is_verb(w))
        t.pos = Pos::VERB;
      else
        t.pos = Pos::OTHER;
    }
    return tokens;
  }

 private:
  PosLexicon lexicon_;
};

namespace detail {

inline std::vector<Token> tokens_from_tagger_json(const nlohmann::json& j,
                                                  const std::string& text) {
  std::vector<Token> out;
  for (const auto& tj : j.at("tokens")) {
    Token t;
    t.surface = tj.at("surface").get<std::string>();
    auto p = pos_from_string(tj.at("pos").get<std::string>());
    if (!p) throw SchemaError("tagger returned unknown pos: " + tj.dump());
    t.pos = *p;
    t.char_offset = tj.at("char_offset").get<std::size_t>();
    if (t.char_offset + t.surface.size() > text.size() ||
        text.compare(t.char_offset, t.surface.size(), t.surface) != 0)
      throw SchemaError("tagger offsets inconsistent with text for token '" +
                        t.surface + "'");
    out.push_back(std::move(t));
  }
  return out;
}

// Long-lived bidirectional pipe to a child process.
class SubprocessPipe {
 public:
  explicit SubprocessPipe(const std::string& command) {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
      throw std::runtime_error("pipe() failed");
    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error("fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), nullptr);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_ = fdopen(to_child[1], "w");
    out_ = fdopen(from_child[0], "r");
    if (!in_ || !out_) throw std::runtime_error("fdopen() failed");
  }

  ~SubprocessPipe() {
    if (in_) fclose(in_);
    if (out_) fclose(out_);
    if (pid_ > 0) waitpid(pid_, nullptr, 0);
  }

  SubprocessPipe(const SubprocessPipe&) = delete;
  SubprocessPipe& operator=(const SubprocessPipe&) = delete;

  std::string round_trip(const std::string& line) {
    if (fprintf(in_, "%s\n", line.c_str()) < 0 || fflush(in_) != 0)
      throw std::runtime_error("subprocess write failed");
    std::string reply;
    int c;
    while ((c = fgetc(out_)) != EOF && c != '\n') reply.push_back(static_cast<char>(c));
    if (reply.empty() && c == EOF)
      throw std::runtime_error("subprocess closed its pipe");
    return reply;
  }

 private:
  pid_t pid_ = -1;
  FILE* in_ = nullptr;
  FILE* out_ = nullptr;
};

}  // namespace detail

// External tagger over a line-delimited JSON subprocess pipe.
class SubprocessTaggerProvider : public PosProvider {
 public:
  explicit SubprocessTaggerProvider(std::string command)
      : command_(std::move(command)) {}

  std::string name() const override { return "external:" + command_; }

  std::vector<Token> tag(const std::string& text) override {
    if (!pipe_) pipe_ = std::make_unique<detail::SubprocessPipe>(command_);
    const nlohmann::json req{{"text", text}};
    const std::string reply = pipe_->round_trip(req.dump());
    return detail::tokens_from_tagger_json(nlohmann::json::parse(reply), text);
  }

 private:
  std::string command_;
  std::unique_ptr<detail::SubprocessPipe> pipe_;
};

// External tagger over HTTP POST.
class HttpTaggerProvider : public PosProvider {
 public:
  explicit HttpTaggerProvider(std::string base_url, std::string path = "/tag")
      : base_url_(std::move(base_url)), path_(std::move(path)) {}

  std::string name() const override { return "external:" + base_url_ + path_; }

  std::vector<Token> tag(const std::string& text) override {
    httplib::Client cli(base_url_);
    auto res = cli.Post(path_, nlohmann::json{{"text", text}}.dump(),
                        "application/json");
    if (!res || res->status != 200)
      throw std::runtime_error("tagger endpoint failed: " + base_url_ + path_);
    return detail::tokens_from_tagger_json(nlohmann::json::parse(res->body),
                                           text);
  }

 private:
  std::string base_url_;
  std::string path_;
};

// Annotates every segment of an example. Idempotent: examples that already
// carry tokens are returned unchanged. Never alters segment text.
inline Example annotate_pos(Example example, PosProvider& provider) {
  if (example.tokens.has_value()) return example;
  std::vector<Token> all;
  for (const auto& [name, text] : example.fields) {
    std::vector<Token> toks = provider.tag(text);
    for (Token& t : toks) {
      t.segment = name;
      all.push_back(std::move(t));
    }
  }
  example.tokens = std::move(all);
  validate_example(example);
  return example;
}

}  // namespace cct
