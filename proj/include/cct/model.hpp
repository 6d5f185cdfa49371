#pragma once

// Model client contract. A client produces a raw response payload for a
// prompt (possibly over the network) and parses payloads into structured
// responses. Splitting the two lets the cache store raw payloads verbatim
// and replay them deterministically.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cct/cache.hpp"
#include "cct/distribution.hpp"
#include "cct/prompt.hpp"
#include "cct/rng.hpp"
#include "cct/task.hpp"

namespace cct {

struct ClientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelRequest {
  std::string prompt;      // full prompt text; the cache key with model_id
  std::string query_text;  // query segment texts joined; synthetic models
  Task task = Task::esnli;
  PromptOrder order = PromptOrder::PE;
  int max_tokens = 256;
  int top_k_logprobs = 10;
  bool is_judge = false;   // judge calls locate the label at the first token
};

struct ModelResponse {
  std::string generated_text;
  // Alternatives observed at the label position: token text -> probability.
  std::map<std::string, double> label_token_probs;
  bool label_position_found = false;
  std::string explanation_text;
  nlohmann::json raw;
};

class ModelClient {
 public:
  virtual ~ModelClient() = default;
  virtual std::string model_id() const = 0;
  virtual std::string complete_raw(const ModelRequest& req) = 0;
  virtual ModelResponse parse_raw(const std::string& raw,
                                  const ModelRequest& req) const = 0;

  ModelResponse complete(const ModelRequest& req) {
    return parse_raw(complete_raw(req), req);
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

// Splits a greedy completion into (label text, explanation text) following
// the prompt layout. Generation is cut at the first blank line after the
// final expected field.
struct ParsedCompletion {
  std::string label_text;
  std::string explanation_text;
};

inline ParsedCompletion parse_completion(std::string_view generated, Task task,
                                         PromptOrder order) {
  ParsedCompletion out;
  const std::string title = std::string(label_title(task)) + ":";
  if (order == PromptOrder::PE) {
    // "<label>\nEXPLANATION: <text>"
    const std::size_t nl = generated.find('\n');
    out.label_text = detail::trim(generated.substr(0, nl));
    if (nl != std::string_view::npos) {
      const std::size_t ex = generated.find("EXPLANATION:", nl);
      if (ex != std::string_view::npos) {
        std::string_view rest = generated.substr(ex + 12);
        const std::size_t end = rest.find('\n');
        out.explanation_text = detail::trim(rest.substr(0, end));
      }
    }
  } else {
    // "<explanation>\n<TITLE>: <label>"
    const std::size_t ti = generated.find(title);
    if (ti == std::string_view::npos) {
      out.explanation_text = detail::trim(generated);
    } else {
      std::string_view expl = generated.substr(0, ti);
      const std::size_t blank = expl.find("\n\n");
      if (blank != std::string_view::npos) expl = expl.substr(0, blank);
      out.explanation_text = detail::trim(expl);
      std::string_view rest = generated.substr(ti + title.size());
      const std::size_t end = rest.find('\n');
      out.label_text = detail::trim(rest.substr(0, end));
    }
  }
  return out;
}

struct ExtractionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExtractionResult {
  LabelDistribution distribution;
  std::vector<int> floored_labels;  // labels whose verbalizer was absent
};

// Reads per-class probabilities off the alternatives at the label position.
// Raw by default: class-token probabilities are reported as-is, summing
// below 1 when mass sits on non-class tokens. A verbalizer with no matching
// alternative gets the 1e-6 floor and is flagged. Multi-token verbalizers
// match on their longest observed leading subword.
inline ExtractionResult extract_label_distribution(const ModelResponse& response,
                                                   Task task,
                                                   bool renormalize = false,
                                                   double floor = 1e-6) {
  if (!response.label_position_found)
    throw ExtractionError("label position not locatable in generation");

  std::map<std::string, double> norm_probs;
  for (const auto& [tok, p] : response.label_token_probs) {
    std::string key = detail::trim(tok);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    if (key.empty()) continue;
    norm_probs[key] = std::max(norm_probs.count(key) ? norm_probs[key] : 0.0, p);
  }

  ExtractionResult out;
  out.distribution = LabelDistribution::for_task(task);
  for (int id : label_ids(task)) {
    std::string verb = verbalizer(task, id);
    std::transform(verb.begin(), verb.end(), verb.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    // Longest alternative that is a leading subword of the verbalizer.
    const std::string* best_key = nullptr;
    for (const auto& [key, p] : norm_probs)
      if (verb.compare(0, key.size(), key) == 0)
        if (!best_key || key.size() > best_key->size()) best_key = &key;
    if (best_key) {
      out.distribution.set(id, std::min(1.0, norm_probs[*best_key]));
    } else {
      out.distribution.set(id, floor);
      out.floored_labels.push_back(id);
    }
  }
  if (renormalize) out.distribution = out.distribution.renormalized();
  out.distribution.validate();
  return out;
}

// Fixed-output classifier used in tests: always answers with the configured
// label distribution and explanation, formatted per task and order.
class StubClassifier : public ModelClient {
 public:
  StubClassifier(std::string model_id, LabelDistribution dist,
                 std::string explanation)
      : model_id_(std::move(model_id)),
        dist_(std::move(dist)),
        explanation_(std::move(explanation)) {}

  std::string model_id() const override { return model_id_; }

  std::string complete_raw(const ModelRequest& req) override {
    ++calls_;
    nlohmann::json j{{"labels", dist_.labels},
                     {"probs", dist_.probs},
                     {"explanation", explanation_},
                     {"order", std::string(to_string(req.order))}};
    return j.dump();
  }

  ModelResponse parse_raw(const std::string& raw,
                          const ModelRequest& req) const override {
    const nlohmann::json j = nlohmann::json::parse(raw);
    ModelResponse resp;
    resp.raw = j;
    LabelDistribution d;
    d.labels = j.at("labels").get<std::vector<int>>();
    d.probs = j.at("probs").get<std::vector<double>>();
    const int label = d.argmax_label();
    const std::string label_text = verbalizer(req.task, label);
    const std::string expl = j.at("explanation").get<std::string>();
    resp.generated_text =
        req.order == PromptOrder::PE
            ? " " + label_text + "\nEXPLANATION: " + expl + "\n\n"
            : " " + expl + "\n" + std::string(label_title(req.task)) + ": " +
                  label_text + "\n\n";
    for (std::size_t i = 0; i < d.labels.size(); ++i)
      resp.label_token_probs[verbalizer(req.task, d.labels[i])] = d.probs[i];
    resp.label_position_found = true;
    resp.explanation_text = expl;
    return resp;
  }

  std::size_t calls() const { return calls_; }

 private:
  std::string model_id_;
  LabelDistribution dist_;
  std::string explanation_;
  std::atomic<std::size_t> calls_{0};
};

// Judge stub. "yes" always affirms, "no" always denies, "seeded" derives a
// per-prompt pseudo-random P(Yes) so naturalness filtering has something to
// rank.
class StubJudge : public ModelClient {
 public:
  enum class Mode { yes, no, seeded };

  explicit StubJudge(Mode mode = Mode::yes, std::uint64_t seed = 0,
                     double p_yes = 1.0)
      : mode_(mode), seed_(seed), p_yes_(p_yes) {}

  std::string model_id() const override { return "stub-judge"; }

  std::string complete_raw(const ModelRequest& req) override {
    ++calls_;
    double p = p_yes_;
    if (mode_ == Mode::no) p = 1.0 - p_yes_;
    if (mode_ == Mode::seeded) {
      Rng rng(derive_seed(seed_, "judge", req.prompt));
      p = rng.unit();
    }
    nlohmann::json j{{"first_token_probs",
                      {{"Yes", p}, {"No", 1.0 - p}}}};
    return j.dump();
  }

  ModelResponse parse_raw(const std::string& raw,
                          const ModelRequest&) const override {
    const nlohmann::json j = nlohmann::json::parse(raw);
    ModelResponse resp;
    resp.raw = j;
    for (const auto& [tok, p] :
         j.at("first_token_probs").get<std::map<std::string, double>>())
      resp.label_token_probs[tok] = p;
    resp.label_position_found = true;
    double best = -1.0;
    for (const auto& [tok, p] : resp.label_token_probs)
      if (p > best) {
        best = p;
        resp.generated_text = tok;
      }
    return resp;
  }

  std::size_t calls() const { return calls_; }

 private:
  Mode mode_;
  std::uint64_t seed_;
  double p_yes_;
  std::atomic<std::size_t> calls_{0};
};

// Cache layer over any client. Hits replay the stored raw payload through
// the inner client's parser; misses pass through and are stored.
class CachingClient : public ModelClient {
 public:
  CachingClient(ModelClient& inner, ResponseCache& cache, bool enabled = true)
      : inner_(inner), cache_(cache), enabled_(enabled) {}

  std::string model_id() const override { return inner_.model_id(); }

  std::string complete_raw(const ModelRequest& req) override {
    if (enabled_) {
      if (auto hit = cache_.lookup(inner_.model_id(), req.prompt)) {
        ++hits_;
        return *hit;
      }
    }
    ++misses_;
    std::string raw = inner_.complete_raw(req);
    if (enabled_) cache_.store(inner_.model_id(), req.prompt, raw);
    return raw;
  }

  ModelResponse parse_raw(const std::string& raw,
                          const ModelRequest& req) const override {
    return inner_.parse_raw(raw, req);
  }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  ModelClient& inner_;
  ResponseCache& cache_;
  bool enabled_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

}  // namespace cct
