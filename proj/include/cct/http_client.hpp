#pragma once

// Generic JSON completion endpoint adapter. Request:
//   POST <path> {model, prompt, max_tokens, temperature: 0, logprobs: K, stop}
// The response must expose generated text, the generated tokens, and
// per-position alternative token log-probabilities; dotted paths in
// HttpAdapterConfig map those onto the concrete payload shape (defaults
// follow the OpenAI completions layout). Transient failures retry with
// exponential backoff.

#include <atomic>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cct/model.hpp"

namespace cct {

struct HttpAdapterConfig {
  // response field paths (dotted; integer components index arrays)
  std::string text_path = "choices.0.text";
  std::string tokens_path = "choices.0.logprobs.tokens";
  std::string top_logprobs_path = "choices.0.logprobs.top_logprobs";
  bool probs_are_log = true;
  // request field names
  std::string model_field = "model";
  std::string prompt_field = "prompt";
  std::string max_tokens_field = "max_tokens";
  std::string temperature_field = "temperature";
  std::string logprobs_field = "logprobs";
  std::string stop_field = "stop";
};

inline HttpAdapterConfig http_adapter_from_json(const nlohmann::json& j) {
  HttpAdapterConfig c;
  c.text_path = j.value("text_path", c.text_path);
  c.tokens_path = j.value("tokens_path", c.tokens_path);
  c.top_logprobs_path = j.value("top_logprobs_path", c.top_logprobs_path);
  c.probs_are_log = j.value("probs_are_log", c.probs_are_log);
  c.model_field = j.value("model_field", c.model_field);
  c.prompt_field = j.value("prompt_field", c.prompt_field);
  c.max_tokens_field = j.value("max_tokens_field", c.max_tokens_field);
  c.temperature_field = j.value("temperature_field", c.temperature_field);
  c.logprobs_field = j.value("logprobs_field", c.logprobs_field);
  c.stop_field = j.value("stop_field", c.stop_field);
  return c;
}

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};  // doubles per retry
};

namespace detail {

inline const nlohmann::json* resolve_path(const nlohmann::json& j,
                                          const std::string& dotted) {
  const nlohmann::json* cur = &j;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!part.empty()) {
      if (cur->is_array()) {
        const std::size_t idx = std::stoul(part);
        if (idx >= cur->size()) return nullptr;
        cur = &(*cur)[idx];
      } else if (cur->is_object() && cur->contains(part)) {
        cur = &cur->at(part);
      } else {
        return nullptr;
      }
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return cur;
}

}  // namespace detail

// Count of HTTP requests actually sent, process-wide. Hermetic runs assert
// this stays at zero.
inline std::atomic<std::uint64_t>& http_network_calls() {
  static std::atomic<std::uint64_t> count{0};
  return count;
}

class HttpCompletionClient : public ModelClient {
 public:
  HttpCompletionClient(std::string base_url, std::string model_name,
                       std::string path = "/v1/completions",
                       HttpAdapterConfig adapter = {}, RetryPolicy retry = {})
      : base_url_(std::move(base_url)),
        model_name_(std::move(model_name)),
        path_(std::move(path)),
        adapter_(std::move(adapter)),
        retry_(retry) {}

  std::string model_id() const override { return model_name_; }

  std::string complete_raw(const ModelRequest& req) override {
    nlohmann::json body;
    body[adapter_.model_field] = model_name_;
    body[adapter_.prompt_field] = req.prompt;
    body[adapter_.max_tokens_field] = req.max_tokens;
    body[adapter_.temperature_field] = 0;
    body[adapter_.logprobs_field] = req.top_k_logprobs;
    body[adapter_.stop_field] = "\n\n";

    std::string last_error;
    auto backoff = retry_.initial_backoff;
    for (int attempt = 0; attempt < retry_.attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      httplib::Client cli(base_url_);
      cli.set_read_timeout(120, 0);
      ++http_network_calls();
      auto res = cli.Post(path_, body.dump(), "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "server error: HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw ClientError("endpoint returned HTTP " +
                          std::to_string(res->status) + ": " + res->body);
      return res->body;
    }
    throw ClientError("exhausted " + std::to_string(retry_.attempts) +
                      " attempts against " + base_url_ + path_ + ": " +
                      last_error);
  }

  ModelResponse parse_raw(const std::string& raw,
                          const ModelRequest& req) const override {
    nlohmann::json j = nlohmann::json::parse(raw);
    ModelResponse resp;
    resp.raw = j;

    const nlohmann::json* text = detail::resolve_path(j, adapter_.text_path);
    if (!text || !text->is_string())
      throw ClientError("response missing text at '" + adapter_.text_path + "'");
    resp.generated_text = text->get<std::string>();

    const ParsedCompletion parsed =
        parse_completion(resp.generated_text, req.task, req.order);
    resp.explanation_text = parsed.explanation_text;

    const nlohmann::json* tokens = detail::resolve_path(j, adapter_.tokens_path);
    const nlohmann::json* tops =
        detail::resolve_path(j, adapter_.top_logprobs_path);
    if (!tokens || !tokens->is_array() || !tops || !tops->is_array())
      return resp;  // no logprobs in response; label position stays unlocated

    const std::size_t label_index = locate_label_index(
        *tokens, resp.generated_text, req);
    if (label_index >= tops->size()) return resp;

    const nlohmann::json& alts = (*tops)[label_index];
    if (!alts.is_object()) return resp;
    for (const auto& [tok, v] : alts.items()) {
      const double x = v.get<double>();
      resp.label_token_probs[tok] = adapter_.probs_are_log ? std::exp(x) : x;
    }
    resp.label_position_found = true;
    return resp;
  }

 private:
  // Index of the generated token carrying the class verbalizer: the first
  // token with visible text after the label marker (PE and judge prompts
  // complete the label immediately; EP labels follow the generated
  // "<TITLE>:" line).
  std::size_t locate_label_index(const nlohmann::json& tokens,
                                 const std::string& text,
                                 const ModelRequest& req) const {
    std::size_t marker_end = 0;
    if (!req.is_judge && req.order == PromptOrder::EP) {
      const std::string title = std::string(label_title(req.task)) + ":";
      const std::size_t pos = text.find(title);
      if (pos == std::string::npos) return tokens.size();
      marker_end = pos + title.size();
    }
    std::size_t offset = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::string tok = tokens[i].get<std::string>();
      const std::size_t begin = offset;
      offset += tok.size();
      if (offset <= marker_end) continue;
      if (detail::trim(tok).empty()) continue;
      if (begin >= marker_end || !detail::trim(tok.substr(marker_end - begin)).empty())
        return i;
    }
    return tokens.size();
  }

  std::string base_url_;
  std::string model_name_;
  std::string path_;
  HttpAdapterConfig adapter_;
  RetryPolicy retry_;
};

}  // namespace cct
