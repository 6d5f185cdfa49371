#pragma once

// Synthetic glass-box classifier: logits are an explicit function of the
// words in the input, so every intervention's true impact is known in closed
// form. Explanation policies make mention behavior programmable, which is
// what lets the faithfulness metrics be meta-evaluated:
//   verbatim  - repeats the full input text (mentions everything)
//   never     - fixed text mentioning nothing
//   oracle(t) - mentions exactly the lexicon words whose true TVD >= t
//   random(p) - mentions each lexicon word independently with probability p

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cct/distribution.hpp"
#include "cct/mention.hpp"
#include "cct/metrics.hpp"
#include "cct/model.hpp"
#include "cct/rng.hpp"

namespace cct {

struct GlassBoxPolicy {
  enum class Kind { verbatim, never, oracle, random };
  Kind kind = Kind::verbatim;
  double threshold = 0.5;  // oracle
  double p = 0.5;          // random
  std::uint64_t seed = 0;  // random
};

inline std::string_view to_string(GlassBoxPolicy::Kind k) {
  switch (k) {
    case GlassBoxPolicy::Kind::verbatim: return "verbatim";
    case GlassBoxPolicy::Kind::never: return "never";
    case GlassBoxPolicy::Kind::oracle: return "oracle";
    case GlassBoxPolicy::Kind::random: return "random";
  }
  return "verbatim";
}

inline std::optional<GlassBoxPolicy::Kind> policy_kind_from_string(
    std::string_view s) {
  if (s == "verbatim") return GlassBoxPolicy::Kind::verbatim;
  if (s == "never") return GlassBoxPolicy::Kind::never;
  if (s == "oracle") return GlassBoxPolicy::Kind::oracle;
  if (s == "random") return GlassBoxPolicy::Kind::random;
  return std::nullopt;
}

struct GlassBoxConfig {
  std::vector<int> labels;                  // ascending label ids
  std::vector<double> base_logits;          // aligned with labels
  std::map<std::string, std::vector<double>> impact_lexicon;
  GlassBoxPolicy policy;
  double noise = 0.0;
  std::uint64_t noise_seed = 0;

  void validate() const {
    if (labels.empty() || labels.size() != base_logits.size())
      throw std::invalid_argument("glassbox: labels/base_logits mismatch");
    for (const auto& [word, delta] : impact_lexicon)
      if (delta.size() != labels.size())
        throw std::invalid_argument("glassbox: delta arity mismatch for '" +
                                    word + "'");
    if (policy.kind == GlassBoxPolicy::Kind::oracle &&
        !(policy.threshold >= 0.0 && policy.threshold <= 1.0))
      throw std::invalid_argument("glassbox: oracle threshold outside [0,1]");
    if (noise < 0.0) throw std::invalid_argument("glassbox: negative noise");
  }
};

inline nlohmann::json glassbox_config_to_json(const GlassBoxConfig& c) {
  nlohmann::json base;
  for (std::size_t i = 0; i < c.labels.size(); ++i)
    base[std::to_string(c.labels[i])] = c.base_logits[i];
  nlohmann::json lex;
  for (const auto& [w, d] : c.impact_lexicon) lex[w] = d;
  return {{"labels", c.labels},
          {"base_logits", base},
          {"impact_lexicon", lex},
          {"policy",
           {{"kind", std::string(to_string(c.policy.kind))},
            {"threshold", c.policy.threshold},
            {"p", c.policy.p},
            {"seed", c.policy.seed}}},
          {"noise", c.noise},
          {"noise_seed", c.noise_seed}};
}

inline GlassBoxConfig glassbox_config_from_json(const nlohmann::json& j) {
  GlassBoxConfig c;
  c.labels = j.at("labels").get<std::vector<int>>();
  c.base_logits.assign(c.labels.size(), 0.0);
  for (std::size_t i = 0; i < c.labels.size(); ++i)
    c.base_logits[i] =
        j.at("base_logits").at(std::to_string(c.labels[i])).get<double>();
  if (j.contains("impact_lexicon"))
    for (const auto& [w, d] : j.at("impact_lexicon").items())
      c.impact_lexicon[w] = d.get<std::vector<double>>();
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    auto kind = policy_kind_from_string(p.value("kind", "verbatim"));
    if (!kind) throw std::invalid_argument("glassbox: unknown policy kind");
    c.policy.kind = *kind;
    c.policy.threshold = p.value("threshold", 0.5);
    c.policy.p = p.value("p", 0.5);
    c.policy.seed = p.value("seed", std::uint64_t{0});
  }
  c.noise = j.value("noise", 0.0);
  c.noise_seed = j.value("noise_seed", std::uint64_t{0});
  c.validate();
  return c;
}

namespace glassbox_detail {

inline LabelDistribution softmax(const std::vector<int>& labels,
                                 const std::vector<double>& logits) {
  LabelDistribution d;
  d.labels = labels;
  d.probs.resize(logits.size());
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    d.probs[i] = std::exp(logits[i] - mx);
    sum += d.probs[i];
  }
  for (double& p : d.probs) p /= sum;
  d.normalized = true;
  return d;
}

inline std::vector<double> input_logits(const GlassBoxConfig& c,
                                        const std::string& input_text) {
  std::vector<double> logits = c.base_logits;
  for (const std::string& w : detail::split_words(detail::to_lower(input_text))) {
    const auto it = c.impact_lexicon.find(w);
    if (it == c.impact_lexicon.end()) continue;
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += it->second[i];
  }
  if (c.noise > 0.0) {
    Rng rng(derive_seed(c.noise_seed, "glassbox-noise", input_text));
    for (double& v : logits) v += rng.normal() * c.noise;
  }
  return logits;
}

}  // namespace glassbox_detail

struct GlassBoxPrediction {
  LabelDistribution distribution;
  std::string explanation;
};

// TVD between the prediction with the word present and the prediction with
// one occurrence of it removed: the word's true impact in this context.
inline double glassbox_word_impact(const GlassBoxConfig& config,
                                   const std::string& input_text,
                                   const std::string& word) {
  const auto it = config.impact_lexicon.find(word);
  if (it == config.impact_lexicon.end()) return 0.0;
  std::vector<double> with = glassbox_detail::input_logits(config, input_text);
  std::vector<double> without = with;
  for (std::size_t i = 0; i < without.size(); ++i) without[i] -= it->second[i];
  return tvd(glassbox_detail::softmax(config.labels, with),
             glassbox_detail::softmax(config.labels, without));
}

inline GlassBoxPrediction predict_glassbox(const GlassBoxConfig& config,
                                           const std::string& input_text) {
  config.validate();
  GlassBoxPrediction out;
  out.distribution = glassbox_detail::softmax(
      config.labels, glassbox_detail::input_logits(config, input_text));

  if (config.policy.kind == GlassBoxPolicy::Kind::verbatim) {
    out.explanation = input_text;
    return out;
  }

  // Candidate words = lexicon entries present in the input.
  std::vector<std::string> mentioned;
  if (config.policy.kind != GlassBoxPolicy::Kind::never) {
    std::set<std::string> seen;
    for (const std::string& w :
         detail::split_words(detail::to_lower(input_text))) {
      if (!config.impact_lexicon.count(w) || !seen.insert(w).second) continue;
      if (config.policy.kind == GlassBoxPolicy::Kind::oracle) {
        if (glassbox_word_impact(config, input_text, w) >=
            config.policy.threshold)
          mentioned.push_back(w);
      } else {  // random(p): independent coin per (word, input)
        Rng rng(derive_seed(config.policy.seed, "glassbox-mention",
                            w + "\n" + input_text));
        if (rng.bernoulli(config.policy.p)) mentioned.push_back(w);
      }
    }
  }

  // Symbolic explanation: mentions the listed words and nothing else, so
  // substring matching cannot pick up accidental hits from template prose.
  std::string text = "<<";
  for (std::size_t i = 0; i < mentioned.size(); ++i) {
    text += i == 0 ? " " : ", ";
    text += mentioned[i];
  }
  text += " >>";
  out.explanation = text;
  return out;
}

// ModelClient facade over predict_glassbox.
class GlassBoxClient : public ModelClient {
 public:
  explicit GlassBoxClient(GlassBoxConfig config,
                          std::string model_id = "glassbox")
      : config_(std::move(config)), model_id_(std::move(model_id)) {
    config_.validate();
  }

  const GlassBoxConfig& config() const { return config_; }
  std::string model_id() const override { return model_id_; }

  std::string complete_raw(const ModelRequest& req) override {
    ++calls_;
    const GlassBoxPrediction pred = predict_glassbox(config_, req.query_text);
    return nlohmann::json{{"labels", pred.distribution.labels},
                          {"probs", pred.distribution.probs},
                          {"explanation", pred.explanation}}
        .dump();
  }

  ModelResponse parse_raw(const std::string& raw,
                          const ModelRequest& req) const override {
    const nlohmann::json j = nlohmann::json::parse(raw);
    ModelResponse resp;
    resp.raw = j;
    LabelDistribution d;
    d.labels = j.at("labels").get<std::vector<int>>();
    d.probs = j.at("probs").get<std::vector<double>>();
    d.normalized = true;
    const std::string expl = j.at("explanation").get<std::string>();
    const std::string label_text = verbalizer(req.task, d.argmax_label());
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
  GlassBoxConfig config_;
  std::string model_id_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace cct
