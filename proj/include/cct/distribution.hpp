#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "cct/task.hpp"

namespace cct {

// Per-class probability vector read off a model's token probabilities.
// Raw vectors may sum below 1 (mass on non-class tokens is not invented);
// `normalized` marks vectors rescaled to sum 1.
struct LabelDistribution {
  std::vector<int> labels;   // ascending label ids, the task's full set
  std::vector<double> probs; // aligned with labels
  bool normalized = false;

  bool operator==(const LabelDistribution&) const = default;

  static LabelDistribution for_task(Task t) {
    LabelDistribution d;
    d.labels = label_ids(t);
    d.probs.assign(d.labels.size(), 0.0);
    return d;
  }

  double sum() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }

  double prob_of(int label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return probs[i];
    throw std::out_of_range("label not in distribution");
  }

  void set(int label, double p) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) {
        probs[i] = p;
        return;
      }
    throw std::out_of_range("label not in distribution");
  }

  // Argmax label; ties resolved toward the lowest label id.
  int argmax_label() const {
    if (probs.empty()) throw std::logic_error("empty distribution");
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
      if (probs[i] > probs[best]) best = i;
    return labels[best];
  }

  LabelDistribution renormalized() const {
    const double s = sum();
    if (s <= 0.0)
      throw std::domain_error("cannot renormalize zero-mass distribution");
    LabelDistribution out = *this;
    for (double& p : out.probs) p /= s;
    out.normalized = true;
    return out;
  }

  void validate() const {
    if (labels.size() != probs.size() || labels.empty())
      throw std::invalid_argument("distribution labels/probs mismatch");
    for (std::size_t i = 1; i < labels.size(); ++i)
      if (labels[i] <= labels[i - 1])
        throw std::invalid_argument("distribution labels not ascending");
    for (double p : probs)
      if (!(p >= 0.0 && p <= 1.0) || !std::isfinite(p))
        throw std::invalid_argument("probability outside [0,1]");
    const double s = sum();
    if (normalized ? std::abs(s - 1.0) > 1e-9 : s > 1.0 + 1e-9)
      throw std::invalid_argument("distribution mass invariant violated");
  }
};

inline nlohmann::json distribution_to_json(const LabelDistribution& d) {
  return {{"labels", d.labels}, {"probs", d.probs}, {"normalized", d.normalized}};
}

inline LabelDistribution distribution_from_json(const nlohmann::json& j) {
  LabelDistribution d;
  d.labels = j.at("labels").get<std::vector<int>>();
  d.probs = j.at("probs").get<std::vector<double>>();
  d.normalized = j.at("normalized").get<bool>();
  return d;
}

}  // namespace cct
