#pragma once

// Persistent JSONL record storage. One record per (example, intervention)
// outcome; baseline records (no intervention) carry the pre-intervention
// measurement only. Probabilities are serialized at full precision; the
// paper-style rounded percentages never enter the stored artifacts.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cct/distribution.hpp"
#include "cct/intervention.hpp"

namespace cct {

struct EvaluationRecord {
  std::string example_id;
  std::optional<Intervention> intervention;  // nullopt -> baseline record
  LabelDistribution pre_distribution;
  std::optional<LabelDistribution> post_distribution;
  std::optional<double> impact;    // TVD(pre, post)
  std::optional<bool> mentioned;
  int pre_label = 0;
  std::optional<int> post_label;
  std::string explanation_text;

  bool operator==(const EvaluationRecord&) const = default;

  bool is_baseline() const { return !intervention.has_value(); }
};

inline void validate_record(const EvaluationRecord& r) {
  if (r.is_baseline()) {
    if (r.post_distribution || r.impact || r.mentioned || r.post_label)
      throw SchemaError("baseline record " + r.example_id +
                        " must not carry post-intervention fields");
  } else {
    if (!r.post_distribution || !r.impact || !r.mentioned || !r.post_label)
      throw SchemaError("intervention record " + r.example_id +
                        " missing post-intervention fields");
  }
}

inline nlohmann::json record_to_json(const EvaluationRecord& r) {
  nlohmann::json j;
  j["example_id"] = r.example_id;
  j["intervention"] = r.intervention ? intervention_to_json(*r.intervention)
                                     : nlohmann::json(nullptr);
  j["pre_distribution"] = distribution_to_json(r.pre_distribution);
  j["post_distribution"] = r.post_distribution
                               ? distribution_to_json(*r.post_distribution)
                               : nlohmann::json(nullptr);
  j["impact"] = r.impact ? nlohmann::json(*r.impact) : nlohmann::json(nullptr);
  j["mentioned"] =
      r.mentioned ? nlohmann::json(*r.mentioned) : nlohmann::json(nullptr);
  j["pre_label"] = r.pre_label;
  j["post_label"] =
      r.post_label ? nlohmann::json(*r.post_label) : nlohmann::json(nullptr);
  j["explanation_text"] = r.explanation_text;
  return j;
}

inline EvaluationRecord record_from_json(const nlohmann::json& j) {
  EvaluationRecord r;
  r.example_id = j.at("example_id").get<std::string>();
  if (!j.at("intervention").is_null())
    r.intervention = intervention_from_json(j.at("intervention"));
  r.pre_distribution = distribution_from_json(j.at("pre_distribution"));
  if (!j.at("post_distribution").is_null())
    r.post_distribution = distribution_from_json(j.at("post_distribution"));
  if (!j.at("impact").is_null()) r.impact = j.at("impact").get<double>();
  if (!j.at("mentioned").is_null()) r.mentioned = j.at("mentioned").get<bool>();
  r.pre_label = j.at("pre_label").get<int>();
  if (!j.at("post_label").is_null()) r.post_label = j.at("post_label").get<int>();
  r.explanation_text = j.at("explanation_text").get<std::string>();
  return r;
}

inline void write_records(const std::vector<EvaluationRecord>& records,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const EvaluationRecord& r : records) out << record_to_json(r).dump() << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<EvaluationRecord> read_records(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open records file: " + path.string());
  std::vector<EvaluationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return out;
}

inline void write_interventions(const std::vector<Intervention>& ivs,
                                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const Intervention& iv : ivs) out << intervention_to_json(iv).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<Intervention> read_interventions(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open interventions file: " + path.string());
  std::vector<Intervention> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(intervention_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

}  // namespace cct
