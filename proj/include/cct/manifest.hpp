#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cct/hash.hpp"
#include "cct/intervention.hpp"
#include "cct/task.hpp"

namespace cct {

// Frozen description of one evaluation run. Everything that can change the
// produced records is pinned here, including the label verbalizers, so a
// record file is reproducible from the manifest plus model responses alone.
struct RunManifest {
  std::string run_id;
  std::string model_id;
  PromptOrder prompt_order = PromptOrder::PE;
  Task dataset = Task::esnli;
  std::uint64_t rng_seed = 0;
  int few_shot_count = 20;
  InterventionConfig intervention_config;
  double filter_keep_fraction = 0.2;
  std::string created_at;  // ISO-8601 UTC

  void validate() const {
    if (few_shot_count < 1)
      throw SchemaError("manifest: few_shot_count must be >= 1");
    if (!(filter_keep_fraction > 0.0 && filter_keep_fraction <= 1.0))
      throw SchemaError("manifest: filter_keep_fraction must be in (0, 1]");
    if (intervention_config.positions < 1 ||
        intervention_config.candidates_per_position < 1)
      throw SchemaError("manifest: intervention counts must be >= 1");
  }
};

inline std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json verb;
  for (int id : label_ids(m.dataset))
    verb[std::to_string(id)] = verbalizer(m.dataset, id);
  return {{"run_id", m.run_id},
          {"model_id", m.model_id},
          {"prompt_order", std::string(to_string(m.prompt_order))},
          {"dataset", std::string(to_string(m.dataset))},
          {"rng_seed", m.rng_seed},
          {"few_shot_count", m.few_shot_count},
          {"intervention_config",
           intervention_config_to_json(m.intervention_config)},
          {"filter_keep_fraction", m.filter_keep_fraction},
          {"verbalizers", verb},
          {"created_at", m.created_at}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.model_id = j.at("model_id").get<std::string>();
  auto order = prompt_order_from_string(j.at("prompt_order").get<std::string>());
  if (!order) throw SchemaError("manifest: bad prompt_order");
  m.prompt_order = *order;
  auto task = task_from_string(j.at("dataset").get<std::string>());
  if (!task) throw SchemaError("manifest: bad dataset");
  m.dataset = *task;
  m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  m.few_shot_count = j.at("few_shot_count").get<int>();
  m.intervention_config =
      intervention_config_from_json(j.at("intervention_config"));
  m.filter_keep_fraction = j.at("filter_keep_fraction").get<double>();
  m.created_at = j.at("created_at").get<std::string>();
  m.validate();
  return m;
}

// Canonical hash used to bind a record file to the manifest it came from.
inline std::string manifest_hash(const RunManifest& m) {
  return sha256_hex(manifest_to_json(m).dump());
}

inline void write_manifest(const RunManifest& m,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw SchemaError("cannot write manifest: " + path.string());
  out << manifest_to_json(m).dump(2) << '\n';
}

inline RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read manifest: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(nlohmann::json::parse(ss.str()));
}

}  // namespace cct
