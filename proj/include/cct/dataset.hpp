#pragma once

// JSONL dataset ingestion. One JSON object per line:
//   esnli: {"id","text","hypothesis","label","explanation"}
//   ecqa:  {"id","question","options":[5 strings],"label":1..5,"explanation"}
//   comve: {"id","sentence0","sentence1","label":0|1,"explanation"}
// plus an optional "tokens" array of {"surface","pos","char_offset","segment"}.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cct/example.hpp"
#include "cct/task.hpp"

namespace cct {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline int parse_gold_label(Task task, const nlohmann::json& v) {
  if (task == Task::esnli) {
    if (v.is_string()) {
      auto id = label_from_name(task, v.get<std::string>());
      if (id) return *id;
      throw SchemaError("unknown esnli label: " + v.dump());
    }
    if (v.is_number_integer()) {
      const int id = v.get<int>();
      if (id >= 0 && id <= 2) return id;
    }
    throw SchemaError("unknown esnli label: " + v.dump());
  }
  if (!v.is_number_integer())
    throw SchemaError("label must be an integer: " + v.dump());
  return v.get<int>();
}

}  // namespace detail

// Parses one dataset line into an Example and validates it.
inline Example example_from_json(const nlohmann::json& j, Task task) {
  Example ex;
  ex.task = task;
  ex.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                 : j.at("id").dump();
  switch (task) {
    case Task::esnli:
      ex.fields = {{"text", j.at("text").get<std::string>()},
                   {"hypothesis", j.at("hypothesis").get<std::string>()}};
      break;
    case Task::ecqa: {
      const auto& opts = j.at("options");
      if (!opts.is_array() || opts.size() != 5)
        throw SchemaError("ecqa requires exactly 5 options, got " +
                          std::to_string(opts.is_array() ? opts.size() : 0));
      ex.fields = {{"question", j.at("question").get<std::string>()}};
      for (int i = 0; i < 5; ++i)
        ex.fields.emplace_back("option" + std::to_string(i + 1),
                               opts[i].get<std::string>());
      break;
    }
    case Task::comve:
      ex.fields = {{"sentence0", j.at("sentence0").get<std::string>()},
                   {"sentence1", j.at("sentence1").get<std::string>()}};
      break;
  }
  ex.gold_label = detail::parse_gold_label(task, j.at("label"));
  ex.reference_explanation = j.value("explanation", std::string{});
  if (j.contains("tokens")) ex.tokens = tokens_from_json(j.at("tokens"));
  validate_example(ex);
  return ex;
}

inline nlohmann::json example_to_json(const Example& ex) {
  nlohmann::json j;
  j["id"] = ex.id;
  switch (ex.task) {
    case Task::esnli:
      j["text"] = ex.field("text");
      j["hypothesis"] = ex.field("hypothesis");
      j["label"] = verbalizer(ex.task, ex.gold_label);
      break;
    case Task::ecqa: {
      j["question"] = ex.field("question");
      nlohmann::json opts = nlohmann::json::array();
      for (int i = 1; i <= 5; ++i) opts.push_back(ex.field("option" + std::to_string(i)));
      j["options"] = opts;
      j["label"] = ex.gold_label;
      break;
    }
    case Task::comve:
      j["sentence0"] = ex.field("sentence0");
      j["sentence1"] = ex.field("sentence1");
      j["label"] = ex.gold_label;
      break;
  }
  j["explanation"] = ex.reference_explanation;
  if (ex.tokens) j["tokens"] = tokens_to_json(*ex.tokens);
  return j;
}

// Reads and validates a dataset file. Pure function of the file bytes;
// examples come back in file order. Error messages carry the line number.
inline std::vector<Example> ingest_dataset(const std::filesystem::path& path,
                                           Task task) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path.string());
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                        ": malformed JSON: " + e.what());
    }
    try {
      out.push_back(example_from_json(j, task));
    } catch (const std::exception& e) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return out;
}

inline void write_dataset(const std::vector<Example>& examples,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const Example& ex : examples) out << example_to_json(ex).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace cct
