#pragma once

// Run orchestration: baseline query, intervention generation, naturalness
// filtering, post-intervention queries, mention detection, record emission.
// Examples are processed concurrently but records are appended in test-set
// order through a sequencer, so a run's record file is a deterministic
// function of (manifest, model responses) regardless of concurrency. An
// example either contributes its full record group or a failure log entry,
// never a partial group; that is what makes interrupted runs resumable.

#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cct/dataset.hpp"
#include "cct/glassbox.hpp"
#include "cct/manifest.hpp"
#include "cct/metrics.hpp"
#include "cct/model.hpp"
#include "cct/naturalness.hpp"
#include "cct/pos.hpp"
#include "cct/records.hpp"

namespace cct {

struct RunAbortError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResumeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunFailure {
  std::string example_id;
  std::string stage;
  std::string reason;
};

struct RunOptions {
  std::filesystem::path run_dir;  // empty: keep everything in memory
  int concurrency = 1;
  bool use_cache = true;
  bool renormalize = false;
  std::string naturalness_template = kDefaultNaturalnessTemplate;
  int top_k_logprobs = 10;
  int max_tokens = 256;
  PosProvider* pos_provider = nullptr;  // used when examples lack tokens
};

struct RunState {
  std::string manifest_hash;
  std::set<std::string> completed;
  std::vector<RunFailure> failures;
};

struct RunResult {
  std::vector<EvaluationRecord> records;     // appended this run, in order
  std::vector<Intervention> interventions;   // every candidate generated
  std::vector<RunFailure> failures;
  std::size_t examples_processed = 0;
  std::size_t examples_resumed = 0;
};

namespace rundir {

inline std::filesystem::path manifest_path(const std::filesystem::path& d) {
  return d / "manifest.json";
}
inline std::filesystem::path manifest_sha_path(const std::filesystem::path& d) {
  return d / "manifest.sha256";
}
inline std::filesystem::path records_path(const std::filesystem::path& d) {
  return d / "records.jsonl";
}
inline std::filesystem::path interventions_path(const std::filesystem::path& d) {
  return d / "interventions.jsonl";
}
inline std::filesystem::path failures_path(const std::filesystem::path& d) {
  return d / "failures.jsonl";
}
inline std::filesystem::path gold_path(const std::filesystem::path& d) {
  return d / "gold.json";
}
inline std::filesystem::path cache_path(const std::filesystem::path& d) {
  return d / "cache";
}

}  // namespace rundir

namespace detail {

struct ExampleOutcome {
  std::vector<EvaluationRecord> records;
  std::vector<Intervention> interventions;
  std::optional<RunFailure> failure;
  bool skipped = false;
};

inline ModelRequest make_request(const Example& ex, const PromptSpec& spec,
                                 const RunOptions& opts) {
  ModelRequest req;
  req.prompt = spec.text();
  req.query_text = ex.joined_input();
  req.task = ex.task;
  req.order = spec.order;
  req.max_tokens = opts.max_tokens;
  req.top_k_logprobs = opts.top_k_logprobs;
  return req;
}

inline ExampleOutcome process_example(const Example& input,
                                      const RunManifest& manifest,
                                      const std::vector<Example>& train_pool,
                                      ModelClient& client, ModelClient& judge,
                                      const WordInventory& inventory,
                                      const RunOptions& opts) {
  ExampleOutcome out;
  std::string stage = "annotate";
  try {
    Example ex = input;
    if (!ex.tokens.has_value()) {
      if (!opts.pos_provider)
        throw std::runtime_error(
            "example lacks tokens and no POS provider is configured");
      ex = annotate_pos(std::move(ex), *opts.pos_provider);
    }

    stage = "baseline";
    const PromptSpec base_prompt = build_prompt(
        ex, train_pool, manifest.prompt_order, manifest.rng_seed,
        manifest.few_shot_count);
    const ModelResponse base_resp =
        client.complete(make_request(ex, base_prompt, opts));
    const ExtractionResult base_extract =
        extract_label_distribution(base_resp, ex.task, opts.renormalize);

    EvaluationRecord baseline;
    baseline.example_id = ex.id;
    baseline.pre_distribution = base_extract.distribution;
    baseline.pre_label = base_extract.distribution.argmax_label();
    baseline.explanation_text = base_resp.explanation_text;

    stage = "generate";
    Rng gen_rng(derive_seed(manifest.rng_seed, "intervene", ex.id));
    std::vector<Intervention> candidates = generate_interventions(
        ex, inventory, gen_rng, manifest.intervention_config);

    stage = "naturalness";
    for (Intervention& iv : candidates) {
      try {
        const NaturalnessScore ns =
            score_naturalness(iv, ex.field(iv.segment), judge,
                              opts.naturalness_template);
        iv.naturalness_score = ns.score;
      } catch (const ClientError&) {
        iv.naturalness_score = std::nullopt;  // flagged unscored
      }
    }

    stage = "filter";
    const std::vector<Intervention> kept =
        filter_top_fraction(candidates, manifest.filter_keep_fraction);

    stage = "post";
    out.records.push_back(baseline);
    for (const Intervention& iv : kept) {
      Example modified = ex;
      modified.mutable_field(iv.segment) = iv.modified_text;
      const PromptSpec post_prompt = build_prompt(
          modified, train_pool, manifest.prompt_order, manifest.rng_seed,
          manifest.few_shot_count);
      const ModelResponse post_resp =
          client.complete(make_request(modified, post_prompt, opts));
      const ExtractionResult post_extract =
          extract_label_distribution(post_resp, ex.task, opts.renormalize);

      EvaluationRecord rec;
      rec.example_id = ex.id;
      rec.intervention = iv;
      rec.pre_distribution = baseline.pre_distribution;
      rec.pre_label = baseline.pre_label;
      rec.post_distribution = post_extract.distribution;
      rec.post_label = post_extract.distribution.argmax_label();
      rec.impact = tvd(baseline.pre_distribution, post_extract.distribution);
      rec.mentioned =
          detect_mention(post_resp.explanation_text, iv.inserted_word).mentioned;
      rec.explanation_text = post_resp.explanation_text;
      out.records.push_back(std::move(rec));
    }
    out.interventions = std::move(candidates);
  } catch (const std::exception& e) {
    out.records.clear();
    out.interventions.clear();
    out.failure = RunFailure{input.id, stage, e.what()};
  }
  return out;
}

class RunAppender {
 public:
  RunAppender(const std::filesystem::path& dir, bool truncate) {
    if (dir.empty()) return;
    const auto mode = truncate ? std::ios::trunc : std::ios::app;
    records_.open(rundir::records_path(dir), mode);
    interventions_.open(rundir::interventions_path(dir), mode);
    failures_.open(rundir::failures_path(dir), mode);
    if (!records_ || !interventions_ || !failures_)
      throw IoError("cannot open run files under " + dir.string());
    enabled_ = true;
  }

  void append(const ExampleOutcome& out) {
    if (!enabled_) return;
    for (const EvaluationRecord& r : out.records)
      records_ << record_to_json(r).dump() << '\n';
    for (const Intervention& iv : out.interventions)
      interventions_ << intervention_to_json(iv).dump() << '\n';
    if (out.failure)
      failures_ << nlohmann::json{{"example_id", out.failure->example_id},
                                  {"stage", out.failure->stage},
                                  {"reason", out.failure->reason}}
                       .dump()
                << '\n';
    records_.flush();
    interventions_.flush();
    failures_.flush();
  }

 private:
  bool enabled_ = false;
  std::ofstream records_;
  std::ofstream interventions_;
  std::ofstream failures_;
};

}  // namespace detail

// Reconstructs run state from a run directory. Refuses to resume when the
// manifest no longer hashes to the value recorded at run start.
inline RunState resume(const std::filesystem::path& run_dir) {
  const RunManifest manifest = read_manifest(rundir::manifest_path(run_dir));
  std::ifstream sha_in(rundir::manifest_sha_path(run_dir));
  if (!sha_in)
    throw ResumeError("missing manifest.sha256 in " + run_dir.string());
  std::string stored;
  sha_in >> stored;
  const std::string actual = manifest_hash(manifest);
  if (stored != actual)
    throw ResumeError("manifest hash mismatch: run dir records " + stored +
                      " but manifest.json hashes to " + actual +
                      "; refusing to resume");

  RunState state;
  state.manifest_hash = actual;
  if (std::filesystem::exists(rundir::records_path(run_dir)))
    for (const EvaluationRecord& r :
         read_records(rundir::records_path(run_dir)))
      if (r.is_baseline()) state.completed.insert(r.example_id);
  if (std::filesystem::exists(rundir::failures_path(run_dir))) {
    std::ifstream in(rundir::failures_path(run_dir));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const nlohmann::json j = nlohmann::json::parse(line);
      state.failures.push_back(RunFailure{j.at("example_id"), j.at("stage"),
                                          j.at("reason")});
    }
  }
  return state;
}

// Full evaluation over a test set. With `state` given, previously completed
// examples are skipped (their records already sit in the run directory) and
// previously failed ones are retried. Aborts once more than half of the
// examples have failed.
inline RunResult run_evaluation(const RunManifest& manifest,
                                const std::vector<Example>& test_set,
                                const std::vector<Example>& train_pool,
                                ModelClient& client, ModelClient& judge,
                                const WordInventory& inventory,
                                const RunOptions& opts = {},
                                const RunState* state = nullptr) {
  manifest.validate();
  if (state && state->manifest_hash != manifest_hash(manifest))
    throw ResumeError("run state does not match this manifest");

  const bool fresh = state == nullptr;
  if (!opts.run_dir.empty() && fresh) {
    std::filesystem::create_directories(opts.run_dir);
    write_manifest(manifest, rundir::manifest_path(opts.run_dir));
    std::ofstream sha(rundir::manifest_sha_path(opts.run_dir), std::ios::trunc);
    sha << manifest_hash(manifest) << '\n';
    nlohmann::json gold;
    for (const Example& ex : test_set) gold[ex.id] = ex.gold_label;
    std::ofstream gf(rundir::gold_path(opts.run_dir), std::ios::trunc);
    gf << gold.dump(2) << '\n';
  }

  detail::RunAppender appender(opts.run_dir, fresh);

  RunResult result;
  std::mutex mu;
  std::map<std::size_t, detail::ExampleOutcome> pending;
  std::size_t next_to_append = 0;
  std::size_t next_index = 0;
  std::size_t failure_count = state ? state->failures.size() : 0;
  bool aborted = false;

  const auto drain_ready = [&]() {  // holding mu
    while (true) {
      const auto it = pending.find(next_to_append);
      if (it == pending.end()) break;
      appender.append(it->second);
      if (!it->second.skipped) {
        for (EvaluationRecord& r : it->second.records)
          result.records.push_back(std::move(r));
        for (Intervention& iv : it->second.interventions)
          result.interventions.push_back(std::move(iv));
        if (it->second.failure) result.failures.push_back(*it->second.failure);
      }
      pending.erase(it);
      ++next_to_append;
    }
  };

  const auto worker = [&]() {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (aborted || next_index >= test_set.size()) return;
        i = next_index++;
      }
      detail::ExampleOutcome outcome;
      if (state && state->completed.count(test_set[i].id)) {
        outcome.skipped = true;
      } else {
        outcome = detail::process_example(test_set[i], manifest, train_pool,
                                          client, judge, inventory, opts);
      }
      std::lock_guard<std::mutex> lock(mu);
      if (outcome.skipped)
        ++result.examples_resumed;
      else {
        ++result.examples_processed;
        if (outcome.failure) ++failure_count;
      }
      pending[i] = std::move(outcome);
      drain_ready();
      if (failure_count * 2 > test_set.size()) aborted = true;
    }
  };

  const int width = std::max(1, opts.concurrency);
  std::vector<std::thread> threads;
  threads.reserve(width);
  for (int t = 0; t < width; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  if (aborted) {
    std::string summary = "aborted: " + std::to_string(failure_count) + " of " +
                          std::to_string(test_set.size()) +
                          " examples failed (>50%)";
    for (const RunFailure& f : result.failures)
      summary += "\n  " + f.example_id + " [" + f.stage + "] " + f.reason;
    throw RunAbortError(summary);
  }
  return result;
}

}  // namespace cct
