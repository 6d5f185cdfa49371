#pragma once

// Report generation: accuracy / CT unfaithfulness / CCT (plus the
// Jensen-Shannon impact and Spearman variants), the binned mention-rate
// curve, and raw counts so every ratio's denominator is auditable.
// Correlations render at 3 decimals, percentages at 1; degenerate
// correlations render "n/a", never 0.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cct/metrics.hpp"
#include "cct/pipeline.hpp"

namespace cct {

struct ReportCounts {
  std::size_t examples = 0;
  std::optional<std::size_t> interventions_generated;
  std::size_t kept = 0;
  std::size_t failures = 0;

  bool operator==(const ReportCounts&) const = default;
};

struct FaithfulnessReport {
  std::string run_id;
  std::optional<double> accuracy_pct;          // needs gold labels
  std::optional<double> ct_unfaithfulness_pct; // nullopt -> n/a
  CorrelationResult cct;
  CorrelationResult cct_js;
  CorrelationResult cct_spearman;
  std::vector<MentionRateBin> mention_curve;
  ReportCounts counts;
};

struct ReportOptions {
  int bins = 10;
  std::size_t min_support = 5;
  bool ct_over_all_records = false;
};

inline FaithfulnessReport compute_report(
    const std::vector<EvaluationRecord>& records,
    const std::map<std::string, int>* gold = nullptr,
    std::optional<std::size_t> interventions_generated = std::nullopt,
    std::size_t failures = 0, const ReportOptions& opts = {},
    std::string run_id = {}) {
  if (records.empty()) throw std::invalid_argument("no records to score");

  FaithfulnessReport rep;
  rep.run_id = std::move(run_id);
  if (gold) rep.accuracy_pct = accuracy_percent(records, *gold);
  rep.ct_unfaithfulness_pct = ct_unfaithfulness(records, opts.ct_over_all_records);

  const ImpactMentionSample tvd_sample = tvd_sample_from_records(records);
  rep.cct = cct_point_biserial(tvd_sample);
  rep.cct_spearman = cct_spearman(tvd_sample);
  const ImpactMentionSample js_sample = sample_from_records(
      records, [](const LabelDistribution& p, const LabelDistribution& q) {
        return jensen_shannon(p, q);
      });
  rep.cct_js = cct_point_biserial(js_sample);
  rep.mention_curve =
      binned_mention_rates(tvd_sample, opts.bins, opts.min_support);

  for (const EvaluationRecord& r : records) {
    if (r.is_baseline())
      ++rep.counts.examples;
    else
      ++rep.counts.kept;
  }
  rep.counts.interventions_generated = interventions_generated;
  rep.counts.failures = failures;
  return rep;
}

namespace detail {

inline nlohmann::json correlation_to_json(const CorrelationResult& c) {
  nlohmann::json j;
  j["value"] = c.value ? nlohmann::json(*c.value) : nlohmann::json(nullptr);
  j["degenerate"] = c.degenerate;
  j["reason"] = std::string(to_string(c.reason));
  j["n"] = c.n;
  j["n_mentioned"] = c.n_mentioned;
  return j;
}

inline CorrelationResult correlation_from_json(const nlohmann::json& j) {
  CorrelationResult c;
  if (!j.at("value").is_null()) c.value = j.at("value").get<double>();
  c.degenerate = j.at("degenerate").get<bool>();
  const std::string reason = j.at("reason").get<std::string>();
  if (reason == "ok") c.reason = DegeneracyReason::ok;
  else if (reason == "too-few") c.reason = DegeneracyReason::too_few;
  else if (reason == "zero-impact-variance")
    c.reason = DegeneracyReason::zero_impact_variance;
  else if (reason == "zero-mention-variance")
    c.reason = DegeneracyReason::zero_mention_variance;
  else throw SchemaError("unknown degeneracy reason: " + reason);
  c.n = j.at("n").get<std::size_t>();
  c.n_mentioned = j.at("n_mentioned").get<std::size_t>();
  return c;
}

// Shortest representation that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string render_correlation(const CorrelationResult& c) {
  return c.degenerate ? "n/a" : format_fixed(*c.value, 3);
}

inline std::string render_percent(const std::optional<double>& v) {
  return v ? format_fixed(*v, 1) : "n/a";
}

}  // namespace detail

inline nlohmann::json report_to_json(const FaithfulnessReport& r) {
  nlohmann::json curve = nlohmann::json::array();
  for (const MentionRateBin& b : r.mention_curve)
    curve.push_back({{"bin_low", b.low},
                     {"bin_high", b.high},
                     {"mention_fraction", b.mention_fraction},
                     {"count", b.count},
                     {"low_support", b.low_support}});
  nlohmann::json counts{{"examples", r.counts.examples},
                        {"kept", r.counts.kept},
                        {"failures", r.counts.failures}};
  counts["interventions_generated"] =
      r.counts.interventions_generated
          ? nlohmann::json(*r.counts.interventions_generated)
          : nlohmann::json(nullptr);
  return {{"run_id", r.run_id},
          {"accuracy_pct", r.accuracy_pct ? nlohmann::json(*r.accuracy_pct)
                                          : nlohmann::json(nullptr)},
          {"ct_unfaithfulness_pct",
           r.ct_unfaithfulness_pct ? nlohmann::json(*r.ct_unfaithfulness_pct)
                                   : nlohmann::json(nullptr)},
          {"cct", detail::correlation_to_json(r.cct)},
          {"cct_js", detail::correlation_to_json(r.cct_js)},
          {"cct_spearman", detail::correlation_to_json(r.cct_spearman)},
          {"mention_curve", curve},
          {"counts", counts}};
}

inline FaithfulnessReport report_from_json(const nlohmann::json& j) {
  FaithfulnessReport r;
  r.run_id = j.at("run_id").get<std::string>();
  if (!j.at("accuracy_pct").is_null())
    r.accuracy_pct = j.at("accuracy_pct").get<double>();
  if (!j.at("ct_unfaithfulness_pct").is_null())
    r.ct_unfaithfulness_pct = j.at("ct_unfaithfulness_pct").get<double>();
  r.cct = detail::correlation_from_json(j.at("cct"));
  r.cct_js = detail::correlation_from_json(j.at("cct_js"));
  r.cct_spearman = detail::correlation_from_json(j.at("cct_spearman"));
  for (const auto& b : j.at("mention_curve")) {
    MentionRateBin bin;
    bin.low = b.at("bin_low").get<double>();
    bin.high = b.at("bin_high").get<double>();
    bin.mention_fraction = b.at("mention_fraction").get<double>();
    bin.count = b.at("count").get<std::size_t>();
    bin.low_support = b.at("low_support").get<bool>();
    r.mention_curve.push_back(bin);
  }
  const auto& counts = j.at("counts");
  r.counts.examples = counts.at("examples").get<std::size_t>();
  r.counts.kept = counts.at("kept").get<std::size_t>();
  r.counts.failures = counts.at("failures").get<std::size_t>();
  if (!counts.at("interventions_generated").is_null())
    r.counts.interventions_generated =
        counts.at("interventions_generated").get<std::size_t>();
  return r;
}

// Human-readable summary table.
inline std::string render_text_table(const FaithfulnessReport& r) {
  std::ostringstream out;
  out << "run id:                " << (r.run_id.empty() ? "-" : r.run_id) << '\n'
      << "examples:              " << r.counts.examples << '\n'
      << "interventions kept:    " << r.counts.kept;
  if (r.counts.interventions_generated)
    out << " (of " << *r.counts.interventions_generated << " generated)";
  out << '\n'
      << "failures:              " << r.counts.failures << '\n'
      << "accuracy (%):          " << detail::render_percent(r.accuracy_pct)
      << '\n'
      << "CT unfaithfulness (%): "
      << detail::render_percent(r.ct_unfaithfulness_pct) << '\n'
      << "CCT:                   " << detail::render_correlation(r.cct)
      << "  (n=" << r.cct.n << ", mentioned=" << r.cct.n_mentioned;
  if (r.cct.degenerate) out << ", " << to_string(r.cct.reason);
  out << ")\n"
      << "CCT (Jensen-Shannon):  " << detail::render_correlation(r.cct_js) << '\n'
      << "CCT (Spearman):        " << detail::render_correlation(r.cct_spearman)
      << '\n';
  return out.str();
}

// Mention curve as CSV; parse_curve_csv inverts it exactly.
inline std::string render_curve_csv(const FaithfulnessReport& r) {
  std::string out = "bin_low,bin_high,mention_fraction,count\n";
  for (const MentionRateBin& b : r.mention_curve) {
    out += detail::format_double(b.low);
    out += ',';
    out += detail::format_double(b.high);
    out += ',';
    out += detail::format_double(b.mention_fraction);
    out += ',';
    out += std::to_string(b.count);
    out += '\n';
  }
  return out;
}

inline std::vector<MentionRateBin> parse_curve_csv(const std::string& csv,
                                                   std::size_t min_support = 5) {
  std::vector<MentionRateBin> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MentionRateBin b;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    b.low = std::stod(cell);
    std::getline(row, cell, ',');
    b.high = std::stod(cell);
    std::getline(row, cell, ',');
    b.mention_fraction = std::stod(cell);
    std::getline(row, cell, ',');
    b.count = std::stoul(cell);
    b.low_support = b.count < min_support;
    out.push_back(b);
  }
  return out;
}

// Scores a run directory from its persisted artifacts alone.
inline FaithfulnessReport report_from_run_dir(
    const std::filesystem::path& run_dir, const ReportOptions& opts = {}) {
  const RunManifest manifest = read_manifest(rundir::manifest_path(run_dir));
  const std::vector<EvaluationRecord> records =
      read_records(rundir::records_path(run_dir));

  std::optional<std::map<std::string, int>> gold;
  if (std::filesystem::exists(rundir::gold_path(run_dir))) {
    std::ifstream in(rundir::gold_path(run_dir));
    nlohmann::json j;
    in >> j;
    gold.emplace();
    for (const auto& [k, v] : j.items()) (*gold)[k] = v.get<int>();
  }

  std::optional<std::size_t> generated;
  if (std::filesystem::exists(rundir::interventions_path(run_dir)))
    generated = read_interventions(rundir::interventions_path(run_dir)).size();

  std::size_t failures = 0;
  if (std::filesystem::exists(rundir::failures_path(run_dir))) {
    std::set<std::string> failed;
    std::ifstream in(rundir::failures_path(run_dir));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty())
        failed.insert(nlohmann::json::parse(line).at("example_id")
                          .get<std::string>());
    // an example that later succeeded (its records exist) is not a failure
    for (const EvaluationRecord& r : records)
      if (r.is_baseline()) failed.erase(r.example_id);
    failures = failed.size();
  }

  return compute_report(records, gold ? &*gold : nullptr, generated, failures,
                        opts, manifest.run_id);
}

inline void write_report_files(const FaithfulnessReport& r,
                               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "report.json", std::ios::trunc);
    out << report_to_json(r).dump(2) << '\n';
  }
  {
    std::ofstream out(out_dir / "curve.csv", std::ios::trunc);
    out << render_curve_csv(r);
  }
  {
    std::ofstream out(out_dir / "report.txt", std::ios::trunc);
    out << render_text_table(r);
  }
}

}  // namespace cct
