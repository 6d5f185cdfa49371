#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cct/report.hpp"
#include "cct/simulate.hpp"

using namespace cct;
namespace fs = std::filesystem;
using nlohmann::json;

static const fs::path kFixtures = CCT_TEST_FIXTURES;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() /
                     ("cct-report-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json slurp_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  json j;
  in >> j;
  return j;
}

FaithfulnessReport golden_report() {
  const auto records = read_records(kFixtures / "records_golden.jsonl");
  std::map<std::string, int> gold{{"g1", 0}};
  return compute_report(records, &gold);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CCT_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("golden fixture report values") {
  const FaithfulnessReport rep = golden_report();
  REQUIRE(rep.accuracy_pct.has_value());
  CHECK(*rep.accuracy_pct == 100.0);
  REQUIRE(rep.ct_unfaithfulness_pct.has_value());
  CHECK(*rep.ct_unfaithfulness_pct == 0.0);
  REQUIRE_FALSE(rep.cct.degenerate);
  CHECK_THAT(*rep.cct.value,
             Catch::Matchers::WithinAbs(0.9899494936611666, 1e-12));
  CHECK_THAT(*rep.cct_spearman.value,
             Catch::Matchers::WithinAbs(0.8944271909999159, 1e-12));
  // scipy pearsonr over jensen-shannon impacts of the same distributions
  CHECK_THAT(*rep.cct_js.value,
             Catch::Matchers::WithinAbs(0.978898129497709, 1e-9));
  CHECK(rep.counts.examples == 1);
  CHECK(rep.counts.kept == 4);

  // rendering: 3 decimals for correlations, 1 for percentages
  const std::string table = render_text_table(rep);
  CHECK(table.find("0.990") != std::string::npos);
  CHECK(table.find("0.894") != std::string::npos);
  CHECK(table.find("100.0") != std::string::npos);
}

TEST_CASE("report JSON round-trips and re-scoring is idempotent") {
  const FaithfulnessReport a = golden_report();
  const FaithfulnessReport b = golden_report();
  CHECK(report_to_json(a) == report_to_json(b));
  const FaithfulnessReport back = report_from_json(report_to_json(a));
  CHECK(report_to_json(back) == report_to_json(a));
}

TEST_CASE("degenerate correlations render n/a, never 0") {
  std::vector<EvaluationRecord> records;
  EvaluationRecord baseline;
  baseline.example_id = "e";
  baseline.pre_distribution = LabelDistribution::for_task(Task::comve);
  baseline.pre_distribution.probs = {0.9, 0.1};
  records.push_back(baseline);
  for (int i = 0; i < 3; ++i) {
    EvaluationRecord r = baseline;
    Intervention iv;
    iv.example_id = "e";
    iv.inserted_word = "w";
    r.intervention = iv;
    r.post_distribution = baseline.pre_distribution;
    r.post_distribution->probs = {0.9 - 0.1 * i, 0.1 + 0.1 * i};
    r.impact = 0.1 * i;
    r.mentioned = true;  // constant mentions -> degenerate
    r.post_label = 0;
    records.push_back(r);
  }
  const FaithfulnessReport rep = compute_report(records);
  CHECK(rep.cct.degenerate);
  CHECK(rep.cct.reason == DegeneracyReason::zero_mention_variance);
  const std::string table = render_text_table(rep);
  CHECK(table.find("CCT:                   n/a") != std::string::npos);
  CHECK(table.find("zero-mention-variance") != std::string::npos);
  // no label changes -> CT renders n/a too
  CHECK_FALSE(rep.ct_unfaithfulness_pct.has_value());
  CHECK(table.find("CT unfaithfulness (%): n/a") != std::string::npos);

  CHECK_THROWS(compute_report({}));
}

TEST_CASE("curve CSV round-trips into the binned rates exactly") {
  SimulationSpec spec;
  spec.policy.kind = GlassBoxPolicy::Kind::random;
  spec.policy.p = 0.5;
  spec.n_examples = 30;
  spec.candidates_per_position = 5;
  const SimulationResult sim = run_simulation(spec);

  const std::string csv = render_curve_csv(sim.report);
  const auto parsed = parse_curve_csv(csv);
  REQUIRE(parsed.size() == sim.report.mention_curve.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].low == sim.report.mention_curve[i].low);
    CHECK(parsed[i].high == sim.report.mention_curve[i].high);
    CHECK(parsed[i].mention_fraction ==
          sim.report.mention_curve[i].mention_fraction);
    CHECK(parsed[i].count == sim.report.mention_curve[i].count);
  }
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header == "bin_low,bin_high,mention_fraction,count");
}

TEST_CASE("cli: score matches the frozen golden report") {
  const fs::path dir = temp_dir("cli-score");
  const fs::path out = dir / "report.json";
  const int code =
      run_cli("score --records " + (kFixtures / "records_golden.jsonl").string() +
              " --gold " + (kFixtures / "gold_golden.json").string() + " --out " +
              out.string() + " > /dev/null");
  REQUIRE(code == 0);
  CHECK(slurp_json(out) == slurp_json(kFixtures / "report_golden.json"));
  fs::remove_all(dir);
}

TEST_CASE("cli: no arguments prints usage and exits 1") {
  CHECK(run_cli("> /dev/null 2>&1") == 1);
  CHECK(run_cli("frobnicate > /dev/null 2>&1") == 1);
  // missing required flag is a usage error
  CHECK(run_cli("score > /dev/null 2>&1") == 1);
}

TEST_CASE("cli: runtime failures exit 2") {
  CHECK(run_cli("ingest --dataset /nonexistent.jsonl --task comve "
                "> /dev/null 2>&1") == 2);
}

TEST_CASE("cli: ingest validates and reports counts") {
  const int code =
      run_cli("ingest --dataset " +
              (kFixtures / "datasets/comve_mini.jsonl").string() +
              " --task comve > /dev/null");
  CHECK(code == 0);
}

TEST_CASE("cli: simulate verbatim reports 0% CT and n/a CCT") {
  const fs::path dir = temp_dir("cli-sim");
  const int code = run_cli(
      "simulate --policy verbatim --n-examples 20 --candidates 5 --seed 7 "
      "--out-dir " + dir.string() + " > /dev/null");
  REQUIRE(code == 0);
  const json rep = slurp_json(dir / "report" / "report.json");
  CHECK(rep.at("ct_unfaithfulness_pct").get<double>() == 0.0);
  CHECK(rep.at("cct").at("value").is_null());
  CHECK(rep.at("cct").at("degenerate").get<bool>() == true);
  CHECK(rep.at("cct").at("reason").get<std::string>() == "zero-mention-variance");
  fs::remove_all(dir);
}

TEST_CASE("cli: config file supplies defaults, flags override") {
  const fs::path dir = temp_dir("cli-config");
  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"policy":"never","n-examples":10,"candidates":5,"out-dir":")"
        << (dir / "from-config").string() << R"("})";
  }
  REQUIRE(run_cli("simulate --config " + (dir / "config.json").string() +
                  " > /dev/null") == 0);
  // config's out-dir was honored
  CHECK(fs::exists(dir / "from-config" / "records.jsonl"));

  // flag overrides the config's policy: verbatim mentions everything,
  // so CT unfaithfulness flips from 100 to 0
  REQUIRE(run_cli("simulate --config " + (dir / "config.json").string() +
                  " --policy verbatim --out-dir " + (dir / "flag").string() +
                  " > /dev/null") == 0);
  const json never_rep =
      slurp_json(dir / "from-config" / "report" / "report.json");
  const json verbatim_rep = slurp_json(dir / "flag" / "report" / "report.json");
  CHECK(never_rep.at("ct_unfaithfulness_pct").get<double>() == 100.0);
  CHECK(verbatim_rep.at("ct_unfaithfulness_pct").get<double>() == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("cli: evaluate + report over a glass-box run dir") {
  const fs::path dir = temp_dir("cli-eval");
  // build a tiny pre-annotated comve dataset + glass-box config on disk
  SimulationSpec spec;
  spec.policy.kind = GlassBoxPolicy::Kind::oracle;
  spec.policy.threshold = 0.3;
  spec.n_examples = 8;
  spec.candidates_per_position = 5;
  const SimulationResult sim = make_simulation(spec);
  write_dataset(sim.test_set, dir / "test.jsonl");
  write_dataset(sim.train_pool, dir / "train.jsonl");
  {
    std::ofstream out(dir / "glassbox.json");
    out << glassbox_config_to_json(sim.config).dump(2);
  }

  const fs::path run_dir = dir / "run";
  REQUIRE(run_cli("evaluate --dataset " + (dir / "test.jsonl").string() +
                  " --train " + (dir / "train.jsonl").string() +
                  " --task comve --model-endpoint glassbox:" +
                  (dir / "glassbox.json").string() +
                  " --judge-endpoint stub:seeded:5 --order pe --seed 777 "
                  "--candidates 5 --out-dir " + run_dir.string() +
                  " > /dev/null") == 0);
  CHECK(fs::exists(run_dir / "manifest.json"));
  CHECK(fs::exists(run_dir / "records.jsonl"));
  CHECK(fs::exists(run_dir / "cache"));

  REQUIRE(run_cli("report --run-dir " + run_dir.string() + " > /dev/null") == 0);
  const json rep = slurp_json(run_dir / "report" / "report.json");
  CHECK(rep.at("counts").at("examples").get<int>() == 8);
  CHECK(fs::exists(run_dir / "report" / "curve.csv"));
  CHECK(fs::exists(run_dir / "report" / "report.txt"));
  fs::remove_all(dir);
}
