// cct: counterfactual faithfulness evaluation for explanation-producing
// classifiers.
//
// Subcommands: ingest, intervene, evaluate, score, report, simulate.
// Exit codes: 0 success, 1 usage error, 2 run failure.
//
// Every flag can also be supplied through a flat JSON config file
// (--config FILE, keys named like the flags without the leading dashes);
// command-line flags override config values.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "cct/cct.hpp"

namespace {

using nlohmann::json;

json load_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw CLI::ValidationError("--config", std::string("cannot open ") + argv[i + 1]);
      json j;
      in >> j;
      return j;
    }
  return json::object();
}

template <typename T>
T cfg_or(const json& cfg, const std::string& key, T fallback) {
  return cfg.contains(key) ? cfg.at(key).get<T>() : fallback;
}

cct::Task parse_task(const std::string& s) {
  auto t = cct::task_from_string(s);
  if (!t) throw CLI::ValidationError("--task", "unknown task: " + s);
  return *t;
}

// "http://host:port/some/path" -> {"http://host:port", "/some/path"}
std::pair<std::string, std::string> split_endpoint(const std::string& url,
                                                   const std::string& def_path) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos)
    throw CLI::ValidationError("endpoint", "expected URL, got: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, def_path};
  return {url.substr(0, slash), url.substr(slash)};
}

struct ClientBundle {
  std::unique_ptr<cct::ModelClient> owned;
  std::unique_ptr<cct::ResponseCache> cache;
  std::unique_ptr<cct::CachingClient> cached;
  cct::ModelClient* use = nullptr;
};

ClientBundle make_model_client(const std::string& endpoint,
                               const std::string& model_name,
                               const std::string& adapter_file,
                               const std::filesystem::path& cache_dir,
                               bool no_cache, cct::Task task) {
  ClientBundle b;
  if (endpoint.rfind("glassbox:", 0) == 0) {
    std::ifstream in(endpoint.substr(9));
    if (!in)
      throw CLI::ValidationError("--model-endpoint",
                                 "cannot open glass-box config " + endpoint.substr(9));
    json j;
    in >> j;
    b.owned = std::make_unique<cct::GlassBoxClient>(
        cct::glassbox_config_from_json(j));
  } else if (endpoint == "stub") {
    cct::LabelDistribution d = cct::LabelDistribution::for_task(task);
    d.probs.front() = 0.9;
    b.owned = std::make_unique<cct::StubClassifier>("stub", d, "stub explanation");
  } else {
    auto [base, path] = split_endpoint(endpoint, "/v1/completions");
    cct::HttpAdapterConfig adapter;
    if (!adapter_file.empty()) {
      std::ifstream in(adapter_file);
      if (!in)
        throw CLI::ValidationError("--adapter", "cannot open " + adapter_file);
      json j;
      in >> j;
      adapter = cct::http_adapter_from_json(j);
    }
    b.owned = std::make_unique<cct::HttpCompletionClient>(
        base, model_name.empty() ? "model" : model_name, path, adapter);
  }
  if (!cache_dir.empty()) {
    b.cache = std::make_unique<cct::ResponseCache>(cache_dir);
    b.cached = std::make_unique<cct::CachingClient>(*b.owned, *b.cache, !no_cache);
    b.use = b.cached.get();
  } else {
    b.use = b.owned.get();
  }
  return b;
}

ClientBundle make_judge_client(const std::string& endpoint,
                               const std::filesystem::path& cache_dir,
                               bool no_cache) {
  ClientBundle b;
  if (endpoint == "stub:yes" || endpoint == "stub") {
    b.owned = std::make_unique<cct::StubJudge>(cct::StubJudge::Mode::yes);
  } else if (endpoint == "stub:no") {
    b.owned = std::make_unique<cct::StubJudge>(cct::StubJudge::Mode::no);
  } else if (endpoint.rfind("stub:seeded", 0) == 0) {
    std::uint64_t seed = 0;
    if (endpoint.size() > 12) seed = std::stoull(endpoint.substr(12));
    b.owned = std::make_unique<cct::StubJudge>(cct::StubJudge::Mode::seeded, seed);
  } else {
    auto [base, path] = split_endpoint(endpoint, "/v1/completions");
    b.owned = std::make_unique<cct::HttpCompletionClient>(base, "judge", path);
  }
  if (!cache_dir.empty()) {
    b.cache = std::make_unique<cct::ResponseCache>(cache_dir);
    b.cached = std::make_unique<cct::CachingClient>(*b.owned, *b.cache, !no_cache);
    b.use = b.cached.get();
  } else {
    b.use = b.owned.get();
  }
  return b;
}

std::unique_ptr<cct::PosProvider> make_pos_provider(
    const std::string& pos_noun, const std::string& pos_verb,
    const std::string& tagger_cmd, const std::string& tagger_url) {
  if (!tagger_cmd.empty())
    return std::make_unique<cct::SubprocessTaggerProvider>(tagger_cmd);
  if (!tagger_url.empty())
    return std::make_unique<cct::HttpTaggerProvider>(tagger_url);
  if (!pos_noun.empty() && !pos_verb.empty())
    return std::make_unique<cct::BuiltinLexiconProvider>(
        cct::load_pos_lexicon(pos_noun, pos_verb));
  return nullptr;
}

std::map<std::string, int> gold_from_examples(
    const std::vector<cct::Example>& examples) {
  std::map<std::string, int> gold;
  for (const cct::Example& ex : examples) gold[ex.id] = ex.gold_label;
  return gold;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"counterfactual faithfulness evaluation toolkit"};
  app.require_subcommand(1);

  json cfg;
  try {
    cfg = load_config(argc, argv);
  } catch (const CLI::Error& e) {
    return app.exit(e) ? 1 : 1;
  }
  std::string config_path;
  app.add_option("--config", config_path,
                 "flat JSON config file; flags override its values");

  // shared option values (config provides defaults, flags override)
  std::string dataset = cfg_or(cfg, "dataset", std::string{});
  std::string train = cfg_or(cfg, "train", std::string{});
  std::string task_name = cfg_or(cfg, "task", std::string("esnli"));
  std::string model_endpoint = cfg_or(cfg, "model-endpoint", std::string{});
  std::string model_name = cfg_or(cfg, "model-name", std::string{});
  std::string adapter_file = cfg_or(cfg, "adapter", std::string{});
  std::string judge_endpoint = cfg_or(cfg, "judge-endpoint", std::string("stub:yes"));
  std::string order_name = cfg_or(cfg, "order", std::string("pe"));
  std::uint64_t seed = cfg_or(cfg, "seed", std::uint64_t{42});
  int positions = cfg_or(cfg, "positions", 4);
  int candidates = cfg_or(cfg, "candidates", 20);
  double keep_fraction = cfg_or(cfg, "keep-fraction", 0.2);
  int few_shot = cfg_or(cfg, "few-shot", 20);
  int bins = cfg_or(cfg, "bins", 10);
  int concurrency = cfg_or(cfg, "concurrency", 1);
  std::string cache_dir = cfg_or(cfg, "cache-dir", std::string{});
  std::string out_dir = cfg_or(cfg, "out-dir", std::string{});
  std::string out_file = cfg_or(cfg, "out", std::string{});
  bool renormalize = cfg_or(cfg, "renormalize", false);
  bool no_cache = cfg_or(cfg, "no-cache", false);
  std::string wordnet_adj = cfg_or(cfg, "wordnet-adj", std::string{});
  std::string wordnet_adv = cfg_or(cfg, "wordnet-adv", std::string{});
  std::string pos_noun = cfg_or(cfg, "pos-noun", std::string{});
  std::string pos_verb = cfg_or(cfg, "pos-verb", std::string{});
  std::string tagger_cmd = cfg_or(cfg, "tagger-cmd", std::string{});
  std::string tagger_url = cfg_or(cfg, "tagger-url", std::string{});
  std::string naturalness_template_file =
      cfg_or(cfg, "naturalness-template", std::string{});

  auto* ingest = app.add_subcommand("ingest", "validate a dataset file");
  ingest->add_option("--dataset", dataset, "dataset JSONL file")->required();
  ingest->add_option("--task", task_name, "esnli|ecqa|comve");

  auto* intervene =
      app.add_subcommand("intervene", "generate and filter interventions");
  intervene->add_option("--dataset", dataset)->required();
  intervene->add_option("--task", task_name);
  intervene->add_option("--wordnet-adj", wordnet_adj, "WordNet index.adj");
  intervene->add_option("--wordnet-adv", wordnet_adv, "WordNet index.adv");
  intervene->add_option("--pos-noun", pos_noun, "WordNet index.noun (builtin tagger)");
  intervene->add_option("--pos-verb", pos_verb, "WordNet index.verb (builtin tagger)");
  intervene->add_option("--tagger-cmd", tagger_cmd, "external tagger command");
  intervene->add_option("--tagger-url", tagger_url, "external tagger URL");
  intervene->add_option("--judge-endpoint", judge_endpoint,
                        "URL or stub:yes|stub:no|stub:seeded:<seed>");
  bool no_filter = false;
  intervene->add_flag("--no-filter", no_filter,
                      "emit unscored candidates without filtering");
  intervene->add_option("--seed", seed);
  intervene->add_option("--positions", positions);
  intervene->add_option("--candidates", candidates);
  intervene->add_option("--keep-fraction", keep_fraction);
  intervene->add_option("--cache-dir", cache_dir);
  intervene->add_flag("--no-cache", no_cache);
  intervene->add_option("--out", out_file, "output interventions JSONL")->required();

  auto* evaluate = app.add_subcommand("evaluate", "run the full pipeline");
  evaluate->add_option("--dataset", dataset, "test set JSONL")->required();
  evaluate->add_option("--train", train, "train pool JSONL")->required();
  evaluate->add_option("--task", task_name);
  evaluate->add_option("--model-endpoint", model_endpoint,
                       "URL, glassbox:<config.json>, or stub")->required();
  evaluate->add_option("--model-name", model_name);
  evaluate->add_option("--adapter", adapter_file, "endpoint adapter JSON");
  evaluate->add_option("--judge-endpoint", judge_endpoint);
  evaluate->add_option("--order", order_name, "pe|ep");
  evaluate->add_option("--seed", seed);
  evaluate->add_option("--positions", positions);
  evaluate->add_option("--candidates", candidates);
  evaluate->add_option("--keep-fraction", keep_fraction);
  evaluate->add_option("--few-shot", few_shot);
  evaluate->add_option("--concurrency", concurrency);
  evaluate->add_option("--cache-dir", cache_dir, "defaults to <out-dir>/cache");
  evaluate->add_flag("--no-cache", no_cache);
  evaluate->add_flag("--renormalize", renormalize);
  evaluate->add_option("--wordnet-adj", wordnet_adj);
  evaluate->add_option("--wordnet-adv", wordnet_adv);
  evaluate->add_option("--pos-noun", pos_noun);
  evaluate->add_option("--pos-verb", pos_verb);
  evaluate->add_option("--tagger-cmd", tagger_cmd);
  evaluate->add_option("--tagger-url", tagger_url);
  evaluate->add_option("--naturalness-template", naturalness_template_file,
                       "file overriding the judge prompt template");
  bool resume_run = false;
  evaluate->add_flag("--resume", resume_run, "continue an interrupted run");
  std::string run_id = cfg_or(cfg, "run-id", std::string{});
  evaluate->add_option("--run-id", run_id);
  evaluate->add_option("--out-dir", out_dir, "run directory")->required();

  auto* score = app.add_subcommand("score", "compute metrics from records");
  score->add_option("--records", dataset, "records JSONL")->required();
  std::string gold_file = cfg_or(cfg, "gold", std::string{});
  score->add_option("--gold", gold_file, "JSON map example_id -> gold label");
  std::string interventions_file = cfg_or(cfg, "interventions", std::string{});
  score->add_option("--interventions", interventions_file,
                    "interventions JSONL (for generated counts)");
  score->add_option("--bins", bins);
  score->add_option("--out", out_file, "report JSON output")->required();

  auto* report = app.add_subcommand("report", "emit table and curve files");
  report->add_option("--run-dir", out_dir, "run directory")->required();
  std::string report_out = cfg_or(cfg, "report-out", std::string{});
  report->add_option("--report-out", report_out,
                     "output directory (default <run-dir>/report)");
  report->add_option("--bins", bins);

  auto* simulate = app.add_subcommand("simulate", "glass-box policy sweeps");
  std::string policy_name = cfg_or(cfg, "policy", std::string("verbatim"));
  simulate->add_option("--policy", policy_name, "verbatim|never|oracle|random");
  double threshold = cfg_or(cfg, "threshold", 0.5);
  simulate->add_option("--threshold", threshold, "oracle policy threshold");
  double mention_p = cfg_or(cfg, "p", 0.5);
  simulate->add_option("--p", mention_p, "random policy mention probability");
  int n_examples = cfg_or(cfg, "n-examples", 125);
  simulate->add_option("--n-examples", n_examples);
  simulate->add_option("--positions", positions);
  simulate->add_option("--candidates", candidates);
  simulate->add_option("--keep-fraction", keep_fraction);
  simulate->add_option("--seed", seed);
  simulate->add_option("--concurrency", concurrency);
  simulate->add_option("--out-dir", out_dir, "optional run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const cct::Task task = parse_task(task_name);

    if (*ingest) {
      const auto examples = cct::ingest_dataset(dataset, task);
      std::map<int, std::size_t> by_label;
      for (const auto& ex : examples) ++by_label[ex.gold_label];
      std::cout << "ok: " << examples.size() << " examples ("
                << cct::to_string(task) << ")\n";
      for (const auto& [label, n] : by_label)
        std::cout << "  " << cct::verbalizer(task, label) << ": " << n << '\n';
      return 0;
    }

    if (*intervene) {
      const auto examples = cct::ingest_dataset(dataset, task);
      cct::WordInventory inventory = cct::load_wordnet(wordnet_adj, wordnet_adv);
      auto provider = make_pos_provider(pos_noun, pos_verb, tagger_cmd, tagger_url);
      ClientBundle judge = make_judge_client(judge_endpoint, cache_dir, no_cache);

      cct::InterventionConfig icfg;
      icfg.positions = positions;
      icfg.candidates_per_position = candidates;
      if (provider) icfg.pos_provider = provider->name();
      icfg.source_version = inventory.source_version;

      std::vector<cct::Intervention> all;
      for (const cct::Example& raw : examples) {
        cct::Example ex = raw;
        if (!ex.tokens.has_value()) {
          if (!provider)
            throw std::runtime_error(
                "dataset lacks tokens; provide --pos-noun/--pos-verb, "
                "--tagger-cmd, or --tagger-url");
          ex = cct::annotate_pos(std::move(ex), *provider);
        }
        cct::Rng rng(cct::derive_seed(seed, "intervene", ex.id));
        auto candidates_list = cct::generate_interventions(ex, inventory, rng, icfg);
        if (!no_filter) {
          for (cct::Intervention& iv : candidates_list) {
            const auto ns = cct::score_naturalness(iv, ex.field(iv.segment),
                                                   *judge.use);
            iv.naturalness_score = ns.score;
          }
          cct::filter_top_fraction(candidates_list, keep_fraction);
        }
        for (cct::Intervention& iv : candidates_list) all.push_back(std::move(iv));
      }
      cct::write_interventions(all, out_file);
      std::size_t kept = 0;
      for (const auto& iv : all) kept += iv.kept;
      std::cout << "ok: " << all.size() << " candidates, " << kept
                << " kept -> " << out_file << '\n';
      return 0;
    }

    if (*evaluate) {
      const auto test_set = cct::ingest_dataset(dataset, task);
      const auto train_pool = cct::ingest_dataset(train, task);
      auto order = cct::prompt_order_from_string(order_name);
      if (!order) throw CLI::ValidationError("--order", "must be pe or ep");

      cct::WordInventory inventory;
      if (!wordnet_adj.empty() && !wordnet_adv.empty())
        inventory = cct::load_wordnet(wordnet_adj, wordnet_adv);
      else if (model_endpoint.rfind("glassbox:", 0) == 0) {
        // hermetic runs may draw candidates straight from the impact lexicon
        std::ifstream in(model_endpoint.substr(9));
        json j;
        in >> j;
        const auto gb = cct::glassbox_config_from_json(j);
        for (const auto& [w, d] : gb.impact_lexicon) {
          inventory.adjectives.push_back(w);
          inventory.adverbs.push_back(w);
        }
        inventory.source_version = "glassbox-lexicon";
      } else {
        throw std::runtime_error("--wordnet-adj/--wordnet-adv are required");
      }

      auto provider = make_pos_provider(pos_noun, pos_verb, tagger_cmd, tagger_url);

      const std::filesystem::path run_dir = out_dir;
      const std::filesystem::path effective_cache =
          cache_dir.empty() ? cct::rundir::cache_path(run_dir)
                            : std::filesystem::path(cache_dir);
      ClientBundle model = make_model_client(model_endpoint, model_name,
                                             adapter_file, effective_cache,
                                             no_cache, task);
      ClientBundle judge =
          make_judge_client(judge_endpoint, effective_cache, no_cache);

      cct::RunManifest manifest;
      manifest.run_id = run_id.empty() ? "run-" + std::to_string(seed) : run_id;
      manifest.model_id = model.owned->model_id();
      manifest.prompt_order = *order;
      manifest.dataset = task;
      manifest.rng_seed = seed;
      manifest.few_shot_count = few_shot;
      manifest.intervention_config.positions = positions;
      manifest.intervention_config.candidates_per_position = candidates;
      manifest.intervention_config.source_version = inventory.source_version;
      if (provider) manifest.intervention_config.pos_provider = provider->name();
      manifest.filter_keep_fraction = keep_fraction;
      manifest.created_at = cct::iso8601_utc_now();

      cct::RunOptions opts;
      opts.run_dir = run_dir;
      opts.concurrency = concurrency;
      opts.use_cache = !no_cache;
      opts.renormalize = renormalize;
      opts.pos_provider = provider.get();
      if (!naturalness_template_file.empty()) {
        std::ifstream in(naturalness_template_file);
        if (!in) throw std::runtime_error("cannot open naturalness template");
        std::stringstream ss;
        ss << in.rdbuf();
        opts.naturalness_template = ss.str();
      }

      std::optional<cct::RunState> state;
      if (resume_run) {
        state = cct::resume(run_dir);
        // reuse the original manifest so the hash check stays meaningful
        manifest = cct::read_manifest(cct::rundir::manifest_path(run_dir));
      }

      const cct::RunResult result =
          cct::run_evaluation(manifest, test_set, train_pool, *model.use,
                              *judge.use, inventory, opts,
                              state ? &*state : nullptr);
      std::cout << "ok: " << result.examples_processed << " examples processed";
      if (result.examples_resumed)
        std::cout << " (" << result.examples_resumed << " resumed)";
      std::cout << ", " << result.records.size() << " records appended, "
                << result.failures.size() << " failures -> " << run_dir.string()
                << '\n';
      return 0;
    }

    if (*score) {
      const auto records = cct::read_records(dataset);
      std::optional<std::map<std::string, int>> gold;
      if (!gold_file.empty()) {
        std::ifstream in(gold_file);
        if (!in) throw std::runtime_error("cannot open gold file " + gold_file);
        json j;
        in >> j;
        gold.emplace();
        for (const auto& [k, v] : j.items()) (*gold)[k] = v.get<int>();
      }
      std::optional<std::size_t> generated;
      if (!interventions_file.empty())
        generated = cct::read_interventions(interventions_file).size();
      cct::ReportOptions ropts;
      ropts.bins = bins;
      const auto rep = cct::compute_report(records, gold ? &*gold : nullptr,
                                           generated, 0, ropts);
      std::ofstream out(out_file, std::ios::trunc);
      out << cct::report_to_json(rep).dump(2) << '\n';
      std::cout << cct::render_text_table(rep);
      return 0;
    }

    if (*report) {
      cct::ReportOptions ropts;
      ropts.bins = bins;
      const auto rep = cct::report_from_run_dir(out_dir, ropts);
      const std::filesystem::path dest =
          report_out.empty() ? std::filesystem::path(out_dir) / "report"
                             : std::filesystem::path(report_out);
      cct::write_report_files(rep, dest);
      std::cout << cct::render_text_table(rep);
      std::cout << "report files -> " << dest.string() << '\n';
      return 0;
    }

    if (*simulate) {
      cct::SimulationSpec spec;
      auto kind = cct::policy_kind_from_string(policy_name);
      if (!kind) throw CLI::ValidationError("--policy", "unknown policy");
      spec.policy.kind = *kind;
      spec.policy.threshold = threshold;
      spec.policy.p = mention_p;
      spec.policy.seed = seed;
      spec.seed = seed;
      spec.n_examples = n_examples;
      spec.positions = positions;
      spec.candidates_per_position = candidates;
      spec.keep_fraction = keep_fraction;
      spec.concurrency = concurrency;
      if (!out_dir.empty()) spec.run_dir = out_dir;
      const auto sim = cct::run_simulation(spec);
      std::cout << cct::render_text_table(sim.report);
      if (!out_dir.empty()) {
        cct::write_report_files(sim.report,
                                std::filesystem::path(out_dir) / "report");
        std::cout << "report files -> " << (std::filesystem::path(out_dir) / "report").string()
                  << '\n';
      }
      return 0;
    }
  } catch (const CLI::Error& e) {
    app.exit(e);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
