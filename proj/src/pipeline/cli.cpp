#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "impact/common/error.hpp"
#include "impact/pipeline/run.hpp"

namespace impact::pipeline {

namespace {

void report(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  err << nlohmann::json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << std::endl;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Citation intent, impact summaries and their evaluation.", "impact"};
  app.set_version_flag("--version", std::string(IMPACT_VERSION));
  app.require_subcommand(1);

  std::string config_path, run_id, mock_script, replay_log, runs_dir;
  bool live = false, quiet = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  app.add_option("--config", config_path, "TOML-style run configuration");
  app.add_option("--run-id", run_id, "name of the run directory");
  app.add_option("--runs-dir", runs_dir, "parent of run directories (default runs)");
  auto* mock = app.add_option("--mock", mock_script, "use the scripted mock provider");
  auto* live_flag = app.add_flag("--live", live, "use the live provider (needs LLM_API_KEY)");
  auto* replay = app.add_option("--replay", replay_log, "answer from a previous run's llm_calls.jsonl");
  mock->excludes(live_flag)->excludes(replay);
  live_flag->excludes(replay);
  app.add_option("--seed", seed, "run seed; every step's seed derives from it");
  app.add_option("--workers", workers, "parallel workers inside a command");
  app.add_flag("-q,--quiet", quiet, "only warnings and errors on the log");

  std::vector<std::string> papers, variants, owners;
  std::optional<std::size_t> n_impact, n_other, limit;
  std::optional<std::uint64_t> ordering_seed;
  std::optional<int> coverage_k;
  std::vector<int> k_values;
  std::string crawled, pst_other, dataset_path, author_id, author_variant;

  using Command = std::function<void(RunContext&, std::ostream&)>;
  std::map<CLI::App*, Command> handlers;
  auto add = [&](const char* name, const char* help, Command fn) {
    auto* sub = app.add_subcommand(name, help);
    handlers[sub] = std::move(fn);
    return sub;
  };

  auto* fetch = add("fetch", "fetch papers and citation contexts into the run corpus", commands::fetch);
  fetch->add_option("--papers", papers, "paper ids (overrides corpus.papers)");
  fetch->add_option("--limit", limit, "maximum citing papers per paper");
  add("classify", "classify every corpus context with the few-shot prompt and majority vote", commands::classify);
  auto* build = add("build-dataset", "build the balanced pattern-labeled dataset", commands::build_dataset);
  build->add_option("--n-impact", n_impact);
  build->add_option("--n-other", n_other);
  build->add_option("--crawled", crawled, "one context per line (default: the run corpus)");
  build->add_option("--pst-other", pst_other, "pool of non-impact contexts, one per line");
  auto* summarize = add("summarize", "generate impact summaries over the variant grid", commands::summarize);
  summarize->add_option("--variant", variants, "restrict to these variant names");
  summarize->add_option("--ordering-seed", ordering_seed, "seed for the shuffled orderings");
  auto* evaluate = add("evaluate", "judge every summary", commands::evaluate);
  evaluate->add_option("--k", coverage_k, "clusters counted by coverage@k");
  auto* ablate = add("ablate", "aggregate evaluation reports into the ablation table", commands::ablate);
  ablate->add_option("--k", coverage_k, "clusters counted by coverage@k");
  auto* ks = add("ksweep", "sweep the number of in-context examples", commands::ksweep);
  ks->add_option("--k-values", k_values);
  ks->add_option("--dataset", dataset_path, "annotated examples (default: the example pool)");
  auto* author = add("author-summary", "aggregate an author's top-cited paper summaries", commands::author_summary);
  author->add_option("--author", author_id);
  author->add_option("--variant", author_variant);
  auto* bench = add("bench-classifier", "score the classifier on a labeled dataset", commands::bench_classifier);
  bench->add_option("--dataset", dataset_path, "labeled dataset (default: the run's dataset.jsonl)");
  add("fields", "field distributions and top intents per paper", commands::fields);
  auto* create = add("create-study", "create the human study from the run's summaries", commands::create_study);
  create->add_option("--owner", owners, "paper_id=owner, repeatable (overrides study.owners)");
  add("serve-study", "serve the study API (STUDY_BIND_ADDR, default 127.0.0.1:8080)", commands::serve_study);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report(err, "ConfigError", e.what(), 2);
    return 2;
  }
  if (quiet) spdlog::set_level(spdlog::level::warn);

  CLI::App* chosen = app.get_subcommands().front();
  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    apply_env(cfg);
    if (!run_id.empty()) cfg.run_id = run_id;
    if (!runs_dir.empty()) cfg.runs_dir = runs_dir;
    if (!mock_script.empty()) {
      cfg.mode = ProviderMode::mock;
      cfg.mock_script = mock_script;
    }
    if (!replay_log.empty()) {
      cfg.mode = ProviderMode::replay;
      cfg.replay_log = replay_log;
    }
    if (live) cfg.mode = ProviderMode::live;
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (!papers.empty()) cfg.paper_ids = papers;
    if (limit) cfg.citation_limit = *limit;
    if (n_impact) cfg.n_impact = *n_impact;
    if (n_other) cfg.n_other = *n_other;
    if (!crawled.empty()) cfg.crawled = crawled;
    if (!pst_other.empty()) cfg.pst_other = pst_other;
    if (!variants.empty()) cfg.variants = variants;
    if (ordering_seed) cfg.ordering_seed = *ordering_seed;
    if (coverage_k) cfg.coverage_k = *coverage_k;
    if (!k_values.empty()) cfg.k_values = k_values;
    if (!dataset_path.empty()) cfg.labeled_dataset = dataset_path;
    if (!author_id.empty()) cfg.author_id = author_id;
    if (!author_variant.empty()) cfg.author_variant = author_variant;
    if (!owners.empty()) {
      cfg.owners.clear();
      for (const auto& o : owners) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--owner needs paper_id=owner, got '" + o + "'");
        cfg.owners[o.substr(0, eq)] = o.substr(eq + 1);
      }
    }
    apply_shipped_defaults(cfg);

    RunContext run(std::move(cfg));
    handlers.at(chosen)(run, out);
    return 0;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    report(err, e.kind(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    report(err, "InternalError", e.what(), 1);
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("impact");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace impact::pipeline
