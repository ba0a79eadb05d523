#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include <spdlog/spdlog.h>

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/text.hpp"
#include "impact/corpus/fetcher.hpp"
#include "impact/corpus/scholar_api.hpp"
#include "impact/dataset/builder.hpp"
#include "impact/evaluator/ablation.hpp"
#include "impact/evaluator/evaluator.hpp"
#include "impact/intent/analysis.hpp"
#include "impact/intent/engine.hpp"
#include "impact/intent/prompt.hpp"
#include "impact/pipeline/run.hpp"
#include "impact/study/protocol.hpp"
#include "impact/study/server.hpp"
#include "impact/study/store.hpp"
#include "impact/summarizer/summarizer.hpp"

namespace impact::pipeline::commands {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string display(const fs::path& p) { return p.generic_string(); }

intent::IclConfig icl_config(const RunContext& run) {
  intent::IclConfig icl;
  icl.k = run.config().icl_k;
  icl.runs_per_context = run.config().icl_runs;
  icl.shuffle_seed = run.seeds().icl_shuffle;
  icl.example_pool = intent::load_pool(run.config().icl_pool);
  icl.validate();
  return icl;
}

std::map<std::string, intent::ClassifiedCitation> by_context(const std::vector<intent::ClassifiedCitation>& v) {
  std::map<std::string, intent::ClassifiedCitation> out;
  for (const auto& c : v) out[c.context_id] = c;
  return out;
}

std::vector<summarizer::PromptVariant> variants_of(const RunContext& run) {
  const auto seed = run.seeds().ordering;
  if (run.config().variants.empty()) return summarizer::variant_grid(seed);
  std::vector<summarizer::PromptVariant> out;
  for (const auto& name : run.config().variants) out.push_back(summarizer::PromptVariant::from_name(name, seed));
  return out;
}

// Variants in order of first appearance among the summaries.
std::vector<summarizer::PromptVariant> variants_in(const std::vector<summarizer::ImpactSummary>& summaries) {
  std::vector<summarizer::PromptVariant> out;
  std::set<std::string> seen;
  for (const auto& s : summaries)
    if (seen.insert(s.variant.name()).second) out.push_back(s.variant);
  return out;
}

std::vector<std::string> read_lines(const fs::path& p, const std::string& what) {
  if (p.empty()) throw MissingInput("no " + what + " file configured");
  if (!fs::exists(p)) throw MissingInput(what + " file not found: " + p.string());
  std::vector<std::string> out;
  for (auto& line : text::split_lines(read_text_file(p))) {
    auto t = text::trim(line);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<intent::IclExample> load_labeled(const fs::path& p) {
  if (!fs::exists(p)) throw MissingInput("labeled dataset not found: " + p.string() + "; run build-dataset first");
  std::vector<intent::IclExample> out;
  for (const auto& r : load_records<dataset::LabeledContext>(p)) out.push_back({r.context_text, "", r.label});
  return out;
}

std::string dataset_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "d%05zu", i + 1);
  return buf;
}

}  // namespace

void fetch(RunContext& run, std::ostream& out) {
  const auto& cfg = run.config();
  if (cfg.paper_ids.empty()) throw ConfigError("corpus.papers lists no paper ids");
  std::shared_ptr<corpus::ScholarApi> api;
  if (!cfg.corpus_fixture.empty()) {
    if (!fs::exists(cfg.corpus_fixture)) throw MissingInput("corpus fixture not found: " + cfg.corpus_fixture.string());
    api = corpus::MockScholarApi::from_file(cfg.corpus_fixture);
  } else {
    api = std::make_shared<corpus::S2Client>(corpus::S2Settings::from_env());
  }
  corpus::Fetcher fetcher(api, cfg.cache_dir);
  corpus::CorpusStore store(run.path("corpus"));
  const auto cursor_path = run.path("fetch.cursor");

  corpus::Corpus corp;
  std::optional<corpus::FetchCursor> resume;
  if (fs::exists(cursor_path)) {
    resume = read_json_file(cursor_path).get<corpus::FetchCursor>();
    if (fs::exists(store.index_path())) corp = store.load();
    spdlog::info("resuming fetch at {} offset {}", resume->paper_id, resume->offset);
  }

  auto save = [&] {
    std::vector<corpus::CitationContext> all;
    for (const auto& p : corp.papers) {
      auto mine = corp.contexts_of(p.paper_id);
      mine = corpus::dedup_and_order(std::move(mine));
      all.insert(all.end(), mine.begin(), mine.end());
    }
    corp.contexts = std::move(all);
    store.save(corp);
  };

  for (const auto& pid : cfg.paper_ids) {
    const bool have = corp.find_paper(pid) != nullptr;
    if (resume && have && pid != resume->paper_id) continue;
    const std::size_t offset = resume && pid == resume->paper_id ? resume->offset : 0;
    if (!have) corp.papers.push_back(fetcher.fetch_paper(pid));
    std::optional<std::size_t> limit = cfg.citation_limit;
    if (offset >= *limit) continue;
    *limit -= offset;
    try {
      auto got = fetcher.fetch_citation_contexts(pid, limit, offset);
      corp.contexts.insert(corp.contexts.end(), got.begin(), got.end());
    } catch (const corpus::PartialFetch& e) {
      corp.contexts.insert(corp.contexts.end(), e.fetched().begin(), e.fetched().end());
      save();
      write_json_file(cursor_path, json(e.cursor()));
      throw;
    }
  }
  save();
  if (fs::exists(cursor_path)) fs::remove(cursor_path);

  json report = json::object();
  for (const auto& p : corp.papers) {
    const auto ctx = corp.contexts_of(p.paper_id);
    const auto anomalies = corpus::flag_year_anomalies(p, ctx);
    for (const auto& id : anomalies) spdlog::warn("context {} predates paper {}", id, p.paper_id);
    report[p.paper_id] = {{"contexts", ctx.size()}, {"year_anomalies", anomalies}};
  }
  write_json_file(run.path("fetch_report.json"), report);

  run.record("fetch", {cfg.corpus_fixture},
             {store.papers_path(), store.contexts_path(), store.index_path(), run.path("fetch_report.json")}, json::object(),
             {{"papers", corp.papers.size()}, {"contexts", corp.contexts.size()}, {"api_calls", api->call_count()}});
  out << "fetch: " << corp.papers.size() << " papers, " << corp.contexts.size() << " contexts -> "
      << display(store.root()) << "\n";
}

void classify(RunContext& run, std::ostream& out) {
  const auto corp = run.load_corpus();
  const auto icl = icl_config(run);
  intent::IntentEngine engine(run.gateway(), run.config().model_intent);
  const auto classified = engine.classify_all(corp.contexts, icl, run.config().workers);
  const auto target = run.path("intents.jsonl");
  store_records(target, classified);

  std::size_t impact = 0;
  for (const auto& c : classified) impact += c.final_class == intent::IntentClass::impact_revealing;
  const double agreement = classified.empty() ? 1.0 : intent::full_agreement_rate(classified);
  corpus::CorpusStore store(run.path("corpus"));
  run.record("classify", {store.contexts_path(), run.config().icl_pool}, {target},
             {{"icl_shuffle", run.seeds().icl_shuffle}},
             {{"contexts", classified.size()},
              {"impact_revealing", impact},
              {"full_agreement_rate", agreement},
              {"k", icl.k},
              {"runs", icl.runs_per_context},
              {"model", run.config().model_intent}});
  out << "classify: " << classified.size() << " contexts (" << impact << " impact-revealing) -> " << display(target)
      << "\n";
}

void build_dataset(RunContext& run, std::ostream& out) {
  const auto& cfg = run.config();
  std::vector<std::string> crawled;
  fs::path crawled_source = cfg.crawled;
  if (cfg.crawled.empty()) {
    const auto corp = run.load_corpus();
    for (const auto& c : corp.contexts) crawled.push_back(c.text);
    crawled_source = run.path("corpus/contexts.jsonl");
  } else {
    crawled = read_lines(cfg.crawled, "crawled contexts");
  }
  const auto pst = read_lines(cfg.pst_other, "pst_other");
  const auto patterns = dataset::compile_patterns(cfg.patterns);
  const auto data = dataset::build_dataset(crawled, pst, patterns, {cfg.n_impact, cfg.n_other, run.seeds().dataset, cfg.workers});
  const auto target = run.path("dataset.jsonl");
  store_records(target, data);
  run.record("build-dataset", {crawled_source, cfg.pst_other, cfg.patterns}, {target}, {{"dataset", run.seeds().dataset}},
             {{"n_impact", cfg.n_impact}, {"n_other", cfg.n_other}, {"patterns", patterns.size()}});
  out << "build-dataset: " << data.size() << " records -> " << display(target) << "\n";
}

void summarize(RunContext& run, std::ostream& out) {
  const auto& cfg = run.config();
  const auto corp = run.load_corpus();
  const auto classified = by_context(run.load_intents());
  const auto variants = variants_of(run);
  summarizer::SummarizerOptions opts;
  opts.model_id = cfg.model_summary;
  opts.max_output_tokens = cfg.summary_max_tokens;
  opts.max_prompt_chars = cfg.max_prompt_chars;
  opts.present_year = cfg.present_year;
  summarizer::Summarizer s(run.gateway(), opts);
  const auto summaries = s.generate_grid(corp, classified, variants, cfg.run_id, cfg.workers);
  const auto target = run.path("summaries.jsonl");
  store_records(target, summaries);

  json names = json::array();
  for (const auto& v : variants) names.push_back(v.name());
  std::size_t unresolved = 0, truncated = 0;
  for (const auto& x : summaries) {
    unresolved += !x.unresolved_evidence.empty();
    truncated += x.truncation.applied;
  }
  run.record("summarize", {run.path("corpus/contexts.jsonl"), run.path("intents.jsonl")}, {target},
             {{"ordering", run.seeds().ordering}},
             {{"variants", names},
              {"summaries", summaries.size()},
              {"with_unresolved_evidence", unresolved},
              {"truncated", truncated},
              {"model", cfg.model_summary}});
  out << "summarize: " << summaries.size() << " summaries (" << variants.size() << " variants) -> " << display(target)
      << "\n";
}

void evaluate(RunContext& run, std::ostream& out) {
  const auto& cfg = run.config();
  const auto summaries = run.load_summaries();
  const auto corp = run.load_corpus();
  const auto classified = by_context(run.load_intents());
  evaluator::EvaluatorOptions opts;
  opts.model_id = cfg.model_judge;
  opts.k = cfg.coverage_k;
  opts.samples = cfg.samples;
  opts.seed = run.seeds().judge;
  opts.use_logprobs = cfg.use_logprobs;
  opts.prompts_dir = cfg.prompts_dir;
  evaluator::Evaluator ev(run.gateway(), opts);
  const auto reports = ev.evaluate_all(summaries, corp, classified, cfg.workers);
  const auto target = run.path("eval_report.jsonl");
  store_records(target, reports);
  run.record("evaluate", {run.path("summaries.jsonl"), run.path("corpus/contexts.jsonl"), run.path("intents.jsonl")},
             {target}, {{"judge", run.seeds().judge}},
             {{"reports", reports.size()}, {"k", cfg.coverage_k}, {"model", cfg.model_judge}});
  out << "evaluate: " << reports.size() << " reports -> " << display(target) << "\n";
}

void ablate(RunContext& run, std::ostream& out) {
  const auto& cfg = run.config();
  const auto report_path = run.path("eval_report.jsonl");
  if (!fs::exists(report_path)) throw MissingInput("missing " + report_path.string() + "; run evaluate first");
  const auto reports = load_records<evaluator::EvalReport>(report_path);
  const auto summaries = run.load_summaries();
  const auto corp = run.load_corpus();
  std::set<std::string> summarized;
  for (const auto& s : summaries) summarized.insert(s.paper_id);
  std::vector<corpus::Paper> papers;
  for (const auto& p : corp.papers)
    if (summarized.count(p.paper_id)) papers.push_back(p);

  const auto table = evaluator::run_ablation(reports, papers, variants_in(summaries), cfg.coverage_k);
  const auto json_path = run.path("ablation_table.json");
  const auto text_path = run.path("ablation_table.txt");
  write_json_file(json_path, json(table));
  const auto rendered = evaluator::render_ablation(table);
  write_text_atomic(text_path, rendered);
  run.record("ablate", {report_path, run.path("summaries.jsonl")}, {json_path, text_path}, json::object(),
             {{"rows", table.rows.size()}, {"fields", table.per_field.size()}});
  out << rendered;
  out << "ablate: " << table.rows.size() << " rows -> " << display(json_path) << ", " << display(text_path) << "\n";
}

void ksweep(RunContext& run, std::ostream& out) {
  const auto& cfg = run.config();
  const fs::path source = cfg.labeled_dataset.empty() ? cfg.icl_pool : cfg.labeled_dataset;
  const auto items = intent::load_pool(source);
  intent::IntentEngine engine(run.gateway(), cfg.model_intent);
  const auto report = intent::run_k_sweep(engine, items, cfg.k_values, cfg.ksweep_runs, run.seeds().ksweep, cfg.workers);
  const auto target = run.path("ksweep.json");
  write_json_file(target, json(report));
  run.record("ksweep", {source}, {target}, {{"ksweep", run.seeds().ksweep}},
             {{"k_values", cfg.k_values}, {"runs", cfg.ksweep_runs}, {"model", cfg.model_intent}});
  out << "ksweep: " << report.points.size() << " k values -> " << display(target) << "\n";
}

void author_summary(RunContext& run, std::ostream& out) {
  const auto& cfg = run.config();
  const auto summaries = run.load_summaries();
  const auto corp = run.load_corpus();
  const std::set<std::string> wanted(cfg.author_papers.begin(), cfg.author_papers.end());
  std::map<std::string, summarizer::ImpactSummary> by_paper;
  for (const auto& s : summaries)
    if (s.variant.name() == cfg.author_variant && (wanted.empty() || wanted.count(s.paper_id))) by_paper[s.paper_id] = s;
  std::vector<corpus::Paper> papers;
  for (const auto& p : corp.papers)
    if (by_paper.count(p.paper_id)) papers.push_back(p);
  if (papers.empty())
    throw MissingSummary(wanted.empty() ? std::string("*") : *wanted.begin(), cfg.author_variant);
  std::vector<summarizer::ImpactSummary> chosen;
  for (const auto& p : summarizer::select_top_cited(papers, 10)) chosen.push_back(by_paper.at(p.paper_id));

  summarizer::SummarizerOptions opts;
  opts.model_id = cfg.model_summary;
  opts.max_output_tokens = cfg.summary_max_tokens;
  summarizer::Summarizer s(run.gateway(), opts);
  const auto author = s.aggregate_author(cfg.author_id, chosen);
  const auto target = run.path("author_summary.json");
  write_json_file(target, json(author));
  run.record("author-summary", {run.path("summaries.jsonl")}, {target}, json::object(),
             {{"author_id", cfg.author_id}, {"variant", cfg.author_variant}, {"papers", chosen.size()}});
  out << "author-summary: " << chosen.size() << " papers -> " << display(target) << "\n";
}

void bench_classifier(RunContext& run, std::ostream& out) {
  const auto& cfg = run.config();
  const fs::path source = cfg.labeled_dataset.empty() ? run.path("dataset.jsonl") : cfg.labeled_dataset;
  const auto items = load_labeled(source);
  std::vector<corpus::CitationContext> contexts;
  std::map<std::string, intent::IntentClass> gold;
  for (std::size_t i = 0; i < items.size(); ++i) {
    corpus::CitationContext c;
    c.context_id = dataset_id(i);
    c.cited_paper_id = "dataset";
    c.text = items[i].context_text;
    contexts.push_back(c);
    gold[c.context_id] = items[i].intent_class;
  }
  const auto icl = icl_config(run);
  intent::IntentEngine engine(run.gateway(), cfg.model_intent);
  const auto classified = engine.classify_all(contexts, icl, cfg.workers);
  std::map<std::string, intent::IntentClass> predicted;
  for (const auto& c : classified) predicted[c.context_id] = c.final_class;

  json metrics = {{"llm", json(intent::compute_metrics(predicted, gold))},
                  {"always_impact_revealing", json(intent::always_impact_baseline(gold))},
                  {"instances", gold.size()}};
  std::vector<fs::path> inputs = {source, cfg.icl_pool};
  for (const auto& [scheme, file] : cfg.external_predictions) {
    const auto preds = intent::load_external_predictions(intent::scheme_from_string(scheme), file);
    metrics["external"][scheme] = json(intent::compute_metrics(preds, gold));
    inputs.push_back(file);
  }
  const auto preds_path = run.path("bench_intents.jsonl");
  const auto target = run.path("metrics.json");
  store_records(preds_path, classified);
  write_json_file(target, metrics);
  run.record("bench-classifier", inputs, {preds_path, target}, {{"icl_shuffle", run.seeds().icl_shuffle}},
             {{"k", icl.k}, {"runs", icl.runs_per_context}, {"model", cfg.model_intent}});
  out << "bench-classifier: " << gold.size() << " instances, F1 " << metrics["llm"]["f1"].get<double>() << " -> "
      << display(target) << "\n";
}

void fields(RunContext& run, std::ostream& out) {
  const auto corp = run.load_corpus();
  const auto records = intent::join_classified(corp, run.load_intents());
  json splits = json::object();
  for (auto split : {intent::Split::all, intent::Split::recent, intent::Split::older, intent::Split::highly_cited,
                     intent::Split::less_cited}) {
    json rows = json::object();
    try {
      for (const auto& [field, share] : intent::field_distribution(records, split))
        rows[corpus::to_string(field)] = {{"n", share.n}, {"impact_pct", share.impact_pct}, {"other_pct", share.other_pct}};
    } catch (const EmptySplit&) {
      rows = nullptr;
    }
    splits[intent::to_string(split)] = rows;
  }
  json themes = json::object();
  for (const auto& p : corp.papers) {
    json list = json::array();
    try {
      for (const auto& t : intent::intent_frequency(records, p.paper_id, 10))
        list.push_back({{"intent", t.intent}, {"count", t.count}});
    } catch (const NoImpactCitations&) {
    }
    themes[p.paper_id] = list;
  }
  const auto target = run.path("fields.json");
  write_json_file(target, {{"splits", splits}, {"top_intents", themes}});
  run.record("fields", {run.path("corpus/contexts.jsonl"), run.path("intents.jsonl")}, {target}, json::object(),
             {{"records", records.size()}});
  out << "fields: " << records.size() << " classified contexts -> " << display(target) << "\n";
}

void create_study(RunContext& run, std::ostream& out) {
  const auto& cfg = run.config();
  if (cfg.owners.empty()) throw ConfigError("study.owners lists no papers");
  const auto summaries = run.load_summaries();
  const auto corp = run.load_corpus();
  const auto classified = by_context(run.load_intents());

  std::vector<study::StudyPaper> papers;
  for (const auto& [pid, owner] : cfg.owners) {
    const auto* p = corp.find_paper(pid);
    if (!p) throw MissingInput("study paper " + pid + " is not in the corpus");
    study::StudyPaper sp{pid, p->title, owner, static_cast<int>(p->citation_count), 0};
    for (const auto& c : corp.contexts_of(pid)) {
      auto it = classified.find(c.context_id);
      if (it != classified.end() && it->second.final_class == intent::IntentClass::impact_revealing)
        ++sp.impact_revealing_count;
    }
    papers.push_back(sp);
  }
  if (!fs::exists(cfg.statements)) throw MissingInput("statements file not found: " + cfg.statements.string());
  const auto statements = read_json_file(cfg.statements).get<std::vector<study::Statement>>();
  const auto st = study::create_study(cfg.study_id, papers, summaries, cfg.variant_a, cfg.variant_b, statements,
                                      run.seeds().study);
  const auto db = run.path("study.sqlite");
  study::StudyStore store(db);
  store.create(st);
  const auto raters = run.path("study_raters.json");
  write_json_file(raters, json(st.raters));
  run.record("create-study", {run.path("summaries.jsonl"), cfg.statements}, {raters}, {{"study", run.seeds().study}},
             {{"study_id", cfg.study_id}, {"tasks", st.tasks.size()}, {"raters", st.raters.size()}});
  out << "create-study: " << st.tasks.size() << " tasks for " << st.raters.size() << " raters -> " << display(db)
      << "\n";
}

void serve_study(RunContext& run, std::ostream& out) {
  const auto db = run.path("study.sqlite");
  if (!fs::exists(db)) throw MissingInput("no study at " + db.string() + "; run create-study first");
  auto store = std::make_shared<study::StudyStore>(db);
  auto cfg = study::server_config_from_env();
  cfg.ui_dir = run.config().ui_dir;
  study::StudyServer server(store, cfg);
  const int port = server.bind();
  run.record("serve-study", {}, {}, json::object(), {{"host", cfg.host}, {"port", port}});
  out << "serve-study: listening on http://" << cfg.host << ":" << port << "\n" << std::flush;
  server.run();
}

}  // namespace impact::pipeline::commands
