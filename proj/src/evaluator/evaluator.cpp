#include "impact/evaluator/evaluator.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "impact/common/error.hpp"
#include "impact/common/parallel.hpp"
#include "impact/common/random.hpp"
#include "impact/common/text.hpp"

namespace impact::evaluator {

using nlohmann::json;

namespace {

const llm::OutputSchema& cluster_schema() {
  static const llm::OutputSchema s{
      "theme_clusters",
      {{"type", "object"},
       {"additionalProperties", false},
       {"required", {"clusters"}},
       {"properties",
        {{"clusters",
          {{"type", "array"},
           {"items",
            {{"type", "object"},
             {"additionalProperties", false},
             {"required", {"label", "phrases"}},
             {"properties",
              {{"label", {{"type", "string"}}},
               {"phrases", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}}}}}}}}};
  return s;
}

const llm::OutputSchema& coverage_schema() {
  static const llm::OutputSchema s{
      "covered_themes",
      {{"type", "object"},
       {"additionalProperties", false},
       {"required", {"count", "mentioned"}},
       {"properties",
        {{"count", {{"type", "integer"}}}, {"mentioned", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}}};
  return s;
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

}  // namespace

std::optional<double> eval_year_compliance(const summarizer::ImpactSummary& summary) {
  std::size_t total = 0, compliant = 0;
  for (const auto& p : summary.periods) {
    for (int id : p.evidence) {
      const auto* ref = summary.find_evidence(id);
      if (!ref || !ref->citing_year) continue;
      ++total;
      if (*ref->citing_year >= p.start_year && *ref->citing_year <= p.end_year) ++compliant;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(compliant) / static_cast<double>(total);
}

std::optional<double> micro_faithfulness(const std::vector<EvalReport>& reports) {
  std::size_t yes = 0, periods = 0;
  for (const auto& r : reports) {
    yes += r.faithfulness_yes;
    periods += r.faithfulness_periods;
  }
  if (periods == 0) return std::nullopt;
  return static_cast<double>(yes) / static_cast<double>(periods);
}

std::vector<ThemeCluster> clusters_from_reply(const json& reply, const std::vector<std::string>& intents) {
  struct Phrase {
    std::string text;
    std::size_t count = 0;
    bool assigned = false;
  };
  std::map<std::string, Phrase> phrases;
  for (const auto& i : intents) {
    auto& p = phrases[text::normalize_label(i)];
    if (p.count++ == 0) p.text = text::trim(i);
  }

  std::map<std::string, ThemeCluster> by_label;  // keyed by normalized label
  auto add = [&](const std::string& label, Phrase& p) {
    auto& c = by_label[text::normalize_label(label)];
    if (c.label.empty()) c.label = text::trim(label);
    c.member_intents.push_back(p.text);
    c.size += p.count;
    p.assigned = true;
  };

  for (const auto& c : reply.at("clusters")) {
    const auto label = c.at("label").get<std::string>();
    if (text::trim(label).empty()) continue;
    for (const auto& ph : c.at("phrases")) {
      auto it = phrases.find(text::normalize_label(ph.get<std::string>()));
      if (it == phrases.end()) {
        spdlog::warn("clustering reply names unknown phrase '{}'", ph.get<std::string>());
        continue;
      }
      if (!it->second.assigned) add(label, it->second);
    }
  }
  for (auto& [key, p] : phrases)
    if (!p.assigned) add(p.text, p);

  std::vector<ThemeCluster> out;
  for (auto& [key, c] : by_label)
    if (!c.member_intents.empty()) out.push_back(std::move(c));
  std::stable_sort(out.begin(), out.end(), [](const ThemeCluster& a, const ThemeCluster& b) {
    if (a.size != b.size) return a.size > b.size;
    return a.label < b.label;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].cluster_id = static_cast<int>(i) + 1;
  return out;
}

std::vector<ThemeCluster> top_clusters(const std::vector<ThemeCluster>& clusters, std::size_t k) {
  auto sorted = clusters;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ThemeCluster& a, const ThemeCluster& b) { return a.size > b.size; });
  if (sorted.size() > k) sorted.resize(k);
  return sorted;
}

CoverageResult coverage_from_labels(const std::vector<ThemeCluster>& clusters, const std::vector<std::string>& labels,
                                    std::optional<int> k) {
  CoverageResult r;
  r.k = k;
  if (clusters.empty()) return r;
  std::map<std::string, std::string> known;
  for (const auto& c : clusters) known.emplace(text::normalize_label(c.label), c.label);
  std::set<std::string> covered;
  for (const auto& l : labels) {
    auto it = known.find(text::normalize_label(l));
    if (it == known.end()) {
      spdlog::warn("coverage judge named a theme outside the list: '{}'", l);
      r.dropped_labels.push_back(l);
      continue;
    }
    if (covered.insert(it->first).second) r.covered.push_back(it->second);
  }
  r.ratio = static_cast<double>(covered.size()) / static_cast<double>(clusters.size());
  if (k) {
    if (*k <= 0) throw ConfigError("coverage k must be positive");
    std::size_t hits = 0;
    for (const auto& c : top_clusters(clusters, static_cast<std::size_t>(*k)))
      if (covered.count(text::normalize_label(c.label))) ++hits;
    r.ratio_at_k = static_cast<double>(hits) / static_cast<double>(*k);
  }
  return r;
}

Evaluator::Evaluator(llm::Gateway& gateway, EvaluatorOptions options)
    : gateway_(gateway), options_(std::move(options)), prompts_(EvalPrompts::load(options_.prompts_dir)) {
  if (options_.samples < 1) throw ConfigError("informativeness needs at least one sample");
}

llm::ChatRequest Evaluator::request(const std::string& prompt) const {
  llm::ChatRequest r;
  r.model_id = options_.model_id;
  r.temperature = options_.temperature;
  r.max_output_tokens = 2048;
  r.messages.push_back({llm::Role::user, prompt});
  return r;
}

FaithfulnessResult Evaluator::eval_faithfulness(const summarizer::ImpactSummary& summary,
                                                const std::vector<corpus::CitationContext>& contexts) {
  if (summary.periods.empty()) throw PreconditionError("summary " + summary.summary_id + " has no periods");
  FaithfulnessResult result;
  for (std::size_t i = 0; i < summary.periods.size(); ++i) {
    const auto& period = summary.periods[i];
    const auto bucket = contexts_in_period(contexts, period);
    if (bucket.empty()) {
      FaithfulnessVerdict v;
      v.period_index = i;
      v.analysis = "No citation context is dated within " + std::to_string(period.start_year) + " - " +
                   std::to_string(period.end_year) + ".";
      v.answer = false;
      v.judged = false;
      result.verdicts.push_back(std::move(v));
      continue;
    }
    auto req = request(fill_template(prompts_.faithfulness, {{"{{PAPER_NAME}}", summary.paper_title},
                                                             {"{{DESCRIPTION}}", render_period_description(period)},
                                                             {"{{SOURCES}}", format_sources(bucket)}}));
    auto reply = gateway_.complete(req);
    result.judge_calls.push_back(reply.request_hash);
    std::string problem;
    auto verdict = parse_faithfulness_reply(reply.text, i, problem);
    if (!verdict) {
      req.messages.push_back({llm::Role::assistant, reply.text});
      req.messages.push_back({llm::Role::user, "Your reply does not follow the response format: " + problem +
                                                   ". Reply again with <analysis>, <answer> (yes or no) and <proof> "
                                                   "tags, listing the exact supporting citation texts in <proof> or "
                                                   "\"none\"."});
      reply = gateway_.complete(req);
      result.judge_calls.push_back(reply.request_hash);
      verdict = parse_faithfulness_reply(reply.text, i, problem);
      if (!verdict) throw JudgeParseError("faithfulness judge reply unreadable after repair: " + problem, reply.text);
    }
    result.verdicts.push_back(std::move(*verdict));
  }
  result.periods = result.verdicts.size();
  result.yes = static_cast<std::size_t>(
      std::count_if(result.verdicts.begin(), result.verdicts.end(), [](const auto& v) { return v.answer; }));
  result.score = static_cast<double>(result.yes) / static_cast<double>(result.periods);
  return result;
}

std::vector<ThemeCluster> Evaluator::cluster_intents(const std::vector<std::string>& intent_texts) {
  std::vector<std::string> intents;
  for (const auto& i : intent_texts)
    if (!text::trim(i).empty()) intents.push_back(i);
  if (intents.empty()) throw PreconditionError("no intents to cluster");

  // Distinct phrases in a fixed order, so the prompt does not depend on
  // input order.
  std::map<std::string, std::string> distinct;
  for (const auto& i : intents) distinct.emplace(text::normalize_label(i), text::trim(i));
  if (distinct.size() == 1) return clusters_from_reply(json{{"clusters", json::array()}}, intents);

  std::vector<std::string> list;
  for (const auto& [k, v] : distinct) list.push_back(v);
  try {
    auto result = gateway_.complete_structured(
        request(fill_template(prompts_.coverage_cluster, {{"$listOfPhrases$", python_list(list)}})), cluster_schema());
    return clusters_from_reply(result.record, intents);
  } catch (const SchemaViolation& e) {
    throw JudgeParseError(std::string("clustering reply unreadable: ") + e.what(), e.raw_text());
  }
}

CoverageResult Evaluator::eval_coverage(const summarizer::ImpactSummary& summary,
                                        const std::vector<ThemeCluster>& clusters, std::optional<int> k) {
  if (clusters.empty()) return coverage_from_labels(clusters, {}, k);
  std::vector<std::string> labels;
  for (const auto& c : clusters) labels.push_back(c.label);
  std::sort(labels.begin(), labels.end());
  try {
    auto result = gateway_.complete_structured(
        request(fill_template(prompts_.coverage_judge,
                              {{"$listOfThemes$", python_list(labels)}, {"$summary$", render_summary_text(summary)}})),
        coverage_schema());
    auto cov = coverage_from_labels(clusters, result.record.at("mentioned").get<std::vector<std::string>>(), k);
    cov.judge_calls = result.request_hashes;
    return cov;
  } catch (const SchemaViolation& e) {
    throw JudgeParseError(std::string("coverage reply unreadable: ") + e.what(), e.raw_text());
  }
}

InformativenessResult Evaluator::eval_informativeness(const summarizer::ImpactSummary& summary, Metric metric) {
  std::string steps;
  const auto& list = prompts_.steps.at(metric);
  for (std::size_t i = 0; i < list.size(); ++i) steps += std::to_string(i + 1) + ". " + list[i] + (i + 1 < list.size() ? "\n" : "");
  const auto prompt = fill_template(prompts_.geval, {{"$title$", summary.paper_title},
                                                     {"$year$", std::to_string(summary.paper_year)},
                                                     {"$metric$", prompts_.metric_names.at(metric)},
                                                     {"$steps$", steps},
                                                     {"$summary$", render_summary_text(summary)}});
  InformativenessResult result;

  // One judged reply, with a single repair when no score can be read.
  auto score_once = [&](llm::ChatRequest req, bool weighted) -> double {
    auto reply = gateway_.complete(req);
    result.judge_calls.push_back(reply.request_hash);
    auto read = [&](const llm::ChatResponse& r) -> std::optional<double> {
      if (weighted && r.token_logprobs)
        if (auto s = logprob_score(*r.token_logprobs)) return s;
      return parse_score(r.text);
    };
    if (auto s = read(reply)) return *s;
    req.messages.push_back({llm::Role::assistant, reply.text});
    req.messages.push_back({llm::Role::user,
                            "End your reply with a final line of the form \"Score: <integer from 0 to 10>\"."});
    reply = gateway_.complete(req);
    result.judge_calls.push_back(reply.request_hash);
    if (auto s = read(reply)) return *s;
    throw JudgeParseError(to_string(metric) + " judge gave no readable score", reply.text);
  };

  if (options_.use_logprobs && gateway_.supports_logprobs()) {
    auto req = request(prompt);
    req.logprobs = true;
    result.method = "logprobs";
    result.samples.push_back(score_once(req, true));
  } else {
    result.method = "sampling";
    for (int i = 0; i < options_.samples; ++i) {
      auto req = request(prompt);
      req.temperature = options_.sample_temperature;
      req.seed = static_cast<std::int64_t>(derive_seed(options_.seed, static_cast<std::uint64_t>(i)) >> 1);
      result.samples.push_back(score_once(req, false));
    }
  }
  result.score = std::accumulate(result.samples.begin(), result.samples.end(), 0.0) /
                 static_cast<double>(result.samples.size()) / 10.0;
  return result;
}

EvalReport Evaluator::evaluate(const summarizer::ImpactSummary& summary,
                               const std::vector<corpus::CitationContext>& contexts,
                               const std::vector<ThemeCluster>& clusters) {
  EvalReport r;
  r.summary_id = summary.summary_id;
  r.paper_id = summary.paper_id;
  r.variant = summary.variant.name();
  r.k = options_.k;

  auto faith = eval_faithfulness(summary, contexts);
  r.faithfulness = faith.score;
  r.faithfulness_yes = faith.yes;
  r.faithfulness_periods = faith.periods;
  r.verdicts = std::move(faith.verdicts);
  append(r.judge_calls, faith.judge_calls);

  auto cov = eval_coverage(summary, clusters, options_.k);
  r.coverage = cov.ratio;
  r.coverage_at_k = cov.ratio_at_k;
  append(r.judge_calls, cov.judge_calls);

  r.year_compliance = eval_year_compliance(summary);

  for (auto m : all_metrics()) {
    auto info = eval_informativeness(summary, m);
    append(r.judge_calls, info.judge_calls);
    (m == Metric::insightfulness ? r.insightfulness : m == Metric::trend_awareness ? r.trend_awareness : r.specificity) =
        info.score;
  }
  r.validate();
  return r;
}

std::vector<EvalReport> Evaluator::evaluate_all(const std::vector<summarizer::ImpactSummary>& summaries,
                                                const corpus::Corpus& corpus,
                                                const std::map<std::string, intent::ClassifiedCitation>& classified,
                                                std::size_t workers) {
  std::vector<std::string> paper_ids;
  for (const auto& s : summaries)
    if (std::find(paper_ids.begin(), paper_ids.end(), s.paper_id) == paper_ids.end()) paper_ids.push_back(s.paper_id);

  std::vector<std::vector<corpus::CitationContext>> contexts(paper_ids.size());
  std::vector<std::vector<ThemeCluster>> clusters(paper_ids.size());
  parallel_for(paper_ids.size(), workers, [&](std::size_t i) {
    if (!corpus.find_paper(paper_ids[i])) throw MissingInput("paper " + paper_ids[i] + " is not in the corpus");
    contexts[i] = corpus.contexts_of(paper_ids[i]);
    std::vector<std::string> intents;
    for (const auto& c : contexts[i]) {
      auto it = classified.find(c.context_id);
      if (it != classified.end() && it->second.final_class == intent::IntentClass::impact_revealing &&
          !text::trim(it->second.chosen_intent_text).empty())
        intents.push_back(it->second.chosen_intent_text);
    }
    if (!intents.empty()) clusters[i] = cluster_intents(intents);
  });

  std::vector<EvalReport> out(summaries.size());
  parallel_for(summaries.size(), workers, [&](std::size_t i) {
    const auto p = static_cast<std::size_t>(
        std::find(paper_ids.begin(), paper_ids.end(), summaries[i].paper_id) - paper_ids.begin());
    out[i] = evaluate(summaries[i], contexts[p], clusters[p]);
  });
  return out;
}

}  // namespace impact::evaluator
