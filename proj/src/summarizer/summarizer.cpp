#include "impact/summarizer/summarizer.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "impact/common/error.hpp"
#include "impact/common/parallel.hpp"
#include "impact/common/text.hpp"
#include "impact/llm/schema.hpp"

namespace impact::summarizer {

std::optional<std::pair<int, int>> parse_period(const std::string& label, int reference_year) {
  static const std::regex token(R"(\b(1[5-9]\d\d|20\d\d)\b|\b(present|now|current|today|ongoing)\b)",
                                std::regex::icase);
  std::vector<int> years;
  for (auto it = std::sregex_iterator(label.begin(), label.end(), token); it != std::sregex_iterator(); ++it) {
    years.push_back((*it)[1].matched ? std::stoi((*it)[1].str()) : reference_year);
    if (years.size() == 2) break;
  }
  if (years.empty()) return std::nullopt;
  int start = years.front();
  int end = years.size() > 1 ? years[1] : years.front();
  if (start > end) std::swap(start, end);
  return std::pair{start, end};
}

ImpactSummary summary_from_record(const nlohmann::json& record, const corpus::Paper& paper,
                                  const PromptVariant& variant, const SummaryPrompt& prompt, int reference_year,
                                  const std::string& run_id, const std::string& raw_text) {
  ImpactSummary s;
  s.summary_id = paper.paper_id + "/" + variant.name();
  s.run_id = run_id;
  s.paper_id = paper.paper_id;
  s.paper_title = paper.title;
  s.paper_year = paper.year;
  s.variant = variant;
  s.evidence_map = prompt.evidence_map;
  s.truncation = prompt.truncation;

  std::set<int> known;
  for (const auto& e : prompt.evidence_map) known.insert(e.id);
  std::set<int> unresolved;

  for (const auto& p : record.at("impact_periods")) {
    ImpactPeriod period;
    period.period_label = p.at("impact_period").get<std::string>();
    auto years = parse_period(period.period_label, reference_year);
    if (!years) throw SchemaViolation("unreadable impact_period '" + period.period_label + "'", raw_text);
    std::tie(period.start_year, period.end_year) = *years;
    period.aspect = p.at("aspect_of_period").get<std::string>();
    period.description = p.at("impact_description").get<std::string>();
    period.evidence = p.at("evidence").get<std::vector<int>>();
    for (int id : period.evidence)
      if (!known.count(id)) unresolved.insert(id);
    s.periods.push_back(std::move(period));
  }
  if (s.periods.empty()) throw SchemaViolation("summary has no impact periods", raw_text);
  std::stable_sort(s.periods.begin(), s.periods.end(), [](const ImpactPeriod& a, const ImpactPeriod& b) {
    return std::pair(a.start_year, a.end_year) < std::pair(b.start_year, b.end_year);
  });
  s.unresolved_evidence.assign(unresolved.begin(), unresolved.end());
  return s;
}

std::vector<corpus::Paper> select_top_cited(std::vector<corpus::Paper> papers, std::size_t n) {
  std::sort(papers.begin(), papers.end(), [](const corpus::Paper& a, const corpus::Paper& b) {
    if (a.citation_count != b.citation_count) return a.citation_count > b.citation_count;
    return a.paper_id < b.paper_id;
  });
  if (papers.size() > n) papers.resize(n);
  return papers;
}

ImpactSummary Summarizer::generate_summary(const corpus::Paper& paper, const std::vector<EvidenceItem>& candidates,
                                           const PromptVariant& variant, const std::string& run_id) {
  const auto evidence = select_evidence(candidates, variant);
  const auto prompt = assemble_summary_prompt(paper, evidence, variant, options_.max_prompt_chars);

  int reference_year = paper.year;
  for (const auto& c : candidates)
    if (c.context.citing_year) reference_year = std::max(reference_year, *c.context.citing_year);
  if (options_.present_year) reference_year = *options_.present_year;

  llm::ChatRequest request;
  request.model_id = options_.model_id;
  request.temperature = options_.temperature;
  request.max_output_tokens = options_.max_output_tokens;
  request.messages.push_back({llm::Role::user, prompt.text});
  auto result = gateway_.complete_structured(request, llm::impact_summary_schema());
  return summary_from_record(result.record, paper, variant, prompt, reference_year, run_id, result.raw_text);
}

std::vector<ImpactSummary> Summarizer::generate_grid(
    const corpus::Corpus& corpus, const std::map<std::string, intent::ClassifiedCitation>& classified,
    const std::vector<PromptVariant>& variants, const std::string& run_id, std::size_t workers) {
  std::vector<std::vector<EvidenceItem>> candidates;
  for (const auto& p : corpus.papers) candidates.push_back(evidence_for(corpus, p.paper_id, classified));

  const std::size_t cells = corpus.papers.size() * variants.size();
  std::vector<ImpactSummary> out(cells);
  parallel_for(cells, workers, [&](std::size_t i) {
    const std::size_t p = i / variants.size();
    out[i] = generate_summary(corpus.papers[p], candidates[p], variants[i % variants.size()], run_id);
  });
  return out;
}

AuthorSummary Summarizer::aggregate_author(const std::string& author_id, const std::vector<ImpactSummary>& summaries) {
  if (summaries.empty()) throw PreconditionError("author " + author_id + " has no paper summaries");
  llm::ChatRequest request;
  request.model_id = options_.model_id;
  request.temperature = options_.temperature;
  request.max_output_tokens = options_.max_output_tokens;
  request.messages.push_back({llm::Role::user, build_author_prompt(summaries)});
  auto reply = gateway_.complete(request);

  AuthorSummary a;
  a.author_id = author_id;
  for (const auto& s : summaries) a.source_summaries.push_back(s.summary_id);
  a.narrative = text::trim(reply.text);
  if (a.narrative.empty()) throw ProviderError("empty author narrative for " + author_id);
  return a;
}

}  // namespace impact::summarizer
