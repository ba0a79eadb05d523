#include "impact/summarizer/types.hpp"

#include "impact/common/error.hpp"

namespace impact::summarizer {

using nlohmann::json;

std::string to_string(CitationMode m) {
  switch (m) {
    case CitationMode::none: return "none";
    case CitationMode::all: return "all";
    case CitationMode::impact_only: return "impact_only";
  }
  return "?";
}

std::string to_string(Ordering o) { return o == Ordering::chronological ? "chronological" : "seeded_shuffle"; }

CitationMode citation_mode_from_string(const std::string& s) {
  if (s == "none") return CitationMode::none;
  if (s == "all") return CitationMode::all;
  if (s == "impact_only") return CitationMode::impact_only;
  throw ConfigError("unknown citation mode '" + s + "'");
}

Ordering ordering_from_string(const std::string& s) {
  if (s == "chronological") return Ordering::chronological;
  if (s == "seeded_shuffle") return Ordering::seeded_shuffle;
  throw ConfigError("unknown ordering '" + s + "'");
}

std::string PromptVariant::name() const {
  if (citations == CitationMode::none) return "none";
  return to_string(citations) + (include_intents ? "+intents" : "") + "@" + to_string(ordering);
}

PromptVariant PromptVariant::from_name(const std::string& name, std::uint64_t shuffle_seed) {
  PromptVariant v;
  v.shuffle_seed = shuffle_seed;
  if (name == "none") {
    v.citations = CitationMode::none;
    v.include_intents = false;
    v.ordering = Ordering::chronological;
    return v;
  }
  const auto at = name.find('@');
  if (at == std::string::npos) throw ConfigError("variant name '" + name + "' lacks @ordering");
  std::string head = name.substr(0, at);
  v.ordering = ordering_from_string(name.substr(at + 1));
  const std::string suffix = "+intents";
  v.include_intents = head.size() > suffix.size() && head.compare(head.size() - suffix.size(), suffix.size(), suffix) == 0;
  if (v.include_intents) head.resize(head.size() - suffix.size());
  v.citations = citation_mode_from_string(head);
  v.validate();
  return v;
}

void PromptVariant::validate() const {
  if (citations == CitationMode::none && include_intents) throw ConfigError("the citation-free variant cannot carry intents");
}

std::vector<PromptVariant> variant_grid(std::uint64_t shuffle_seed) {
  std::vector<PromptVariant> grid = {{CitationMode::none, false, Ordering::chronological, shuffle_seed}};
  for (auto mode : {CitationMode::all, CitationMode::impact_only})
    for (bool intents : {false, true})
      for (auto ordering : {Ordering::chronological, Ordering::seeded_shuffle})
        grid.push_back({mode, intents, ordering, shuffle_seed});
  return grid;
}

const EvidenceRef* ImpactSummary::find_evidence(int id) const {
  for (const auto& e : evidence_map)
    if (e.id == id) return &e;
  return nullptr;
}

namespace {
json opt_year(const std::optional<int>& y) { return y ? json(*y) : json(nullptr); }
std::optional<int> read_year(const json& j) { return j.is_null() ? std::nullopt : std::optional<int>(j.get<int>()); }
}  // namespace

void to_json(json& j, const PromptVariant& v) {
  j = {{"name", v.name()},
       {"citations", to_string(v.citations)},
       {"include_intents", v.include_intents},
       {"ordering", to_string(v.ordering)},
       {"shuffle_seed", v.shuffle_seed}};
}

void from_json(const json& j, PromptVariant& v) {
  v.citations = citation_mode_from_string(j.at("citations").get<std::string>());
  v.include_intents = j.at("include_intents").get<bool>();
  v.ordering = ordering_from_string(j.at("ordering").get<std::string>());
  v.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
}

void to_json(json& j, const EvidenceRef& r) {
  j = {{"id", r.id},
       {"context_id", r.context_id},
       {"citing_paper_id", r.citing_paper_id},
       {"citing_title", r.citing_title},
       {"citing_year", opt_year(r.citing_year)},
       {"context_text", r.context_text},
       {"intent_class", r.intent_class ? nlohmann::json(intent::to_string(*r.intent_class)) : nlohmann::json(nullptr)},
       {"intent_text", r.intent_text}};
}

void from_json(const json& j, EvidenceRef& r) {
  r.id = j.at("id").get<int>();
  r.context_id = j.at("context_id").get<std::string>();
  r.citing_paper_id = j.at("citing_paper_id").get<std::string>();
  r.citing_title = j.at("citing_title").get<std::string>();
  r.citing_year = read_year(j.at("citing_year"));
  r.context_text = j.at("context_text").get<std::string>();
  const auto cls = j.value("intent_class", nlohmann::json(nullptr));
  r.intent_class = cls.is_null() ? std::nullopt : std::optional(intent::class_from_string(cls.get<std::string>()));
  r.intent_text = j.value("intent_text", "");
}

void to_json(json& j, const TruncationManifest& t) {
  j = {{"applied", t.applied},
       {"original_chars", t.original_chars},
       {"final_chars", t.final_chars},
       {"shortened_context_ids", t.shortened_context_ids},
       {"dropped_context_ids", t.dropped_context_ids}};
}

void from_json(const json& j, TruncationManifest& t) {
  t.applied = j.at("applied").get<bool>();
  t.original_chars = j.at("original_chars").get<std::size_t>();
  t.final_chars = j.at("final_chars").get<std::size_t>();
  t.shortened_context_ids = j.at("shortened_context_ids").get<std::vector<std::string>>();
  t.dropped_context_ids = j.at("dropped_context_ids").get<std::vector<std::string>>();
}

void to_json(json& j, const ImpactPeriod& p) {
  j = {{"start_year", p.start_year},
       {"end_year", p.end_year},
       {"impact_period", p.period_label},
       {"aspect_of_period", p.aspect},
       {"impact_description", p.description},
       {"evidence", p.evidence}};
}

void from_json(const json& j, ImpactPeriod& p) {
  p.start_year = j.at("start_year").get<int>();
  p.end_year = j.at("end_year").get<int>();
  p.period_label = j.at("impact_period").get<std::string>();
  p.aspect = j.at("aspect_of_period").get<std::string>();
  p.description = j.at("impact_description").get<std::string>();
  p.evidence = j.at("evidence").get<std::vector<int>>();
}

void to_json(json& j, const ImpactSummary& s) {
  j = {{"summary_id", s.summary_id},
       {"run_id", s.run_id},
       {"input_paper_info", {{"input_paper_id", s.paper_id}, {"input_paper_title", s.paper_title}, {"input_paper_year", s.paper_year}}},
       {"variant", s.variant},
       {"impact_periods", s.periods},
       {"evidence_map", s.evidence_map},
       {"unresolved_evidence", s.unresolved_evidence},
       {"truncation", s.truncation}};
}

void from_json(const json& j, ImpactSummary& s) {
  s.summary_id = j.at("summary_id").get<std::string>();
  s.run_id = j.at("run_id").get<std::string>();
  const auto& info = j.at("input_paper_info");
  s.paper_id = info.at("input_paper_id").get<std::string>();
  s.paper_title = info.at("input_paper_title").get<std::string>();
  s.paper_year = info.at("input_paper_year").get<int>();
  s.variant = j.at("variant").get<PromptVariant>();
  s.periods = j.at("impact_periods").get<std::vector<ImpactPeriod>>();
  s.evidence_map = j.at("evidence_map").get<std::vector<EvidenceRef>>();
  s.unresolved_evidence = j.at("unresolved_evidence").get<std::vector<int>>();
  s.truncation = j.at("truncation").get<TruncationManifest>();
}

void to_json(json& j, const AuthorSummary& a) {
  j = {{"author_id", a.author_id}, {"source_summaries", a.source_summaries}, {"narrative", a.narrative}};
}

}  // namespace impact::summarizer
