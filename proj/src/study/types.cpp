#include "impact/study/types.hpp"

#include "impact/common/error.hpp"

namespace impact::study {

using nlohmann::json;

std::string to_string(TaskKind k) { return k == TaskKind::pairwise ? "pairwise" : "likert"; }
std::string to_string(Criterion c) { return c == Criterion::relevance ? "relevance" : "insightfulness"; }
std::string to_string(Side s) { return s == Side::left ? "left" : "right"; }

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "pairwise") return TaskKind::pairwise;
  if (s == "likert") return TaskKind::likert;
  throw ConfigError("unknown task kind '" + s + "'");
}

Criterion criterion_from_string(const std::string& s) {
  if (s == "relevance") return Criterion::relevance;
  if (s == "insightfulness") return Criterion::insightfulness;
  throw ConfigError("unknown criterion '" + s + "'");
}

Side side_from_string(const std::string& s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  throw PreconditionError("choice must be left or right, got '" + s + "'");
}

const StudyTask* Study::find_task(const std::string& task_id) const {
  for (const auto& t : tasks)
    if (t.task_id == task_id) return &t;
  return nullptr;
}

const StudyPaper* Study::find_paper(const std::string& paper_id) const {
  for (const auto& p : papers)
    if (p.paper_id == paper_id) return &p;
  return nullptr;
}

const Statement* Study::find_statement(const std::string& statement_id) const {
  for (const auto& s : statements)
    if (s.statement_id == statement_id) return &s;
  return nullptr;
}

void to_json(json& j, const Statement& s) {
  j = {{"statement_id", s.statement_id}, {"theme", s.theme}, {"text", s.text}};
}

void from_json(const json& j, Statement& s) {
  s.statement_id = j.at("statement_id").get<std::string>();
  s.theme = j.value("theme", "");
  s.text = j.at("text").get<std::string>();
}

void to_json(json& j, const StudyPaper& p) {
  j = {{"paper_id", p.paper_id},
       {"title", p.title},
       {"owner", p.owner},
       {"citation_count", p.citation_count},
       {"impact_revealing_count", p.impact_revealing_count}};
}

void from_json(const json& j, StudyPaper& p) {
  p.paper_id = j.at("paper_id").get<std::string>();
  p.title = j.at("title").get<std::string>();
  p.owner = j.at("owner").get<std::string>();
  p.citation_count = j.value("citation_count", 0);
  p.impact_revealing_count = j.value("impact_revealing_count", 0);
}

void to_json(json& j, const StudyTask& t) {
  j = {{"task_id", t.task_id},
       {"kind", to_string(t.kind)},
       {"paper_id", t.paper_id},
       {"left_summary_id", t.left_summary_id},
       {"right_summary_id", t.right_summary_id},
       {"criterion", t.criterion ? json(to_string(*t.criterion)) : json(nullptr)},
       {"statement_id", t.statement_id},
       {"assigned_rater", t.assigned_rater}};
}

void from_json(const json& j, StudyTask& t) {
  t.task_id = j.at("task_id").get<std::string>();
  t.kind = task_kind_from_string(j.at("kind").get<std::string>());
  t.paper_id = j.at("paper_id").get<std::string>();
  t.left_summary_id = j.at("left_summary_id").get<std::string>();
  t.right_summary_id = j.at("right_summary_id").get<std::string>();
  t.criterion = j.at("criterion").is_null() ? std::nullopt
                                            : std::optional(criterion_from_string(j.at("criterion").get<std::string>()));
  t.statement_id = j.at("statement_id").get<std::string>();
  t.assigned_rater = j.at("assigned_rater").get<std::string>();
}

void to_json(json& j, const Vote& v) {
  j = {{"task_id", v.task_id},
       {"rater_id", v.rater_id},
       {"choice", v.choice ? json(to_string(*v.choice)) : json(nullptr)},
       {"likert", v.likert ? json(*v.likert) : json(nullptr)},
       {"timestamp_ms", v.timestamp_ms}};
}

void from_json(const json& j, Vote& v) {
  v.task_id = j.at("task_id").get<std::string>();
  v.rater_id = j.at("rater_id").get<std::string>();
  const auto choice = j.value("choice", json(nullptr));
  v.choice = choice.is_null() ? std::nullopt : std::optional(side_from_string(choice.get<std::string>()));
  const auto likert = j.value("likert", json(nullptr));
  v.likert = likert.is_null() ? std::nullopt : std::optional(likert.get<int>());
  v.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
}

void to_json(json& j, const Study& s) {
  json summaries = json::array();
  for (const auto& [id, sum] : s.summaries) summaries.push_back(sum);
  j = {{"study_id", s.study_id},
       {"variant_a", s.variant_a},
       {"variant_b", s.variant_b},
       {"papers", s.papers},
       {"statements", s.statements},
       {"tasks", s.tasks},
       {"raters", s.raters},
       {"summaries", summaries}};
}

void from_json(const json& j, Study& s) {
  s.study_id = j.at("study_id").get<std::string>();
  s.variant_a = j.at("variant_a").get<std::string>();
  s.variant_b = j.at("variant_b").get<std::string>();
  s.papers = j.at("papers").get<std::vector<StudyPaper>>();
  s.statements = j.at("statements").get<std::vector<Statement>>();
  s.tasks = j.at("tasks").get<std::vector<StudyTask>>();
  s.raters = j.at("raters").get<std::map<std::string, std::string>>();
  s.summaries.clear();
  for (const auto& sum : j.at("summaries")) {
    auto parsed = sum.get<summarizer::ImpactSummary>();
    s.summaries.emplace(parsed.summary_id, std::move(parsed));
  }
}

}  // namespace impact::study
