#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/summarizer/types.hpp"

namespace impact::study {

enum class TaskKind { pairwise, likert };
enum class Criterion { relevance, insightfulness };
enum class Side { left, right };

std::string to_string(TaskKind k);
std::string to_string(Criterion c);
std::string to_string(Side s);
TaskKind task_kind_from_string(const std::string& s);
Criterion criterion_from_string(const std::string& s);
Side side_from_string(const std::string& s);

struct Statement {
  std::string statement_id;
  std::string theme;  // e.g. clarity, informativeness
  std::string text;
};

/// A paper under study, owned by the expert who rates it.
struct StudyPaper {
  std::string paper_id;
  std::string title;
  std::string owner;
  int citation_count = 0;
  int impact_revealing_count = 0;
};

struct StudyTask {
  std::string task_id;
  TaskKind kind = TaskKind::pairwise;
  std::string paper_id;
  std::string left_summary_id;   // pairwise; the rated summary for likert
  std::string right_summary_id;  // pairwise only
  std::optional<Criterion> criterion;
  std::string statement_id;  // likert only
  std::string assigned_rater;  // opaque token
};

struct Vote {
  std::string task_id;
  std::string rater_id;
  std::optional<Side> choice;  // pairwise
  std::optional<int> likert;   // 1..5
  std::int64_t timestamp_ms = 0;

  bool operator==(const Vote&) const = default;
};

struct Study {
  std::string study_id;
  std::string variant_a;  // compared pairwise against variant_b
  std::string variant_b;  // also the variant rated on the statements
  std::vector<StudyPaper> papers;
  std::vector<Statement> statements;
  std::vector<StudyTask> tasks;
  std::map<std::string, std::string> raters;  // token -> owner
  std::map<std::string, summarizer::ImpactSummary> summaries;  // by summary id

  const StudyTask* find_task(const std::string& task_id) const;
  const StudyPaper* find_paper(const std::string& paper_id) const;
  const Statement* find_statement(const std::string& statement_id) const;
};

void to_json(nlohmann::json& j, const Statement& s);
void from_json(const nlohmann::json& j, Statement& s);
void to_json(nlohmann::json& j, const StudyPaper& p);
void from_json(const nlohmann::json& j, StudyPaper& p);
void to_json(nlohmann::json& j, const StudyTask& t);
void from_json(const nlohmann::json& j, StudyTask& t);
void to_json(nlohmann::json& j, const Vote& v);
void from_json(const nlohmann::json& j, Vote& v);
void to_json(nlohmann::json& j, const Study& s);
void from_json(const nlohmann::json& j, Study& s);

}  // namespace impact::study
