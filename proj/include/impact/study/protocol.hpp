#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/study/types.hpp"

namespace impact::study {

/// Builds the task list: one pairwise task per paper and criterion, then one
/// likert task per paper and statement on variant_b's summary. Pairwise tasks
/// run all relevance tasks first, then all insightfulness tasks, and
/// variant_a sits on the left at even positions of that sequence. Each owner
/// gets one opaque rater token derived from the seed. MissingSummary when a
/// paper lacks either variant.
Study create_study(const std::string& study_id, const std::vector<StudyPaper>& papers,
                   const std::vector<summarizer::ImpactSummary>& summaries, const std::string& variant_a,
                   const std::string& variant_b, const std::vector<Statement>& statements, std::uint64_t seed);

/// Checks a vote against the study: UnknownTask, PreconditionError for a
/// rater not assigned to the task or a missing/extra field, InvalidLikert.
void validate_vote(const Study& study, const Vote& vote);

/// Rater-facing view of a task. Summaries appear only as "Summary 1" and
/// "Summary 2" (or "Summary" for a statement) with their periods; no summary
/// id, variant or run metadata is included.
nlohmann::json task_payload(const Study& study, const StudyTask& task);

struct PairwiseShare {
  std::size_t votes = 0;
  std::map<std::string, double> win_pct;  // variant -> percent, sums to 100
};

struct LikertShare {
  std::size_t votes = 0;
  std::map<int, std::size_t> counts;  // 1..5
  double agree_pct = 0.0;             // share of 4 and 5
};

struct ResultView {
  std::vector<std::string> paper_ids;
  std::map<std::string, PairwiseShare> pairwise;  // by criterion
  std::map<std::string, LikertShare> likert;      // by statement id
};

struct StudyResult {
  std::size_t total_votes = 0;
  std::map<std::string, ResultView> views;  // all, top10_impact_revealing, top10_citations
};

/// The ceil(10%) papers with the most of `count`, ties by paper id.
std::vector<std::string> top_decile(const std::vector<StudyPaper>& papers, int StudyPaper::*count);

/// De-blinds votes to variants and tallies every view. NoVotes without votes.
StudyResult aggregate_results(const Study& study, const std::vector<Vote>& votes);

void to_json(nlohmann::json& j, const PairwiseShare& s);
void to_json(nlohmann::json& j, const LikertShare& s);
void to_json(nlohmann::json& j, const ResultView& v);
void to_json(nlohmann::json& j, const StudyResult& r);

}  // namespace impact::study
