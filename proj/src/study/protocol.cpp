#include "impact/study/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "impact/common/error.hpp"
#include "impact/common/random.hpp"
#include "impact/common/text.hpp"

namespace impact::study {

using nlohmann::json;

namespace {

std::string task_id(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "t%04zu", n);
  return buf;
}

std::string variant_of(const Study& study, const std::string& summary_id) {
  return study.summaries.at(summary_id).variant.name();
}

json periods_of(const summarizer::ImpactSummary& s) {
  json out = json::array();
  for (const auto& p : s.periods)
    out.push_back({{"start_year", p.start_year},
                   {"end_year", p.end_year},
                   {"aspect", p.aspect},
                   {"description", p.description},
                   {"evidence_count", p.evidence.size()}});
  return out;
}

}  // namespace

Study create_study(const std::string& study_id, const std::vector<StudyPaper>& papers,
                   const std::vector<summarizer::ImpactSummary>& summaries, const std::string& variant_a,
                   const std::string& variant_b, const std::vector<Statement>& statements, std::uint64_t seed) {
  if (variant_a == variant_b) throw ConfigError("a study compares two different variants");
  Study study;
  study.study_id = study_id;
  study.variant_a = variant_a;
  study.variant_b = variant_b;
  study.papers = papers;
  study.statements = statements;

  std::map<std::pair<std::string, std::string>, const summarizer::ImpactSummary*> by_cell;
  for (const auto& s : summaries) by_cell[{s.paper_id, s.variant.name()}] = &s;
  std::map<std::string, std::string> token_of;
  std::vector<std::pair<std::string, std::string>> pair_ids;  // (a, b) summary ids per paper
  for (const auto& p : papers) {
    std::pair<std::string, std::string> ids;
    for (const auto* v : {&variant_a, &variant_b}) {
      auto it = by_cell.find({p.paper_id, *v});
      if (it == by_cell.end()) throw MissingSummary(p.paper_id, *v);
      study.summaries[it->second->summary_id] = *it->second;
      (v == &variant_a ? ids.first : ids.second) = it->second->summary_id;
    }
    pair_ids.push_back(ids);
    if (!token_of.count(p.owner)) {
      const auto token = "r-" + text::sha256_hex(std::to_string(seed) + "|" + study_id + "|" + p.owner).substr(0, 20);
      token_of[p.owner] = token;
      study.raters[token] = p.owner;
    }
  }

  std::size_t pairwise_index = 0;
  for (auto criterion : {Criterion::relevance, Criterion::insightfulness}) {
    for (std::size_t i = 0; i < papers.size(); ++i, ++pairwise_index) {
      StudyTask t;
      t.task_id = task_id(study.tasks.size() + 1);
      t.kind = TaskKind::pairwise;
      t.paper_id = papers[i].paper_id;
      t.criterion = criterion;
      const bool a_left = pairwise_index % 2 == 0;
      t.left_summary_id = a_left ? pair_ids[i].first : pair_ids[i].second;
      t.right_summary_id = a_left ? pair_ids[i].second : pair_ids[i].first;
      t.assigned_rater = token_of.at(papers[i].owner);
      study.tasks.push_back(std::move(t));
    }
  }
  for (std::size_t i = 0; i < papers.size(); ++i) {
    for (const auto& st : statements) {
      StudyTask t;
      t.task_id = task_id(study.tasks.size() + 1);
      t.kind = TaskKind::likert;
      t.paper_id = papers[i].paper_id;
      t.left_summary_id = pair_ids[i].second;
      t.statement_id = st.statement_id;
      t.assigned_rater = token_of.at(papers[i].owner);
      study.tasks.push_back(std::move(t));
    }
  }
  return study;
}

void validate_vote(const Study& study, const Vote& vote) {
  const auto* task = study.find_task(vote.task_id);
  if (!task) throw UnknownTask(vote.task_id);
  if (task->assigned_rater != vote.rater_id)
    throw PreconditionError("rater is not assigned to task " + vote.task_id);
  if (task->kind == TaskKind::pairwise) {
    if (!vote.choice || vote.likert) throw PreconditionError("a pairwise vote carries exactly one choice");
  } else {
    if (!vote.likert || vote.choice) throw PreconditionError("a likert vote carries exactly one value");
    if (*vote.likert < 1 || *vote.likert > 5) throw InvalidLikert(*vote.likert);
  }
}

json task_payload(const Study& study, const StudyTask& task) {
  const auto* paper = study.find_paper(task.paper_id);
  json out = {{"task_id", task.task_id}, {"kind", to_string(task.kind)}, {"paper_title", paper ? paper->title : ""}};
  if (task.kind == TaskKind::pairwise) {
    out["criterion"] = to_string(*task.criterion);
    out["summaries"] = json::array({{{"label", "Summary 1"}, {"periods", periods_of(study.summaries.at(task.left_summary_id))}},
                                    {{"label", "Summary 2"}, {"periods", periods_of(study.summaries.at(task.right_summary_id))}}});
    out["choices"] = {"left", "right"};
  } else {
    const auto* st = study.find_statement(task.statement_id);
    out["statement"] = st ? st->text : "";
    out["scale"] = {{"min", 1}, {"max", 5}};
    out["summary"] = {{"label", "Summary"}, {"periods", periods_of(study.summaries.at(task.left_summary_id))}};
  }
  return out;
}

std::vector<std::string> top_decile(const std::vector<StudyPaper>& papers, int StudyPaper::*count) {
  std::vector<const StudyPaper*> sorted;
  for (const auto& p : papers) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [&](const StudyPaper* a, const StudyPaper* b) {
    if (a->*count != b->*count) return a->*count > b->*count;
    return a->paper_id < b->paper_id;
  });
  const auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(papers.size()) * 0.1));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n && i < sorted.size(); ++i) out.push_back(sorted[i]->paper_id);
  return out;
}

StudyResult aggregate_results(const Study& study, const std::vector<Vote>& votes) {
  if (votes.empty()) throw NoVotes();
  StudyResult result;
  result.total_votes = votes.size();

  std::map<std::string, std::vector<std::string>> members;
  for (const auto& p : study.papers) members["all"].push_back(p.paper_id);
  members["top10_impact_revealing"] = top_decile(study.papers, &StudyPaper::impact_revealing_count);
  members["top10_citations"] = top_decile(study.papers, &StudyPaper::citation_count);

  for (const auto& [name, ids] : members) {
    const std::set<std::string> in(ids.begin(), ids.end());
    ResultView view;
    view.paper_ids = ids;
    std::map<std::string, std::map<std::string, std::size_t>> wins;  // criterion -> variant -> wins
    for (const auto& v : votes) {
      const auto* task = study.find_task(v.task_id);
      if (!task || !in.count(task->paper_id)) continue;
      if (task->kind == TaskKind::pairwise && v.choice) {
        const auto& winner = *v.choice == Side::left ? task->left_summary_id : task->right_summary_id;
        wins[to_string(*task->criterion)][variant_of(study, winner)]++;
      } else if (task->kind == TaskKind::likert && v.likert) {
        auto& share = view.likert[task->statement_id];
        share.votes++;
        share.counts[*v.likert]++;
      }
    }
    for (const auto& [criterion, tally] : wins) {
      PairwiseShare share;
      for (const auto& [variant, n] : tally) share.votes += n;
      const double a = 100.0 * static_cast<double>(tally.count(study.variant_a) ? tally.at(study.variant_a) : 0) /
                       static_cast<double>(share.votes);
      share.win_pct[study.variant_a] = a;
      share.win_pct[study.variant_b] = 100.0 - a;
      view.pairwise[criterion] = share;
    }
    for (auto& [id, share] : view.likert) {
      for (int level = 1; level <= 5; ++level) share.counts.emplace(level, 0);
      share.agree_pct = 100.0 * static_cast<double>(share.counts[4] + share.counts[5]) / static_cast<double>(share.votes);
    }
    result.views[name] = std::move(view);
  }
  return result;
}

void to_json(json& j, const PairwiseShare& s) { j = {{"votes", s.votes}, {"win_pct", s.win_pct}}; }

void to_json(json& j, const LikertShare& s) {
  json counts = json::object();
  for (const auto& [level, n] : s.counts) counts[std::to_string(level)] = n;
  j = {{"votes", s.votes}, {"counts", counts}, {"agree_pct", s.agree_pct}};
}

void to_json(json& j, const ResultView& v) {
  j = {{"paper_ids", v.paper_ids}, {"pairwise", v.pairwise}, {"likert", v.likert}};
}

void to_json(json& j, const StudyResult& r) { j = {{"total_votes", r.total_votes}, {"views", r.views}}; }

}  // namespace impact::study
