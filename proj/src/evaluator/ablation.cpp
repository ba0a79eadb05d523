#include "impact/evaluator/ablation.hpp"

#include <cstdio>
#include <set>

#include "impact/common/error.hpp"
#include "impact/evaluator/evaluator.hpp"

namespace impact::evaluator {

using nlohmann::json;

namespace {

std::string citations_label(summarizer::CitationMode m) {
  switch (m) {
    case summarizer::CitationMode::none: return "none";
    case summarizer::CitationMode::all: return "all";
    case summarizer::CitationMode::impact_only: return "impact-revealing";
  }
  return "?";
}

std::string intents_label(const summarizer::PromptVariant& v) {
  if (v.citations == summarizer::CitationMode::none) return "-";
  return v.include_intents ? "yes" : "no";
}

std::optional<double> mean_of(const std::vector<const EvalReport*>& rs, std::optional<double> EvalReport::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto* r : rs)
    if (r->*field) {
      sum += *(r->*field);
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

double mean_of(const std::vector<const EvalReport*>& rs, double EvalReport::*field) {
  double sum = 0.0;
  for (const auto* r : rs) sum += r->*field;
  return rs.empty() ? 0.0 : sum / static_cast<double>(rs.size());
}

std::vector<AblationRow> build_rows(const std::vector<std::pair<std::string, std::string>>& keys,
                                    const std::map<std::pair<std::string, std::string>, std::vector<const EvalReport*>>& cells) {
  std::vector<AblationRow> rows;
  for (const auto& key : keys) {
    const auto& rs = cells.at(key);
    AblationRow row;
    row.citations = key.first;
    row.intents = key.second;
    row.summaries = rs.size();
    std::vector<EvalReport> copies;
    for (const auto* r : rs) copies.push_back(*r);
    row.faithfulness = micro_faithfulness(copies);
    row.coverage = mean_of(rs, &EvalReport::coverage);
    row.coverage_at_k = mean_of(rs, &EvalReport::coverage_at_k);
    row.year_compliance = mean_of(rs, &EvalReport::year_compliance);
    row.insightfulness = mean_of(rs, &EvalReport::insightfulness);
    row.trend_awareness = mean_of(rs, &EvalReport::trend_awareness);
    row.specificity = mean_of(rs, &EvalReport::specificity);
    rows.push_back(row);
  }
  return rows;
}

std::string cell(std::optional<double> v) {
  if (!v) return "n/a";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

}  // namespace

AblationTable run_ablation(const std::vector<EvalReport>& reports, const std::vector<corpus::Paper>& papers,
                           const std::vector<summarizer::PromptVariant>& variants, int k) {
  std::map<std::pair<std::string, std::string>, const EvalReport*> index;
  for (const auto& r : reports)
    if (!index.emplace(std::pair(r.paper_id, r.variant), &r).second)
      throw PreconditionError("duplicate report for " + r.paper_id + " / " + r.variant);

  AblationTable table;
  table.k = k;
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& v : variants) {
    std::pair key(citations_label(v.citations), intents_label(v));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }

  using Cells = std::map<std::pair<std::string, std::string>, std::vector<const EvalReport*>>;
  Cells all;
  std::map<std::string, Cells> by_field;
  for (const auto& key : keys) all[key];
  for (const auto& p : papers) {
    auto& field_cells = by_field[corpus::to_string(p.field)];
    for (const auto& key : keys) field_cells[key];
    for (const auto& v : variants) {
      auto it = index.find({p.paper_id, v.name()});
      if (it == index.end()) throw MissingCell(p.paper_id, v.name());
      std::pair key(citations_label(v.citations), intents_label(v));
      all[key].push_back(it->second);
      field_cells[key].push_back(it->second);
    }
  }
  table.rows = build_rows(keys, all);
  for (const auto& [field, cells] : by_field) table.per_field[field] = build_rows(keys, cells);
  return table;
}

std::string render_rows(const std::vector<AblationRow>& rows, int k) {
  const std::vector<std::string> head = {"Citations", "Intents", "Faith.", "Cov.", "Cov.@" + std::to_string(k),
                                         "Cyc.",      "Insi.",   "Trend.", "Spec."};
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows)
    body.push_back({r.citations, r.intents, cell(r.faithfulness), cell(r.coverage), cell(r.coverage_at_k),
                    cell(r.year_compliance), cell(r.insightfulness), cell(r.trend_awareness), cell(r.specificity)});
  std::vector<std::size_t> width;
  for (const auto& h : head) width.push_back(h.size());
  for (const auto& b : body)
    for (std::size_t i = 0; i < b.size(); ++i) width[i] = std::max(width[i], b[i].size());

  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += " | ";
      out += cells[i] + std::string(width[i] - cells[i].size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(head);
  std::string rule;
  for (std::size_t i = 0; i < width.size(); ++i) rule += (i ? "-+-" : "") + std::string(width[i], '-');
  out += rule + "\n";
  for (const auto& b : body) out += line(b);
  return out;
}

std::string render_ablation(const AblationTable& table) {
  std::string out = render_rows(table.rows, table.k);
  for (const auto& [field, rows] : table.per_field) out += "\n[" + field + "]\n" + render_rows(rows, table.k);
  return out;
}

void to_json(json& j, const AblationRow& r) {
  j = {{"citations", r.citations},
       {"intents", r.intents},
       {"summaries", r.summaries},
       {"faithfulness", opt(r.faithfulness)},
       {"coverage", opt(r.coverage)},
       {"coverage_at_k", opt(r.coverage_at_k)},
       {"year_compliance", opt(r.year_compliance)},
       {"insightfulness", r.insightfulness},
       {"trend_awareness", r.trend_awareness},
       {"specificity", r.specificity}};
}

void to_json(json& j, const AblationTable& t) {
  j = {{"k", t.k}, {"rows", t.rows}, {"per_field", t.per_field}};
}

}  // namespace impact::evaluator
