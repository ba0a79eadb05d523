#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/corpus/types.hpp"
#include "impact/evaluator/types.hpp"
#include "impact/summarizer/types.hpp"

namespace impact::evaluator {

/// One table row: a citation mode and intent setting, both orderings pooled.
struct AblationRow {
  std::string citations;  // none | all | impact-revealing
  std::string intents;    // yes | no | -
  std::size_t summaries = 0;
  std::optional<double> faithfulness;  // micro average over period descriptions
  std::optional<double> coverage;
  std::optional<double> coverage_at_k;
  std::optional<double> year_compliance;  // absent renders as n/a
  double insightfulness = 0.0;
  double trend_awareness = 0.0;
  double specificity = 0.0;
};

struct AblationTable {
  int k = 3;
  std::vector<AblationRow> rows;
  std::map<std::string, std::vector<AblationRow>> per_field;  // field name -> rows
};

/// Every (paper, variant) cell must have a report, else MissingCell. Rows
/// follow the first appearance of each (citations, intents) pair in
/// `variants`; per-field tables cover the fields present among `papers`.
AblationTable run_ablation(const std::vector<EvalReport>& reports, const std::vector<corpus::Paper>& papers,
                           const std::vector<summarizer::PromptVariant>& variants, int k = 3);

/// Fixed-width text table with the columns
/// Citations | Intents | Faith. | Cov. | Cov.@k | Cyc. | Insi. | Trend. | Spec.
std::string render_rows(const std::vector<AblationRow>& rows, int k);

/// Main table followed by one sub-table per field.
std::string render_ablation(const AblationTable& table);

void to_json(nlohmann::json& j, const AblationRow& r);
void to_json(nlohmann::json& j, const AblationTable& t);

}  // namespace impact::evaluator
