#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace impact::evaluator {

enum class Metric { insightfulness, trend_awareness, specificity };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);
const std::vector<Metric>& all_metrics();

struct FaithfulnessVerdict {
  std::size_t period_index = 0;
  std::string analysis;
  bool answer = false;             // yes / no
  std::vector<std::string> proof;  // empty iff answer is no
  bool judged = true;              // false when the period had no dated context to check

  bool operator==(const FaithfulnessVerdict&) const = default;
};

struct FaithfulnessResult {
  double score = 0.0;
  std::size_t yes = 0;
  std::size_t periods = 0;
  std::vector<FaithfulnessVerdict> verdicts;
  std::vector<std::string> judge_calls;  // request hashes, see the call log
};

struct ThemeCluster {
  int cluster_id = 0;
  std::string label;
  std::vector<std::string> member_intents;  // distinct texts
  std::size_t size = 0;                     // occurrences, duplicates included

  bool operator==(const ThemeCluster&) const = default;
};

struct CoverageResult {
  std::optional<double> ratio;     // absent without clusters
  std::optional<double> ratio_at_k;
  std::optional<int> k;
  std::vector<std::string> covered;         // cluster labels
  std::vector<std::string> dropped_labels;  // judge labels matching no cluster
  std::vector<std::string> judge_calls;  // request hashes, see the call log
};

struct InformativenessResult {
  double score = 0.0;
  std::string method;  // "logprobs" or "sampling"
  std::vector<double> samples;
  std::vector<std::string> judge_calls;  // request hashes, see the call log
};

struct EvalReport {
  std::string summary_id;
  std::string paper_id;
  std::string variant;
  std::optional<double> faithfulness;
  std::size_t faithfulness_yes = 0;
  std::size_t faithfulness_periods = 0;
  std::optional<double> coverage;
  std::optional<double> coverage_at_k;
  int k = 3;
  std::optional<double> year_compliance;
  double insightfulness = 0.0;
  double trend_awareness = 0.0;
  double specificity = 0.0;
  std::vector<FaithfulnessVerdict> verdicts;
  std::vector<std::string> judge_calls;  // request hashes in call order

  /// PreconditionError when a present score leaves [0, 1].
  void validate() const;
};

void to_json(nlohmann::json& j, const FaithfulnessVerdict& v);
void from_json(const nlohmann::json& j, FaithfulnessVerdict& v);
void to_json(nlohmann::json& j, const ThemeCluster& c);
void from_json(const nlohmann::json& j, ThemeCluster& c);
void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);

}  // namespace impact::evaluator
