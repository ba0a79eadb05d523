#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impact/corpus/store.hpp"
#include "impact/evaluator/judges.hpp"
#include "impact/evaluator/types.hpp"
#include "impact/intent/types.hpp"
#include "impact/llm/gateway.hpp"
#include "impact/summarizer/types.hpp"

namespace impact::evaluator {

/// Share of dated evidence citations whose citing year falls inside the
/// period that cites them. Absent when the summary cites no dated evidence.
std::optional<double> eval_year_compliance(const summarizer::ImpactSummary& summary);

/// Micro average over every judged period description.
std::optional<double> micro_faithfulness(const std::vector<EvalReport>& reports);

/// Turns a clustering reply into clusters over `intents`. Phrases are matched
/// to intents by normalized text; unknown phrases are dropped and a phrase is
/// kept only in the first cluster naming it. Intents left over become
/// singleton clusters. Clusters are ordered by size (largest first), then
/// label, and numbered from 1.
std::vector<ThemeCluster> clusters_from_reply(const nlohmann::json& reply, const std::vector<std::string>& intents);

/// The k largest clusters (all when fewer).
std::vector<ThemeCluster> top_clusters(const std::vector<ThemeCluster>& clusters, std::size_t k);

/// |covered| / |clusters|, and |covered within the k largest| / k.
CoverageResult coverage_from_labels(const std::vector<ThemeCluster>& clusters, const std::vector<std::string>& labels,
                                    std::optional<int> k);

struct EvaluatorOptions {
  std::string model_id = "gpt-4o";
  double temperature = 0.0;
  int k = 3;
  int samples = 5;               // sampling fallback for informativeness
  double sample_temperature = 1.0;
  std::uint64_t seed = 0;
  bool use_logprobs = true;      // when the provider offers them
  std::filesystem::path prompts_dir = EvalPrompts::default_dir();
};

class Evaluator {
 public:
  Evaluator(llm::Gateway& gateway, EvaluatorOptions options);

  /// One judge call per period over the contexts dated inside it. A period
  /// with no such context is a "no" without a call.
  FaithfulnessResult eval_faithfulness(const summarizer::ImpactSummary& summary,
                                       const std::vector<corpus::CitationContext>& contexts);

  /// PreconditionError on an empty list.
  std::vector<ThemeCluster> cluster_intents(const std::vector<std::string>& intent_texts);

  CoverageResult eval_coverage(const summarizer::ImpactSummary& summary, const std::vector<ThemeCluster>& clusters,
                               std::optional<int> k);

  InformativenessResult eval_informativeness(const summarizer::ImpactSummary& summary, Metric metric);

  /// Every metric for one summary. `clusters` may be empty (no
  /// impact-revealing intents), which leaves coverage absent.
  EvalReport evaluate(const summarizer::ImpactSummary& summary, const std::vector<corpus::CitationContext>& contexts,
                      const std::vector<ThemeCluster>& clusters);

  /// Clusters each paper's impact-revealing intents once, then evaluates the
  /// summaries in parallel. Output order follows the input.
  std::vector<EvalReport> evaluate_all(const std::vector<summarizer::ImpactSummary>& summaries,
                                       const corpus::Corpus& corpus,
                                       const std::map<std::string, intent::ClassifiedCitation>& classified,
                                       std::size_t workers = 8);

  const EvalPrompts& prompts() const { return prompts_; }

 private:
  llm::ChatRequest request(const std::string& prompt) const;

  llm::Gateway& gateway_;
  EvaluatorOptions options_;
  EvalPrompts prompts_;
};

}  // namespace impact::evaluator
