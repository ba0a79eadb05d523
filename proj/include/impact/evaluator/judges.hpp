#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impact/corpus/types.hpp"
#include "impact/evaluator/types.hpp"
#include "impact/llm/types.hpp"
#include "impact/summarizer/types.hpp"

namespace impact::evaluator {

/// Judge prompt texts, read from prompts/eval at runtime.
struct EvalPrompts {
  std::string faithfulness;      // {{PAPER_NAME}}, {{DESCRIPTION}}, {{SOURCES}}
  std::string coverage_cluster;  // $listOfPhrases$
  std::string coverage_judge;    // $listOfThemes$, $summary$
  std::string geval;             // $title$, $year$, $metric$, $steps$, $summary$
  std::map<Metric, std::string> metric_names;
  std::map<Metric, std::vector<std::string>> steps;

  /// MissingInput for an absent file, ConfigError for a template that lacks
  /// one of its placeholders or a metric file without steps.
  static EvalPrompts load(const std::filesystem::path& dir);
  static std::filesystem::path default_dir();
};

/// Replaces each key with its value in one left-to-right pass, so inserted
/// text is never rescanned.
std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& values);

/// Python-style list literal of strings, e.g. ['a', "b's"].
std::string python_list(const std::vector<std::string>& items);

/// Plain-text rendering of a summary for judges: title line, then one block
/// per period with its years, aspect and description.
std::string render_summary_text(const summarizer::ImpactSummary& summary);

/// Period years, aspect and description as the faithfulness judge sees them.
std::string render_period_description(const summarizer::ImpactPeriod& period);

/// Dated contexts with start <= citing_year <= end, sorted by year, title and
/// text so the result does not depend on input order.
std::vector<corpus::CitationContext> contexts_in_period(const std::vector<corpus::CitationContext>& contexts,
                                                        const summarizer::ImpactPeriod& period);

/// `<title>:citation_text`, one per line.
std::string format_sources(const std::vector<corpus::CitationContext>& bucket);

/// Reads <analysis>, <answer> and <proof>. A yes needs at least one proof
/// entry; a no clears the proof. On failure returns nullopt and sets problem.
std::optional<FaithfulnessVerdict> parse_faithfulness_reply(const std::string& reply, std::size_t period_index,
                                                            std::string& problem);

/// Last "Score: n" in the reply, n in [0, 10].
std::optional<double> parse_score(const std::string& reply);

/// Probability-weighted score over the alternatives of the score token (the
/// first integer token after the last "Score"), restricted to 0..10.
std::optional<double> logprob_score(const std::vector<llm::TokenLogprob>& tokens);

}  // namespace impact::evaluator
