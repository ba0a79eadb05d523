#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/corpus/store.hpp"
#include "impact/intent/types.hpp"
#include "impact/llm/gateway.hpp"
#include "impact/summarizer/prompt.hpp"
#include "impact/summarizer/types.hpp"

namespace impact::summarizer {

/// Reads "1997 - 2007", "2019–present", "2015 to 2018" or "2003". A period
/// ending in present/now/current ends at reference_year. Reversed bounds are
/// swapped. nullopt when no year can be read.
std::optional<std::pair<int, int>> parse_period(const std::string& label, int reference_year);

/// Turns a validated structured record into periods, sorted by start year.
/// Evidence ids that are not in the prompt's map are kept on the period and
/// listed in unresolved_evidence. SchemaViolation when a period has no
/// readable year or the list is empty.
ImpactSummary summary_from_record(const nlohmann::json& record, const corpus::Paper& paper,
                                  const PromptVariant& variant, const SummaryPrompt& prompt, int reference_year,
                                  const std::string& run_id, const std::string& raw_text);

/// Up to n papers by citation count, ties broken by paper id.
std::vector<corpus::Paper> select_top_cited(std::vector<corpus::Paper> papers, std::size_t n = 10);

struct SummarizerOptions {
  std::string model_id = "gpt-4o";
  double temperature = 0.0;
  int max_output_tokens = 4096;
  std::size_t max_prompt_chars = kDefaultMaxPromptChars;
  /// Year that "present" resolves to; defaults to the latest citing year.
  std::optional<int> present_year;
};

class Summarizer {
 public:
  Summarizer(llm::Gateway& gateway, SummarizerOptions options) : gateway_(gateway), options_(std::move(options)) {}

  /// Selects evidence from the candidates for the variant, builds the prompt
  /// and asks for a schema-constrained summary.
  ImpactSummary generate_summary(const corpus::Paper& paper, const std::vector<EvidenceItem>& candidates,
                                 const PromptVariant& variant, const std::string& run_id);

  /// Every (paper, variant) cell, parallel across cells. Output is paper
  /// major, variant minor, regardless of scheduling.
  std::vector<ImpactSummary> generate_grid(const corpus::Corpus& corpus,
                                           const std::map<std::string, intent::ClassifiedCitation>& classified,
                                           const std::vector<PromptVariant>& variants, const std::string& run_id,
                                           std::size_t workers = 8);

  /// One call over the serialized summaries; ids of all inputs become the
  /// sources. PreconditionError on an empty list.
  AuthorSummary aggregate_author(const std::string& author_id, const std::vector<ImpactSummary>& summaries);

 private:
  llm::Gateway& gateway_;
  SummarizerOptions options_;
};

}  // namespace impact::summarizer
