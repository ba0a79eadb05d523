#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "impact/corpus/store.hpp"
#include "impact/intent/types.hpp"
#include "impact/summarizer/types.hpp"

namespace impact::summarizer {

inline constexpr std::size_t kMaxContextChars = 600;
inline constexpr std::size_t kDefaultMaxPromptChars = 400'000;

/// Every context of `paper_id` with its classification, when one exists.
std::vector<EvidenceItem> evidence_for(const corpus::Corpus& corpus, const std::string& paper_id,
                                       const std::map<std::string, intent::ClassifiedCitation>& classified);

/// Filters candidates for a variant: nothing for none, every dated context
/// for all, dated impact-revealing contexts for impact_only. Undated contexts
/// never reach a time-stamped prompt. MissingInput when the variant needs a
/// classification or intent that a candidate lacks.
std::vector<EvidenceItem> select_evidence(const std::vector<EvidenceItem>& candidates, const PromptVariant& variant);

/// One rendered evidence line, e.g.
/// <citation ID: 3 | citation title: ... | citation year: 2004 | citation context: ... | citation intent: ...>
std::string format_evidence_line(const EvidenceRef& ref, bool include_intent);

struct SummaryPrompt {
  std::string text;
  std::vector<EvidenceRef> evidence_map;  // prompt order, ids 1..N
  TruncationManifest truncation;
};

/// Orders (chronologically or by seeded shuffle), numbers and renders the
/// evidence. When the prompt exceeds max_prompt_chars, contexts are cut to
/// 600 characters first, then lines are dropped one per citing year in
/// rotation starting from the oldest year until it fits.
/// PreconditionError for an undated or non-impact line where disallowed;
/// EmptyEvidence when a citation variant has nothing to show or nothing fits.
SummaryPrompt assemble_summary_prompt(const corpus::Paper& paper, const std::vector<EvidenceItem>& evidence,
                                      const PromptVariant& variant,
                                      std::size_t max_prompt_chars = kDefaultMaxPromptChars);

/// Author-level prompt over already generated paper summaries.
std::string build_author_prompt(const std::vector<ImpactSummary>& summaries);

/// The summary shape as a semi-structured block, as fed to the author prompt.
std::string render_summary_block(const ImpactSummary& summary);

}  // namespace impact::summarizer
