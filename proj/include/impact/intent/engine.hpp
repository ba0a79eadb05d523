#pragma once

#include <optional>
#include <string>
#include <vector>

#include "impact/corpus/types.hpp"
#include "impact/intent/types.hpp"
#include "impact/llm/gateway.hpp"

namespace impact::intent {

struct ParsedReply {
  std::string intent_text;
  IntentClass intent_class;
};

/// Reads "intent: ... | class: ..." from a model reply. The class is taken
/// from the text after the last "class:" marker, or from the last non-empty
/// line when no marker is present. Matching is case-insensitive and accepts
/// "impact-revealing" or "impact revealing"; negated forms ("non-impact",
/// "not impact") count as other. Returns nullopt when no single label is
/// recognizable.
std::optional<ParsedReply> parse_intent_reply(const std::string& reply);

/// Majority over an odd number of runs. Throws PreconditionError on an empty
/// or even-sized vote list.
VoteTally tally_votes(const std::vector<IntentClass>& votes);
IntentClass majority_class(const VoteTally& tally);

/// Combines per-run annotations. chosen_intent_text comes from the lowest
/// run_index that agrees with the majority.
ClassifiedCitation combine_runs(const std::string& context_id, std::vector<IntentAnnotation> runs);

/// Fraction of classified citations whose runs were unanimous.
double full_agreement_rate(const std::vector<ClassifiedCitation>& classified);

class IntentEngine {
 public:
  IntentEngine(llm::Gateway& gateway, std::string model_id, double temperature = 0.0)
      : gateway_(gateway), model_id_(std::move(model_id)), temperature_(temperature) {}

  /// One classification run. Shots are reshuffled per run from
  /// derive_seed(shuffle_seed, run_index). An unreadable reply gets one
  /// repair reprompt before ParseError.
  IntentAnnotation generate_intent(const std::string& context_id, const std::string& context_text,
                                   const IclConfig& config, int run_index);

  /// runs_per_context runs (sequential), majority vote.
  ClassifiedCitation classify_with_vote(const std::string& context_id, const std::string& context_text,
                                        const IclConfig& config);

  /// Parallel over contexts; output order follows the input.
  std::vector<ClassifiedCitation> classify_all(const std::vector<corpus::CitationContext>& contexts,
                                               const IclConfig& config, std::size_t workers = 8);

 private:
  llm::Gateway& gateway_;
  std::string model_id_;
  double temperature_;
};

}  // namespace impact::intent
