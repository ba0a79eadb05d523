#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace impact::intent {

enum class IntentClass { impact_revealing, other };

/// "impact_revealing" / "other" in stored records.
std::string to_string(IntentClass c);
IntentClass class_from_string(const std::string& s);

/// The label as the model sees it: "impact-revealing" / "other".
std::string prompt_label(IntentClass c);

struct IclExample {
  std::string context_text;
  std::string intent_text;
  IntentClass intent_class = IntentClass::other;

  bool operator==(const IclExample&) const = default;
};

struct IclConfig {
  int k = 50;
  std::uint64_t shuffle_seed = 0;
  int runs_per_context = 3;
  std::vector<IclExample> example_pool;

  /// ConfigError on k < 0, k > pool size or runs < 1.
  void validate() const;
};

struct IntentAnnotation {
  std::string context_id;
  std::string intent_text;
  IntentClass intent_class = IntentClass::other;
  int run_index = 0;

  bool operator==(const IntentAnnotation&) const = default;
};

struct VoteTally {
  int impact_votes = 0;
  int other_votes = 0;
  bool operator==(const VoteTally&) const = default;
};

struct ClassifiedCitation {
  std::string context_id;
  IntentClass final_class = IntentClass::other;
  VoteTally vote_tally;
  std::string chosen_intent_text;
  std::vector<IntentAnnotation> runs;

  bool operator==(const ClassifiedCitation&) const = default;
};

struct ClassifierMetrics {
  double precision = 0, recall = 0, f1 = 0, accuracy = 0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

void to_json(nlohmann::json& j, const IclExample& e);
void from_json(const nlohmann::json& j, IclExample& e);
void to_json(nlohmann::json& j, const IntentAnnotation& a);
void from_json(const nlohmann::json& j, IntentAnnotation& a);
void to_json(nlohmann::json& j, const ClassifiedCitation& c);
void from_json(const nlohmann::json& j, ClassifiedCitation& c);
void to_json(nlohmann::json& j, const ClassifierMetrics& m);

}  // namespace impact::intent
