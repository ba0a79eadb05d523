#include "impact/intent/types.hpp"

#include "impact/common/error.hpp"

namespace impact::intent {

std::string to_string(IntentClass c) { return c == IntentClass::impact_revealing ? "impact_revealing" : "other"; }

IntentClass class_from_string(const std::string& s) {
  if (s == "impact_revealing" || s == "impact-revealing") return IntentClass::impact_revealing;
  if (s == "other") return IntentClass::other;
  throw PreconditionError("unknown intent class '" + s + "'");
}

std::string prompt_label(IntentClass c) { return c == IntentClass::impact_revealing ? "impact-revealing" : "other"; }

void IclConfig::validate() const {
  if (k < 0) throw ConfigError("k must be >= 0");
  if (static_cast<std::size_t>(k) > example_pool.size())
    throw ConfigError("k=" + std::to_string(k) + " exceeds example pool of " + std::to_string(example_pool.size()));
  if (runs_per_context < 1) throw ConfigError("runs_per_context must be >= 1");
}

void to_json(nlohmann::json& j, const IclExample& e) {
  j = {{"context_text", e.context_text}, {"intent_text", e.intent_text}, {"intent_class", to_string(e.intent_class)}};
}

void from_json(const nlohmann::json& j, IclExample& e) {
  e.context_text = j.at("context_text").get<std::string>();
  e.intent_text = j.at("intent_text").get<std::string>();
  e.intent_class = class_from_string(j.at("intent_class").get<std::string>());
}

void to_json(nlohmann::json& j, const IntentAnnotation& a) {
  j = {{"context_id", a.context_id},
       {"intent_text", a.intent_text},
       {"intent_class", to_string(a.intent_class)},
       {"run_index", a.run_index}};
}

void from_json(const nlohmann::json& j, IntentAnnotation& a) {
  a.context_id = j.at("context_id").get<std::string>();
  a.intent_text = j.at("intent_text").get<std::string>();
  a.intent_class = class_from_string(j.at("intent_class").get<std::string>());
  a.run_index = j.at("run_index").get<int>();
}

void to_json(nlohmann::json& j, const ClassifiedCitation& c) {
  j = {{"context_id", c.context_id},
       {"final_class", to_string(c.final_class)},
       {"vote_tally", {{"impact_votes", c.vote_tally.impact_votes}, {"other_votes", c.vote_tally.other_votes}}},
       {"chosen_intent_text", c.chosen_intent_text},
       {"runs", c.runs}};
}

void from_json(const nlohmann::json& j, ClassifiedCitation& c) {
  c.context_id = j.at("context_id").get<std::string>();
  c.final_class = class_from_string(j.at("final_class").get<std::string>());
  c.vote_tally.impact_votes = j.at("vote_tally").at("impact_votes").get<int>();
  c.vote_tally.other_votes = j.at("vote_tally").at("other_votes").get<int>();
  c.chosen_intent_text = j.at("chosen_intent_text").get<std::string>();
  c.runs = j.value("runs", std::vector<IntentAnnotation>{});
}

void to_json(nlohmann::json& j, const ClassifierMetrics& m) {
  j = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"accuracy", m.accuracy},
       {"tp", m.tp},               {"fp", m.fp},         {"fn", m.fn}, {"tn", m.tn}};
}

}  // namespace impact::intent
