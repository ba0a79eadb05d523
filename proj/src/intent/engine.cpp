#include "impact/intent/engine.hpp"

#include <regex>

#include "impact/common/error.hpp"
#include "impact/common/parallel.hpp"
#include "impact/common/random.hpp"
#include "impact/common/text.hpp"
#include "impact/intent/prompt.hpp"

namespace impact::intent {

namespace {

std::string last_nonempty_line(const std::string& s) {
  auto lines = text::split_lines(s);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it)
    if (!text::trim(*it).empty()) return text::trim(*it);
  return {};
}

std::optional<IntentClass> detect_class(const std::string& fragment) {
  static const std::regex negated(R"(\b(non|not|no)[\s-]+impact)", std::regex::icase);
  static const std::regex impact(R"(\bimpact[\s-]+revealing\b)", std::regex::icase);
  static const std::regex other(R"(\bother\b)", std::regex::icase);
  const bool neg = std::regex_search(fragment, negated);
  const bool imp = !neg && std::regex_search(fragment, impact);
  const bool oth = neg || std::regex_search(fragment, other);
  if (imp == oth) return std::nullopt;
  return imp ? IntentClass::impact_revealing : IntentClass::other;
}

}  // namespace

std::optional<ParsedReply> parse_intent_reply(const std::string& reply) {
  const std::string lower = text::to_lower_ascii(reply);
  std::string class_fragment;
  if (auto pos = lower.rfind("class:"); pos != std::string::npos) {
    class_fragment = reply.substr(pos + 6);
    if (auto nl = class_fragment.find('\n'); nl != std::string::npos) class_fragment.resize(nl);
  } else {
    class_fragment = last_nonempty_line(reply);
  }
  auto cls = detect_class(class_fragment);
  if (!cls) return std::nullopt;

  ParsedReply out{{}, *cls};
  if (auto pos = lower.rfind("intent:"); pos != std::string::npos) {
    std::string rest = reply.substr(pos + 7);
    auto stop = rest.find_first_of("|\n");
    if (stop != std::string::npos) rest.resize(stop);
    out.intent_text = text::trim(rest);
  }
  return out;
}

VoteTally tally_votes(const std::vector<IntentClass>& votes) {
  if (votes.empty() || votes.size() % 2 == 0)
    throw PreconditionError("majority vote needs an odd number of runs, got " + std::to_string(votes.size()));
  VoteTally t;
  for (auto v : votes) (v == IntentClass::impact_revealing ? t.impact_votes : t.other_votes)++;
  return t;
}

IntentClass majority_class(const VoteTally& tally) {
  return tally.impact_votes > tally.other_votes ? IntentClass::impact_revealing : IntentClass::other;
}

ClassifiedCitation combine_runs(const std::string& context_id, std::vector<IntentAnnotation> runs) {
  std::vector<IntentClass> votes;
  for (const auto& r : runs) votes.push_back(r.intent_class);
  ClassifiedCitation out;
  out.context_id = context_id;
  out.vote_tally = tally_votes(votes);
  out.final_class = majority_class(out.vote_tally);
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.run_index < b.run_index; });
  for (const auto& r : runs)
    if (r.intent_class == out.final_class) {
      out.chosen_intent_text = r.intent_text;
      break;
    }
  out.runs = std::move(runs);
  return out;
}

double full_agreement_rate(const std::vector<ClassifiedCitation>& classified) {
  if (classified.empty()) return 0.0;
  std::size_t unanimous = 0;
  for (const auto& c : classified)
    if (c.vote_tally.impact_votes == 0 || c.vote_tally.other_votes == 0) ++unanimous;
  return static_cast<double>(unanimous) / static_cast<double>(classified.size());
}

IntentAnnotation IntentEngine::generate_intent(const std::string& context_id, const std::string& context_text,
                                               const IclConfig& config, int run_index) {
  IclConfig run_config = config;
  run_config.shuffle_seed = derive_seed(config.shuffle_seed, static_cast<std::uint64_t>(run_index));

  llm::ChatRequest request;
  request.model_id = model_id_;
  request.temperature = temperature_;
  request.max_output_tokens = 128;
  request.messages = {{llm::Role::user, build_icl_prompt(run_config, context_text)}};

  auto reply = gateway_.complete(request).text;
  auto parsed = parse_intent_reply(reply);
  if (!parsed) {
    request.messages.push_back({llm::Role::assistant, reply});
    request.messages.push_back(
        {llm::Role::user,
         "The class label could not be read from your answer. Reply with exactly one line in the form: "
         "intent: <a few words> | class: <impact-revealing or other>"});
    reply = gateway_.complete(request).text;
    parsed = parse_intent_reply(reply);
    if (!parsed) throw ParseError("no class label in reply for context " + context_id, reply);
  }
  return {context_id, parsed->intent_text, parsed->intent_class, run_index};
}

ClassifiedCitation IntentEngine::classify_with_vote(const std::string& context_id, const std::string& context_text,
                                                    const IclConfig& config) {
  config.validate();
  if (config.runs_per_context % 2 == 0) throw ConfigError("runs_per_context must be odd for voting");
  std::vector<IntentAnnotation> runs;
  for (int r = 0; r < config.runs_per_context; ++r) runs.push_back(generate_intent(context_id, context_text, config, r));
  return combine_runs(context_id, std::move(runs));
}

std::vector<ClassifiedCitation> IntentEngine::classify_all(const std::vector<corpus::CitationContext>& contexts,
                                                           const IclConfig& config, std::size_t workers) {
  config.validate();
  if (config.runs_per_context % 2 == 0) throw ConfigError("runs_per_context must be odd for voting");
  std::vector<ClassifiedCitation> out(contexts.size());
  parallel_for(contexts.size(), workers, [&](std::size_t i) {
    out[i] = classify_with_vote(contexts[i].context_id, contexts[i].text, config);
  });
  return out;
}

}  // namespace impact::intent
