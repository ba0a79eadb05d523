#include "impact/intent/prompt.hpp"

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/random.hpp"
#include "impact/common/text.hpp"

namespace impact::intent {

namespace {

constexpr const char* kInstructions =
    R"(A citation context in a scientific paper refers to the specific part of a paper p' where another paper p is mentioned, including the surrounding sentences or paragraphs that explains how and why p is relevant to p'.

A citation context with an impact-revealing intent is a type of citation in scientific writing that highlights the significance or influence of a previously published work, often emphasizing its contribution or importance to the current research or the broader field, e.g., its role in inspiring, motivating, supporting, filling gaps, critically analyzing, or contributing methods, tools, data, extensions, or benchmarks for the current research.
Other types of intents include a reference to prior work in a scientific paper that provides background or context without emphasizing the impact, significance, or influence of the cited work. It acknowledges the source in a routine or supporting role rather than showcasing its importance to the research.
Given a citation context, describe, in a few words, the intention behind this citation phrase. Then, decide on the category of this intention. In particular, whether the intention behind this citation phrase is impact-revealing or not (i.e., incidental or that there isn't enough information to realize the real intention behind it). For the intention category, only return one of the following two labels impact-revealing or other.)";

std::vector<IclExample> make_seed_pool() {
  using C = IntentClass;
  return {
      {"In order to reduce the memory requirements, we apply a minimization process [1].",
       "use of minimization methodology", C::impact_revealing},
      {"Motor adaptation is the process of re-shaping acquired motor skills through the reduction of errors "
       "(Hardwick and Celnik, 2014; Krakauer, 2009)",
       "defines the term motor adaptation", C::other},
      {"Moreover, none of the above studies explored whether temporally primary PLEs are associated with an "
       "increased risk of subsequent insomnia [1,2].. In this study, we explored the changes in prevalence of "
       "insomnia and PLEs before and during the pandemic.",
       "identifying and addressing knowledge gap in literature", C::impact_revealing},
      {"Chiu and Nichols (2016) introduced convolutional neural networks for NER", "background about NER methods",
       C::other},
      {"We employ the single-link method to compute the similarity be-tween two clusters, which has been applied "
       "widely in prior research (Bagga and Baldwin (1998); Mann and Yarowsky (2003))",
       "use of cluster similarity methods", C::impact_revealing},
      {"Quirk and Poon (2017) and Peng et al. (2017) build two distantly supervised datasets without human "
       "annotation, which may make the evaluation less reliable. In this paper, we present DocRED, a large-scale "
       "human-annotated document-level RE dataset..",
       "criticizing existing datasets and proposing a better one", C::impact_revealing},
      {"In adults with severe malaria, increased Ang-2 plasma levels were associated with a decrease in NO "
       "bioavailability, higher lactate plasma concentrations, and patient mortality [101].",
       "reporting on existing studies about malaria", C::other},
      {", similarity measures [3]) to select an answer.", "not enough information", C::other},
      {"Inspired by the reference [4], we proposed a novel algorithm called Soft-DDQN and applied it to the robot "
       "PAP skill learning problem",
       "drawing inspiration from prior work to propose a new algorithm", C::impact_revealing},
      {"For instance, while Yoon et al. (2018) show that expanding the network capacity thorough width is helpful, "
       "they have not studied the impact of increasing capacity when the depth increases, nor why increasing the "
       "width is helpful. Overall, in this work, we are interested in understanding the impacts of network "
       "structure (e.g., width and depth)..",
       "highlighting gaps in existing research on network capacity", C::impact_revealing},
  };
}

}  // namespace

const std::vector<IclExample>& seed_pool() {
  static const std::vector<IclExample> pool = make_seed_pool();
  return pool;
}

std::vector<IclExample> load_pool(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingInput("example pool not found: " + path.string());
  auto pool = load_records<IclExample>(path);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (text::word_count(pool[i].intent_text) > 15)
      throw CorruptRecord(i + 1, "intent longer than 15 words: " + pool[i].intent_text);
    if (text::trim(pool[i].context_text).empty()) throw CorruptRecord(i + 1, "empty context text");
  }
  return pool;
}

std::vector<IclExample> select_shots(const IclConfig& config) {
  config.validate();
  std::vector<IclExample> shuffled = config.example_pool;
  seeded_shuffle(shuffled, config.shuffle_seed);
  shuffled.resize(static_cast<std::size_t>(config.k));
  return shuffled;
}

std::string format_answer(const std::string& intent_text, IntentClass c) {
  return "intent: " + intent_text + " | class: " + prompt_label(c);
}

std::string build_icl_prompt(const IclConfig& config, const std::string& context_text) {
  const auto shots = select_shots(config);
  std::string prompt = kInstructions;
  prompt += "\n";
  if (!shots.empty()) {
    prompt += "Below are examples:\n";
    for (const auto& ex : shots) {
      prompt += "\nCitation context: " + text::collapse_whitespace(ex.context_text) + "\n";
      prompt += "Answer: " + format_answer(ex.intent_text, ex.intent_class) + "\n";
    }
  }
  prompt += "\n";
  prompt += kTargetMarker;
  prompt += " " + text::collapse_whitespace(context_text) + "\n";
  prompt += "Answer on one line in the form: intent: <a few words> | class: <impact-revealing or other>\n";
  return prompt;
}

}  // namespace impact::intent
