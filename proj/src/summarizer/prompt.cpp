#include "impact/summarizer/prompt.hpp"

#include <algorithm>
#include <set>

#include "impact/common/error.hpp"
#include "impact/common/random.hpp"
#include "impact/common/text.hpp"

namespace impact::summarizer {

namespace {

constexpr const char* kOpening =
    "The scientific impact summary of a research paper describes the impact a given paper had on other papers, "
    "including both praise and critique. To understand the impact of a paper, one needs to understand how exactly "
    "it has been utilized and discussed by other papers. This is normally referred to as citation intents. One also "
    "needs to understand the evolution of the impact and citation intents over time.";

constexpr const char* kClosing = "Generate an impact summary about the input paper.";

constexpr const char* kAuthorOpening =
    "The scientific impact of a researcher can be inferred from the impact of their publications and how they have "
    "been used by others.\n"
    "Given a list of impact summaries about papers of a certain researcher, summarize their overall impact, and its "
    "evolution over time.";

constexpr const char* kAuthorClosing =
    "Generate an impact summary that describes the overall impact of their papers. Focus more on how their papers "
    "have been used than what the content of their papers was.";

// Cuts at a character boundary so the result stays valid UTF-8.
std::string cut_utf8(const std::string& s, std::size_t max_chars) {
  std::size_t chars = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) continue;
    if (chars == max_chars) return s.substr(0, i);
    ++chars;
  }
  return s;
}

std::size_t utf8_length(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string render(const corpus::Paper& paper, const PromptVariant& variant, const std::vector<std::string>& lines) {
  std::string out = kOpening;
  out += "\n";
  if (variant.citations == CitationMode::none) {
    out += "Given an input paper's title and its publication year, describe the impact of that paper.\n\n";
    out += "Consider the input paper with id " + paper.paper_id + " titled " + paper.title + " published in " +
           std::to_string(paper.year) + ".\n\n";
    out += kClosing;
    return out;
  }
  out += "Given an input paper's title, its publication year, and its citation context, describe the impact of that "
         "paper.\n";
  out += variant.include_intents
             ? "The citation context includes five components: <citation ID, citation title, citation year, citation "
               "context, citation intent>.\n\n"
             : "The citation context includes four components: <citation ID, citation title, citation year, citation "
               "context>.\n\n";
  out += "Given the input paper with id " + paper.paper_id + " titled " + paper.title + " published in " +
         std::to_string(paper.year) + ", and the following list of papers citing it:\n";
  for (const auto& l : lines) out += l + "\n";
  out += "\n";
  out += kClosing;
  return out;
}

}  // namespace

std::vector<EvidenceItem> evidence_for(const corpus::Corpus& corpus, const std::string& paper_id,
                                       const std::map<std::string, intent::ClassifiedCitation>& classified) {
  std::vector<EvidenceItem> items;
  for (const auto& ctx : corpus.contexts_of(paper_id)) {
    EvidenceItem item{ctx, std::nullopt, ""};
    if (auto it = classified.find(ctx.context_id); it != classified.end()) {
      item.intent_class = it->second.final_class;
      item.intent_text = it->second.chosen_intent_text;
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<EvidenceItem> select_evidence(const std::vector<EvidenceItem>& candidates, const PromptVariant& variant) {
  variant.validate();
  std::vector<EvidenceItem> out;
  if (variant.citations == CitationMode::none) return out;
  for (const auto& c : candidates) {
    if (!c.context.citing_year) continue;
    if (variant.citations == CitationMode::impact_only || variant.include_intents) {
      if (!c.intent_class) throw MissingInput("context " + c.context.context_id + " has not been classified");
    }
    if (variant.citations == CitationMode::impact_only && *c.intent_class != intent::IntentClass::impact_revealing)
      continue;
    if (variant.include_intents && text::trim(c.intent_text).empty())
      throw MissingInput("context " + c.context.context_id + " has no intent text");
    out.push_back(c);
  }
  return out;
}

std::string format_evidence_line(const EvidenceRef& ref, bool include_intent) {
  std::string line = "<citation ID: " + std::to_string(ref.id) + " | citation title: " + ref.citing_title +
                     " | citation year: " + (ref.citing_year ? std::to_string(*ref.citing_year) : "unknown") +
                     " | citation context: " + text::collapse_whitespace(ref.context_text);
  if (include_intent) line += " | citation intent: " + text::collapse_whitespace(ref.intent_text);
  return line + ">";
}

SummaryPrompt assemble_summary_prompt(const corpus::Paper& paper, const std::vector<EvidenceItem>& evidence,
                                      const PromptVariant& variant, std::size_t max_prompt_chars) {
  variant.validate();
  SummaryPrompt result;
  if (variant.citations == CitationMode::none) {
    result.text = render(paper, variant, {});
    result.truncation.original_chars = result.truncation.final_chars = utf8_length(result.text);
    return result;
  }
  if (evidence.empty())
    throw EmptyEvidence("no evidence for paper " + paper.paper_id + " under variant " + variant.name());

  std::vector<EvidenceRef> refs;
  for (const auto& e : evidence) {
    if (!e.context.citing_year)
      throw PreconditionError("context " + e.context.context_id + " has no citing year");
    if (variant.citations == CitationMode::impact_only &&
        e.intent_class != std::optional(intent::IntentClass::impact_revealing))
      throw PreconditionError("context " + e.context.context_id + " is not impact-revealing");
    if (variant.include_intents && e.intent_text.empty())
      throw PreconditionError("context " + e.context.context_id + " has no intent text");
    refs.push_back({0, e.context.context_id, e.context.citing_paper_id, e.context.citing_title, e.context.citing_year,
                    e.context.text, e.intent_class, variant.include_intents ? e.intent_text : std::string()});
  }

  if (variant.ordering == Ordering::chronological)
    std::stable_sort(refs.begin(), refs.end(),
                     [](const EvidenceRef& a, const EvidenceRef& b) { return *a.citing_year < *b.citing_year; });
  else
    seeded_shuffle(refs, variant.shuffle_seed);
  for (std::size_t i = 0; i < refs.size(); ++i) refs[i].id = static_cast<int>(i) + 1;

  auto lines_of = [&](const std::vector<EvidenceRef>& rs) {
    std::vector<std::string> lines;
    for (const auto& r : rs) lines.push_back(format_evidence_line(r, variant.include_intents));
    return lines;
  };

  auto& manifest = result.truncation;
  std::string text = render(paper, variant, lines_of(refs));
  manifest.original_chars = utf8_length(text);

  if (manifest.original_chars > max_prompt_chars) {
    manifest.applied = true;
    for (auto& r : refs) {
      if (utf8_length(r.context_text) > kMaxContextChars) {
        r.context_text = cut_utf8(r.context_text, kMaxContextChars);
        manifest.shortened_context_ids.push_back(r.context_id);
      }
    }
    const std::size_t fixed = utf8_length(render(paper, variant, {}));
    std::vector<std::size_t> widths;
    std::size_t total = fixed;
    for (const auto& l : lines_of(refs)) {
      widths.push_back(utf8_length(l) + 1);
      total += widths.back();
    }

    // Drop one line per year in rotation, oldest year first. Ids only shrink
    // after renumbering, so the running total is an upper bound.
    std::map<int, std::vector<std::size_t>> by_year;
    for (std::size_t i = 0; i < refs.size(); ++i) by_year[*refs[i].citing_year].push_back(i);
    std::vector<bool> dropped(refs.size(), false);
    while (total > max_prompt_chars) {
      bool any = false;
      for (auto& [year, idx] : by_year) {
        if (idx.empty()) continue;
        const std::size_t victim = idx.front();
        idx.erase(idx.begin());
        dropped[victim] = true;
        manifest.dropped_context_ids.push_back(refs[victim].context_id);
        total -= widths[victim];
        any = true;
        if (total <= max_prompt_chars) break;
      }
      if (!any) break;
    }
    std::vector<EvidenceRef> kept;
    for (std::size_t i = 0; i < refs.size(); ++i)
      if (!dropped[i]) kept.push_back(refs[i]);
    if (kept.empty())
      throw EmptyEvidence("no evidence line of paper " + paper.paper_id + " fits in " +
                          std::to_string(max_prompt_chars) + " characters");
    refs = std::move(kept);
    for (std::size_t i = 0; i < refs.size(); ++i) refs[i].id = static_cast<int>(i) + 1;
    text = render(paper, variant, lines_of(refs));
  }
  manifest.final_chars = utf8_length(text);
  result.text = std::move(text);
  result.evidence_map = std::move(refs);
  return result;
}

std::string render_summary_block(const ImpactSummary& s) {
  std::string out = "Paper " + s.paper_id + ": " + s.paper_title + " (" + std::to_string(s.paper_year) + ")\n";
  for (const auto& p : s.periods) {
    out += "- " + std::to_string(p.start_year) + " - " + std::to_string(p.end_year) + " | " + p.aspect + ": " +
           text::collapse_whitespace(p.description) + "\n";
  }
  return out;
}

std::string build_author_prompt(const std::vector<ImpactSummary>& summaries) {
  std::string out = kAuthorOpening;
  out += "\n\nThis is the list of semi-structured paper summaries about the researcher:\n";
  for (const auto& s : summaries) out += render_summary_block(s) + "\n";
  out += kAuthorClosing;
  return out;
}

}  // namespace impact::summarizer
