#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/corpus/types.hpp"
#include "impact/intent/types.hpp"

namespace impact::summarizer {

enum class CitationMode { none, all, impact_only };
enum class Ordering { chronological, seeded_shuffle };

std::string to_string(CitationMode m);
std::string to_string(Ordering o);
CitationMode citation_mode_from_string(const std::string& s);
Ordering ordering_from_string(const std::string& s);

struct PromptVariant {
  CitationMode citations = CitationMode::impact_only;
  bool include_intents = true;
  Ordering ordering = Ordering::chronological;
  std::uint64_t shuffle_seed = 0;

  /// "none", or "<citations>[+intents]@<ordering>", e.g. "impact_only+intents@chronological".
  std::string name() const;
  static PromptVariant from_name(const std::string& name, std::uint64_t shuffle_seed = 0);

  /// ConfigError when citations = none is combined with intents.
  void validate() const;
  bool operator==(const PromptVariant&) const = default;
};

/// none + {all, impact_only} x {without, with intents} x {chronological, shuffled}.
std::vector<PromptVariant> variant_grid(std::uint64_t shuffle_seed);

/// A citation offered to the prompt builder, with its classification when known.
struct EvidenceItem {
  corpus::CitationContext context;
  std::optional<intent::IntentClass> intent_class;
  std::string intent_text;
};

/// Renumbered citation id (1..N within one prompt) and what it points to.
struct EvidenceRef {
  int id = 0;
  std::string context_id;
  std::string citing_paper_id;
  std::string citing_title;
  std::optional<int> citing_year;
  std::string context_text;
  std::optional<intent::IntentClass> intent_class;
  std::string intent_text;

  bool operator==(const EvidenceRef&) const = default;
};

struct TruncationManifest {
  bool applied = false;
  std::size_t original_chars = 0;
  std::size_t final_chars = 0;
  std::vector<std::string> shortened_context_ids;
  std::vector<std::string> dropped_context_ids;

  bool operator==(const TruncationManifest&) const = default;
};

struct ImpactPeriod {
  int start_year = 0;
  int end_year = 0;
  std::string period_label;  // as written by the model
  std::string aspect;
  std::string description;
  std::vector<int> evidence;

  bool operator==(const ImpactPeriod&) const = default;
};

struct ImpactSummary {
  std::string summary_id;  // "<paper_id>/<variant name>"
  std::string run_id;
  std::string paper_id;
  std::string paper_title;
  int paper_year = 0;
  PromptVariant variant;
  std::vector<ImpactPeriod> periods;
  std::vector<EvidenceRef> evidence_map;
  std::vector<int> unresolved_evidence;
  TruncationManifest truncation;

  const EvidenceRef* find_evidence(int id) const;
  bool operator==(const ImpactSummary&) const = default;
};

struct AuthorSummary {
  std::string author_id;
  std::vector<std::string> source_summaries;
  std::string narrative;
};

void to_json(nlohmann::json& j, const PromptVariant& v);
void from_json(const nlohmann::json& j, PromptVariant& v);
void to_json(nlohmann::json& j, const EvidenceRef& r);
void from_json(const nlohmann::json& j, EvidenceRef& r);
void to_json(nlohmann::json& j, const TruncationManifest& t);
void from_json(const nlohmann::json& j, TruncationManifest& t);
void to_json(nlohmann::json& j, const ImpactPeriod& p);
void from_json(const nlohmann::json& j, ImpactPeriod& p);
void to_json(nlohmann::json& j, const ImpactSummary& s);
void from_json(const nlohmann::json& j, ImpactSummary& s);
void to_json(nlohmann::json& j, const AuthorSummary& a);

}  // namespace impact::summarizer
