#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace impact::corpus {

enum class Field { psychology, medicine, computer_science, other };

std::string to_string(Field f);
Field field_from_string(const std::string& s);

/// Picks the first of psychology / medicine / computer science in the order
/// the API lists fields of study; anything else is `other`.
Field classify_fields(const std::vector<std::string>& fields_of_study);

struct Paper {
  std::string paper_id;
  std::string title;
  int year = 0;
  Field field = Field::other;
  std::int64_t citation_count = 0;

  /// Throws PreconditionError on an empty id or a year outside [1800, this year].
  void validate() const;
  bool operator==(const Paper&) const = default;
};

struct CitationContext {
  std::string context_id;
  std::string cited_paper_id;
  std::string citing_paper_id;
  std::string citing_title;
  std::optional<int> citing_year;
  std::string text;

  bool operator==(const CitationContext&) const = default;
};

/// All mentions of one cited paper inside one citing paper.
struct AggregatedContext {
  std::string cited_paper_id;
  std::string citing_paper_id;
  std::string citing_title;
  std::optional<int> citing_year;
  std::vector<std::string> context_ids;
  std::string text;  // mentions joined with " ... "
};

void to_json(nlohmann::json& j, const Paper& p);
void from_json(const nlohmann::json& j, Paper& p);
void to_json(nlohmann::json& j, const CitationContext& c);
void from_json(const nlohmann::json& j, CitationContext& c);
void to_json(nlohmann::json& j, const AggregatedContext& a);

/// Stable id: first 16 hex digits of sha256(cited | citing | normalized text).
std::string make_context_id(const std::string& cited, const std::string& citing, const std::string& text);

/// Dedup key used across the corpus: (cited, citing, normalized text).
std::string dedup_key(const CitationContext& c);

/// Drops duplicates (first occurrence wins) and contexts whose text is empty
/// after normalization, then stable-sorts by (citing_year with absent first,
/// citing_paper_id).
std::vector<CitationContext> dedup_and_order(std::vector<CitationContext> contexts);

/// Ids of contexts whose citing year precedes the cited paper's year by more
/// than one year. Such records are kept; callers report them.
std::vector<std::string> flag_year_anomalies(const Paper& cited, const std::vector<CitationContext>& contexts);

std::vector<AggregatedContext> aggregate_by_citing(const std::vector<CitationContext>& contexts);

int current_year();

}  // namespace impact::corpus
