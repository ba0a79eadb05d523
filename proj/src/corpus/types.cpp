#include "impact/corpus/types.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <unordered_set>

#include "impact/common/error.hpp"
#include "impact/common/text.hpp"

namespace impact::corpus {

std::string to_string(Field f) {
  switch (f) {
    case Field::psychology: return "psychology";
    case Field::medicine: return "medicine";
    case Field::computer_science: return "computer_science";
    case Field::other: return "other";
  }
  return "other";
}

Field field_from_string(const std::string& s) {
  if (s == "psychology") return Field::psychology;
  if (s == "medicine") return Field::medicine;
  if (s == "computer_science") return Field::computer_science;
  if (s == "other") return Field::other;
  throw PreconditionError("unknown field '" + s + "'");
}

Field classify_fields(const std::vector<std::string>& fields_of_study) {
  for (const auto& raw : fields_of_study) {
    const std::string f = text::to_lower_ascii(text::trim(raw));
    if (f == "psychology") return Field::psychology;
    if (f == "medicine") return Field::medicine;
    if (f == "computer science") return Field::computer_science;
  }
  return Field::other;
}

int current_year() {
  const auto now = std::chrono::system_clock::now();
  const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(now)};
  return static_cast<int>(ymd.year());
}

void Paper::validate() const {
  if (paper_id.empty()) throw PreconditionError("paper without id");
  if (year < 1800 || year > current_year())
    throw PreconditionError("paper " + paper_id + " has implausible year " + std::to_string(year));
  if (citation_count < 0) throw PreconditionError("paper " + paper_id + " has negative citation count");
}

void to_json(nlohmann::json& j, const Paper& p) {
  j = {{"paper_id", p.paper_id},
       {"title", p.title},
       {"year", p.year},
       {"field", to_string(p.field)},
       {"citation_count", p.citation_count}};
}

void from_json(const nlohmann::json& j, Paper& p) {
  p.paper_id = j.at("paper_id").get<std::string>();
  p.title = j.at("title").get<std::string>();
  p.year = j.at("year").get<int>();
  p.field = field_from_string(j.at("field").get<std::string>());
  p.citation_count = j.at("citation_count").get<std::int64_t>();
}

void to_json(nlohmann::json& j, const CitationContext& c) {
  j = {{"context_id", c.context_id},
       {"cited_paper_id", c.cited_paper_id},
       {"citing_paper_id", c.citing_paper_id},
       {"citing_title", c.citing_title},
       {"citing_year", c.citing_year ? nlohmann::json(*c.citing_year) : nlohmann::json(nullptr)},
       {"text", c.text}};
}

void from_json(const nlohmann::json& j, CitationContext& c) {
  c.context_id = j.at("context_id").get<std::string>();
  c.cited_paper_id = j.at("cited_paper_id").get<std::string>();
  c.citing_paper_id = j.at("citing_paper_id").get<std::string>();
  c.citing_title = j.at("citing_title").get<std::string>();
  const auto& y = j.at("citing_year");
  c.citing_year = y.is_null() ? std::nullopt : std::optional<int>(y.get<int>());
  c.text = j.at("text").get<std::string>();
}

void to_json(nlohmann::json& j, const AggregatedContext& a) {
  j = {{"cited_paper_id", a.cited_paper_id},
       {"citing_paper_id", a.citing_paper_id},
       {"citing_title", a.citing_title},
       {"citing_year", a.citing_year ? nlohmann::json(*a.citing_year) : nlohmann::json(nullptr)},
       {"context_ids", a.context_ids},
       {"text", a.text}};
}

std::string make_context_id(const std::string& cited, const std::string& citing, const std::string& text) {
  return text::sha256_hex(cited + "|" + citing + "|" + text::normalize(text)).substr(0, 16);
}

std::string dedup_key(const CitationContext& c) {
  return c.cited_paper_id + '\x1f' + c.citing_paper_id + '\x1f' + text::normalize(c.text);
}

std::vector<CitationContext> dedup_and_order(std::vector<CitationContext> contexts) {
  std::unordered_set<std::string> seen;
  std::vector<CitationContext> out;
  out.reserve(contexts.size());
  for (auto& c : contexts) {
    if (text::normalize(c.text).empty()) continue;
    if (!seen.insert(dedup_key(c)).second) continue;
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const CitationContext& a, const CitationContext& b) {
    if (a.citing_year != b.citing_year) return a.citing_year < b.citing_year;  // nullopt sorts first
    return a.citing_paper_id < b.citing_paper_id;
  });
  return out;
}

std::vector<std::string> flag_year_anomalies(const Paper& cited, const std::vector<CitationContext>& contexts) {
  std::vector<std::string> flagged;
  for (const auto& c : contexts)
    if (c.cited_paper_id == cited.paper_id && c.citing_year && *c.citing_year < cited.year - 1)
      flagged.push_back(c.context_id);
  return flagged;
}

std::vector<AggregatedContext> aggregate_by_citing(const std::vector<CitationContext>& contexts) {
  std::vector<AggregatedContext> out;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  for (const auto& c : contexts) {
    auto key = std::make_pair(c.cited_paper_id, c.citing_paper_id);
    auto [it, inserted] = slot.emplace(key, out.size());
    if (inserted) {
      out.push_back({c.cited_paper_id, c.citing_paper_id, c.citing_title, c.citing_year, {}, {}});
    }
    auto& agg = out[it->second];
    agg.context_ids.push_back(c.context_id);
    if (!agg.text.empty()) agg.text += " ... ";
    agg.text += text::trim(c.text);
  }
  return out;
}

}  // namespace impact::corpus
