#include "impact/corpus/scholar_api.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include <spdlog/spdlog.h>

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/url.hpp"

namespace impact::corpus {

using nlohmann::json;

namespace {

std::optional<int> optional_year(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_number_integer()) return std::nullopt;
  return it->get<int>();
}

std::string string_or_empty(const json& doc, const char* key) {
  auto it = doc.find(key);
  return it != doc.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

Paper parse_paper(const json& doc) {
  Paper p;
  p.paper_id = string_or_empty(doc, "paperId");
  p.title = string_or_empty(doc, "title");
  auto year = optional_year(doc, "year");
  if (p.paper_id.empty() || p.title.empty() || !year) throw ApiError("paper document lacks id, title or year");
  p.year = *year;
  if (auto it = doc.find("citationCount"); it != doc.end() && it->is_number_integer())
    p.citation_count = it->get<std::int64_t>();

  std::vector<std::string> fields;
  if (auto it = doc.find("fieldsOfStudy"); it != doc.end() && it->is_array())
    for (const auto& f : *it)
      if (f.is_string()) fields.push_back(f.get<std::string>());
  if (auto it = doc.find("s2FieldsOfStudy"); it != doc.end() && it->is_array())
    for (const auto& f : *it)
      if (f.is_object() && f.contains("category") && f["category"].is_string())
        fields.push_back(f["category"].get<std::string>());
  p.field = classify_fields(fields);
  return p;
}

CitationPage parse_citation_page(const json& doc) {
  CitationPage page;
  if (!doc.is_object() || !doc.contains("data") || !doc["data"].is_array())
    throw ApiError("citations page without data array");
  for (const auto& item : doc["data"]) {
    const json citing = item.value("citingPaper", json::object());
    CitingEntry e;
    e.citing_paper_id = string_or_empty(citing, "paperId");
    if (e.citing_paper_id.empty()) continue;  // the API emits stubs for unresolved citers
    e.citing_title = string_or_empty(citing, "title");
    e.citing_year = optional_year(citing, "year");
    if (auto it = item.find("contexts"); it != item.end() && it->is_array())
      for (const auto& c : *it)
        if (c.is_string()) e.contexts.push_back(c.get<std::string>());
    page.entries.push_back(std::move(e));
  }
  if (auto it = doc.find("next"); it != doc.end() && it->is_number_unsigned())
    page.next_offset = it->get<std::size_t>();
  return page;
}

bool plausible_paper_id(const std::string& id) {
  if (id.empty() || id.size() > 256) return false;
  for (unsigned char ch : id)
    if (ch <= 0x20 || ch == '/' || ch == '?' || ch == '#' || ch == '%' || ch == 0x7f) return false;
  return true;
}

MockScholarApi::MockScholarApi(json fixture) : fixture_(std::move(fixture)) {
  if (!fixture_.is_object() || !fixture_.contains("papers") || !fixture_["papers"].is_array())
    throw ConfigError("scholar fixture needs a papers array");
  if (!fixture_.contains("citations")) fixture_["citations"] = json::object();
}

std::shared_ptr<MockScholarApi> MockScholarApi::from_file(const std::filesystem::path& path) {
  return std::make_shared<MockScholarApi>(read_json_file(path));
}

Paper MockScholarApi::get_paper(const std::string& paper_id) {
  if (!plausible_paper_id(paper_id)) throw NotFound("malformed paper id '" + paper_id + "'");
  ++calls_;
  for (const auto& p : fixture_["papers"])
    if (p.value("paperId", "") == paper_id) return parse_paper(p);
  throw NotFound("paper " + paper_id);
}

CitationPage MockScholarApi::get_citations(const std::string& paper_id, std::size_t offset, std::size_t limit) {
  if (!plausible_paper_id(paper_id)) throw NotFound("malformed paper id '" + paper_id + "'");
  ++calls_;
  const std::size_t n = citation_calls_++;
  if (fail_at_ && n == *fail_at_) throw ApiError("injected failure at citations request " + std::to_string(n), true);

  const auto& all = fixture_["citations"];
  json items = all.contains(paper_id) ? all[paper_id] : json::array();
  json doc = {{"offset", offset}, {"data", json::array()}};
  for (std::size_t i = offset; i < items.size() && i < offset + limit; ++i) doc["data"].push_back(items[i]);
  if (offset + limit < items.size()) doc["next"] = offset + limit;
  return parse_citation_page(doc);
}

S2Settings S2Settings::from_env() {
  S2Settings s;
  if (const char* key = std::getenv("S2_API_KEY")) s.api_key = key;
  if (const char* base = std::getenv("S2_BASE_URL"); base && *base) s.base_url = base;
  return s;
}

S2Client::S2Client(S2Settings settings, Sleeper sleeper) : settings_(std::move(settings)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::int64_t ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
  split_base_url(settings_.base_url);  // validates eagerly
}

json S2Client::get_json(const std::string& path) {
  const BaseUrl base = split_base_url(settings_.base_url);
  httplib::Client client(base.scheme_host_port);
  client.set_connection_timeout(std::chrono::seconds(15));
  client.set_read_timeout(std::chrono::seconds(60));
  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("x-api-key", settings_.api_key);

  std::int64_t backoff = settings_.initial_backoff_ms;
  for (int attempt = 1;; ++attempt) {
    ++calls_;
    auto res = client.Get(base.path_prefix + path, headers);
    std::string failure;
    if (!res) {
      failure = "transport failure: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      auto doc = json::parse(res->body, nullptr, false);
      if (doc.is_discarded()) throw ApiError("invalid JSON from " + path);
      return doc;
    } else if (res->status == 404 || res->status == 400) {
      throw NotFound(path + " (" + std::to_string(res->status) + ")");
    } else if (res->status == 429 || res->status >= 500) {
      failure = "status " + std::to_string(res->status);
    } else {
      throw ApiError(path + " returned status " + std::to_string(res->status));
    }
    if (attempt >= settings_.max_attempts) throw ApiError(path + ": " + failure, true);
    spdlog::warn("scholar api {} (attempt {}/{}), retrying", failure, attempt, settings_.max_attempts);
    sleeper_(backoff);
    backoff *= 2;
  }
}

Paper S2Client::get_paper(const std::string& paper_id) {
  if (!plausible_paper_id(paper_id)) throw NotFound("malformed paper id '" + paper_id + "'");
  return parse_paper(get_json("/paper/" + url_encode(paper_id) +
                              "?fields=paperId,title,year,citationCount,fieldsOfStudy,s2FieldsOfStudy"));
}

CitationPage S2Client::get_citations(const std::string& paper_id, std::size_t offset, std::size_t limit) {
  if (!plausible_paper_id(paper_id)) throw NotFound("malformed paper id '" + paper_id + "'");
  return parse_citation_page(get_json("/paper/" + url_encode(paper_id) +
                                      "/citations?fields=contexts,paperId,title,year&offset=" +
                                      std::to_string(offset) + "&limit=" + std::to_string(limit)));
}

}  // namespace impact::corpus
