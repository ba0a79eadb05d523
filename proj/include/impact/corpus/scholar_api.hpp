#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/corpus/types.hpp"

namespace impact::corpus {

/// One citing paper and the snippets in which it mentions the cited paper.
struct CitingEntry {
  std::string citing_paper_id;
  std::string citing_title;
  std::optional<int> citing_year;
  std::vector<std::string> contexts;
};

struct CitationPage {
  std::vector<CitingEntry> entries;
  std::optional<std::size_t> next_offset;  // absent on the last page
};

/// Parses the graph API's paper document
/// ({paperId, title, year, citationCount, fieldsOfStudy | s2FieldsOfStudy}).
Paper parse_paper(const nlohmann::json& doc);

/// Parses a citations page ({offset, next?, data: [{contexts, citingPaper}]}).
CitationPage parse_citation_page(const nlohmann::json& doc);

/// Paper ids are opaque but never empty and never contain white space or '/'
/// beyond a single "PREFIX:" style namespace.
bool plausible_paper_id(const std::string& id);

/// Read-only view of a scholarly graph.
class ScholarApi {
 public:
  static constexpr std::size_t kPageSize = 100;

  virtual ~ScholarApi() = default;
  virtual Paper get_paper(const std::string& paper_id) = 0;
  virtual CitationPage get_citations(const std::string& paper_id, std::size_t offset, std::size_t limit) = 0;

  /// Number of requests issued so far; cache hits never increment it.
  virtual std::size_t call_count() const = 0;
};

/// Serves a fixture document shaped like the live API:
///   {"papers": [<paper doc>...], "citations": {"<paper id>": [<citation item>...]}}
/// Failure injection lets tests interrupt pagination.
class MockScholarApi : public ScholarApi {
 public:
  explicit MockScholarApi(nlohmann::json fixture);
  static std::shared_ptr<MockScholarApi> from_file(const std::filesystem::path& path);

  Paper get_paper(const std::string& paper_id) override;
  CitationPage get_citations(const std::string& paper_id, std::size_t offset, std::size_t limit) override;
  std::size_t call_count() const override { return calls_.load(); }

  /// The n-th citations request (0-based, counted from now) fails with ApiError.
  void fail_citation_request(std::size_t n) { fail_at_ = citation_calls_.load() + n; }

 private:
  nlohmann::json fixture_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> citation_calls_{0};
  std::optional<std::size_t> fail_at_;
};

struct S2Settings {
  std::string base_url = "https://api.semanticscholar.org/graph/v1";
  std::string api_key;
  int max_attempts = 3;
  std::int64_t initial_backoff_ms = 1000;

  /// Reads S2_API_KEY and S2_BASE_URL.
  static S2Settings from_env();
};

/// HTTP client for the Semantic Scholar graph API.
class S2Client : public ScholarApi {
 public:
  using Sleeper = std::function<void(std::int64_t)>;

  explicit S2Client(S2Settings settings, Sleeper sleeper = {});

  Paper get_paper(const std::string& paper_id) override;
  CitationPage get_citations(const std::string& paper_id, std::size_t offset, std::size_t limit) override;
  std::size_t call_count() const override { return calls_.load(); }

 private:
  nlohmann::json get_json(const std::string& path);

  S2Settings settings_;
  Sleeper sleeper_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace impact::corpus
