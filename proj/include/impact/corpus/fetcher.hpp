#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "impact/common/error.hpp"
#include "impact/corpus/scholar_api.hpp"
#include "impact/corpus/types.hpp"

namespace impact::corpus {

/// Where an interrupted citation crawl should pick up again.
struct FetchCursor {
  std::string paper_id;
  std::size_t offset = 0;
};

void to_json(nlohmann::json& j, const FetchCursor& c);
void from_json(const nlohmann::json& j, FetchCursor& c);

/// Pagination broke off midway. Carries everything fetched before the failure
/// (already deduplicated and ordered) and the cursor for resuming.
class PartialFetch : public Error {
 public:
  PartialFetch(std::vector<CitationContext> fetched, FetchCursor cursor, const std::string& cause)
      : Error("PartialFetch", "citation fetch for " + cursor.paper_id + " stopped at offset " +
                                  std::to_string(cursor.offset) + ": " + cause),
        fetched_(std::move(fetched)),
        cursor_(std::move(cursor)) {}

  const std::vector<CitationContext>& fetched() const { return fetched_; }
  const FetchCursor& cursor() const { return cursor_; }

 private:
  std::vector<CitationContext> fetched_;
  FetchCursor cursor_;
};

/// Paper lookups go through a memory cache and, when a cache directory is
/// set, a disk cache; citations are fetched page by page.
class Fetcher {
 public:
  explicit Fetcher(std::shared_ptr<ScholarApi> api, std::filesystem::path cache_dir = {});

  Paper fetch_paper(const std::string& paper_id);

  /// `limit` caps the number of citing papers requested. `start_offset`
  /// resumes an interrupted crawl.
  std::vector<CitationContext> fetch_citation_contexts(const std::string& paper_id,
                                                       std::optional<std::size_t> limit = std::nullopt,
                                                       std::size_t start_offset = 0);

  ScholarApi& api() { return *api_; }

 private:
  std::optional<Paper> cached(const std::string& paper_id);

  std::shared_ptr<ScholarApi> api_;
  std::filesystem::path cache_dir_;
  std::mutex mu_;
  std::map<std::string, Paper> papers_;
};

}  // namespace impact::corpus
