#include "impact/corpus/fetcher.hpp"

#include <spdlog/spdlog.h>

#include "impact/common/jsonl.hpp"
#include "impact/common/text.hpp"

namespace impact::corpus {

void to_json(nlohmann::json& j, const FetchCursor& c) { j = {{"paper_id", c.paper_id}, {"offset", c.offset}}; }

void from_json(const nlohmann::json& j, FetchCursor& c) {
  c.paper_id = j.at("paper_id").get<std::string>();
  c.offset = j.at("offset").get<std::size_t>();
}

Fetcher::Fetcher(std::shared_ptr<ScholarApi> api, std::filesystem::path cache_dir)
    : api_(std::move(api)), cache_dir_(std::move(cache_dir)) {
  if (!api_) throw PreconditionError("fetcher needs an api");
}

std::optional<Paper> Fetcher::cached(const std::string& paper_id) {
  std::lock_guard lock(mu_);
  if (auto it = papers_.find(paper_id); it != papers_.end()) return it->second;
  if (cache_dir_.empty()) return std::nullopt;
  const auto file = cache_dir_ / "papers" / (text::sha256_hex(paper_id).substr(0, 24) + ".json");
  if (!std::filesystem::exists(file)) return std::nullopt;
  try {
    Paper p = read_json_file(file).get<Paper>();
    if (p.paper_id != paper_id) return std::nullopt;
    papers_.emplace(paper_id, p);
    return p;
  } catch (const std::exception& e) {
    spdlog::warn("ignoring unreadable cache entry {}: {}", file.string(), e.what());
    return std::nullopt;
  }
}

Paper Fetcher::fetch_paper(const std::string& paper_id) {
  if (!plausible_paper_id(paper_id)) throw NotFound("malformed paper id '" + paper_id + "'");
  if (auto hit = cached(paper_id)) return *hit;
  Paper p = api_->get_paper(paper_id);
  p.validate();
  std::lock_guard lock(mu_);
  papers_.emplace(paper_id, p);
  if (!cache_dir_.empty())
    write_json_file(cache_dir_ / "papers" / (text::sha256_hex(paper_id).substr(0, 24) + ".json"), p);
  return p;
}

std::vector<CitationContext> Fetcher::fetch_citation_contexts(const std::string& paper_id,
                                                              std::optional<std::size_t> limit,
                                                              std::size_t start_offset) {
  fetch_paper(paper_id);
  std::vector<CitationContext> raw;
  std::size_t offset = start_offset;
  std::size_t citing_seen = 0;
  for (;;) {
    std::size_t page_size = ScholarApi::kPageSize;
    if (limit) {
      if (citing_seen >= *limit) break;
      page_size = std::min(page_size, *limit - citing_seen);
    }
    CitationPage page;
    try {
      page = api_->get_citations(paper_id, offset, page_size);
    } catch (const ApiError& e) {
      throw PartialFetch(dedup_and_order(std::move(raw)), FetchCursor{paper_id, offset}, e.what());
    }
    for (const auto& entry : page.entries) {
      for (const auto& snippet : entry.contexts) {
        CitationContext c;
        c.cited_paper_id = paper_id;
        c.citing_paper_id = entry.citing_paper_id;
        c.citing_title = entry.citing_title;
        c.citing_year = entry.citing_year;
        c.text = snippet;
        c.context_id = make_context_id(paper_id, entry.citing_paper_id, snippet);
        raw.push_back(std::move(c));
      }
    }
    citing_seen += page.entries.size();
    if (!page.next_offset || page.entries.empty()) break;
    offset = *page.next_offset;
  }
  return dedup_and_order(std::move(raw));
}

}  // namespace impact::corpus
