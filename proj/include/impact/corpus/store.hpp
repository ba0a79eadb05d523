#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "impact/corpus/types.hpp"

namespace impact::corpus {

struct Corpus {
  std::vector<Paper> papers;
  std::vector<CitationContext> contexts;

  const Paper* find_paper(const std::string& paper_id) const;
  std::vector<CitationContext> contexts_of(const std::string& paper_id) const;

  /// Unique paper ids, valid years, every context pointing at a known paper
  /// with non-empty text, and no duplicate (cited, citing, normalized text).
  /// Throws PreconditionError otherwise.
  void validate() const;
};

struct IndexEntry {
  std::size_t contexts = 0;
  std::size_t citing_papers = 0;
};

/// On-disk layout under `root`: papers.jsonl, contexts.jsonl and index.json
/// (paper_id -> record counts).
class CorpusStore {
 public:
  explicit CorpusStore(std::filesystem::path root) : root_(std::move(root)) {}

  void save(const Corpus& corpus) const;

  /// Loads and checks that the index agrees with the records on disk.
  Corpus load() const;

  std::map<std::string, IndexEntry> read_index() const;
  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path papers_path() const { return root_ / "papers.jsonl"; }
  std::filesystem::path contexts_path() const { return root_ / "contexts.jsonl"; }
  std::filesystem::path index_path() const { return root_ / "index.json"; }

  static std::map<std::string, IndexEntry> build_index(const Corpus& corpus);

 private:
  std::filesystem::path root_;
};

}  // namespace impact::corpus
