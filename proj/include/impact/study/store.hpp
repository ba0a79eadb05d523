#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <vector>

#include "impact/study/types.hpp"

struct sqlite3;

namespace impact::study {

struct VoteAck {
  bool recorded = true;
  bool superseded = false;  // an earlier vote of the same rater was replaced
};

/// One SQLite file per study holding the study definition and its votes.
/// Writes are serialized; vote reads return an immutable snapshot.
class StudyStore {
 public:
  /// Opens or creates the file. A new file needs create() before use.
  explicit StudyStore(const std::filesystem::path& path);
  ~StudyStore();
  StudyStore(const StudyStore&) = delete;
  StudyStore& operator=(const StudyStore&) = delete;

  /// Stores the study definition; PreconditionError if one is already stored.
  void create(const Study& study);
  bool has_study() const;
  /// MissingInput when no study has been stored.
  const Study& study() const;

  /// Validates, then inserts or replaces the (task, rater) vote.
  VoteAck record_vote(const Vote& vote);

  std::shared_ptr<const std::vector<Vote>> votes() const;
  std::size_t vote_count() const;
  std::size_t superseded_count() const;

  const std::filesystem::path& path() const { return path_; }

 private:
  void exec(const char* sql);
  void reload();

  std::filesystem::path path_;
  sqlite3* db_ = nullptr;
  mutable std::mutex write_mu_;
  std::unique_ptr<Study> study_;
  std::shared_ptr<const std::vector<Vote>> snapshot_;
};

}  // namespace impact::study
