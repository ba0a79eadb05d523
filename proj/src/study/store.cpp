#include "impact/study/store.hpp"

#include <algorithm>
#include <chrono>
#include <tuple>

#include <sqlite3.h>
#include <spdlog/spdlog.h>

#include "impact/common/error.hpp"
#include "impact/study/protocol.hpp"

namespace impact::study {

namespace {

struct Statement_ {
  sqlite3_stmt* s = nullptr;
  Statement_(sqlite3* db, const char* sql) {
    if (sqlite3_prepare_v2(db, sql, -1, &s, nullptr) != SQLITE_OK)
      throw IoError(std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
  }
  ~Statement_() { sqlite3_finalize(s); }
  void text(int i, const std::string& v) { sqlite3_bind_text(s, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT); }
  std::string column_text(int i) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(s, i));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(s, i))) : std::string();
  }
};

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

StudyStore::StudyStore(const std::filesystem::path& path) : path_(path) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (sqlite3_open(path_.string().c_str(), &db_) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw IoError("cannot open study store " + path_.string() + ": " + msg);
  }
  exec("PRAGMA journal_mode=WAL");
  exec("CREATE TABLE IF NOT EXISTS study (id INTEGER PRIMARY KEY CHECK (id = 1), body TEXT NOT NULL)");
  exec("CREATE TABLE IF NOT EXISTS votes (task_id TEXT NOT NULL, rater_id TEXT NOT NULL, body TEXT NOT NULL, "
       "PRIMARY KEY (task_id, rater_id))");
  exec("CREATE TABLE IF NOT EXISTS superseded (task_id TEXT NOT NULL, rater_id TEXT NOT NULL, old_body TEXT NOT NULL, "
       "new_body TEXT NOT NULL)");
  reload();
}

StudyStore::~StudyStore() { sqlite3_close(db_); }

void StudyStore::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw IoError("sqlite: " + msg);
  }
}

void StudyStore::reload() {
  {
    Statement_ q(db_, "SELECT body FROM study WHERE id = 1");
    if (sqlite3_step(q.s) == SQLITE_ROW)
      study_ = std::make_unique<Study>(nlohmann::json::parse(q.column_text(0)).get<Study>());
  }
  auto votes = std::make_shared<std::vector<Vote>>();
  Statement_ q(db_, "SELECT body FROM votes ORDER BY task_id, rater_id");
  while (sqlite3_step(q.s) == SQLITE_ROW) votes->push_back(nlohmann::json::parse(q.column_text(0)).get<Vote>());
  std::atomic_store(&snapshot_, std::shared_ptr<const std::vector<Vote>>(std::move(votes)));
}

void StudyStore::create(const Study& study) {
  std::lock_guard lock(write_mu_);
  if (study_) throw PreconditionError("study store " + path_.string() + " already holds a study");
  Statement_ ins(db_, "INSERT INTO study (id, body) VALUES (1, ?)");
  ins.text(1, nlohmann::json(study).dump());
  if (sqlite3_step(ins.s) != SQLITE_DONE) throw IoError(std::string("sqlite insert failed: ") + sqlite3_errmsg(db_));
  study_ = std::make_unique<Study>(study);
}

bool StudyStore::has_study() const {
  std::lock_guard lock(write_mu_);
  return static_cast<bool>(study_);
}

const Study& StudyStore::study() const {
  std::lock_guard lock(write_mu_);
  if (!study_) throw MissingInput("study store " + path_.string() + " holds no study");
  return *study_;
}

VoteAck StudyStore::record_vote(const Vote& input) {
  std::lock_guard lock(write_mu_);
  if (!study_) throw MissingInput("study store " + path_.string() + " holds no study");
  validate_vote(*study_, input);
  Vote vote = input;
  if (vote.timestamp_ms == 0) vote.timestamp_ms = now_ms();
  const std::string body = nlohmann::json(vote).dump();

  VoteAck ack;
  exec("BEGIN IMMEDIATE");
  try {
    {
      Statement_ old(db_, "SELECT body FROM votes WHERE task_id = ? AND rater_id = ?");
      old.text(1, vote.task_id);
      old.text(2, vote.rater_id);
      if (sqlite3_step(old.s) == SQLITE_ROW) {
        ack.superseded = true;
        Statement_ log(db_, "INSERT INTO superseded (task_id, rater_id, old_body, new_body) VALUES (?, ?, ?, ?)");
        log.text(1, vote.task_id);
        log.text(2, vote.rater_id);
        log.text(3, old.column_text(0));
        log.text(4, body);
        if (sqlite3_step(log.s) != SQLITE_DONE) throw IoError(sqlite3_errmsg(db_));
      }
    }
    Statement_ up(db_, "INSERT OR REPLACE INTO votes (task_id, rater_id, body) VALUES (?, ?, ?)");
    up.text(1, vote.task_id);
    up.text(2, vote.rater_id);
    up.text(3, body);
    if (sqlite3_step(up.s) != SQLITE_DONE) throw IoError(sqlite3_errmsg(db_));
    exec("COMMIT");
  } catch (...) {
    exec("ROLLBACK");
    throw;
  }
  if (ack.superseded) spdlog::info("vote on {} by {} supersedes an earlier vote", vote.task_id, vote.rater_id);

  auto next = std::make_shared<std::vector<Vote>>();
  const auto current = std::atomic_load(&snapshot_);
  for (const auto& v : *current)
    if (!(v.task_id == vote.task_id && v.rater_id == vote.rater_id)) next->push_back(v);
  next->push_back(vote);
  std::sort(next->begin(), next->end(), [](const Vote& a, const Vote& b) {
    return std::tie(a.task_id, a.rater_id) < std::tie(b.task_id, b.rater_id);
  });
  std::atomic_store(&snapshot_, std::shared_ptr<const std::vector<Vote>>(std::move(next)));
  return ack;
}

std::shared_ptr<const std::vector<Vote>> StudyStore::votes() const { return std::atomic_load(&snapshot_); }

std::size_t StudyStore::vote_count() const { return votes()->size(); }

std::size_t StudyStore::superseded_count() const {
  std::lock_guard lock(write_mu_);
  Statement_ q(db_, "SELECT COUNT(*) FROM superseded");
  sqlite3_step(q.s);
  return static_cast<std::size_t>(sqlite3_column_int64(q.s, 0));
}

}  // namespace impact::study
