#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/llm/provider.hpp"
#include "impact/llm/types.hpp"

namespace impact::llm {

/// Wall clock plus sleep; tests substitute a manual clock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
  virtual void sleep_ms(std::int64_t ms) = 0;
};

class SystemClock : public Clock {
 public:
  std::int64_t now_ms() override;
  void sleep_ms(std::int64_t ms) override;
};

/// Time only advances through sleep_ms.
class ManualClock : public Clock {
 public:
  explicit ManualClock(std::int64_t start_ms = 0) : now_(start_ms) {}
  std::int64_t now_ms() override;
  void sleep_ms(std::int64_t ms) override;
  std::int64_t total_slept_ms() const;

 private:
  mutable std::mutex mu_;
  std::int64_t now_;
  std::int64_t slept_ = 0;
};

/// Sliding 60 s window: at most `rpm` acquisitions in any window.
class RateLimiter {
 public:
  RateLimiter(int requests_per_minute, std::shared_ptr<Clock> clock);

  /// Blocks until a slot is free; returns the acquisition timestamp.
  std::int64_t acquire();

 private:
  int rpm_;
  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  std::deque<std::int64_t> sent_;
};

/// Append-only JSONL log of every exchange, one record per complete() call.
class CallLog {
 public:
  explicit CallLog(std::filesystem::path path = {});

  /// Assigns the next call index, appends the record and returns the index.
  std::uint64_t append(nlohmann::json record);

  std::vector<nlohmann::json> records() const;
  std::uint64_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::vector<nlohmann::json> records_;
  std::uint64_t next_index_ = 0;
};

struct GatewayConfig {
  int max_attempts = 3;
  std::int64_t initial_backoff_ms = 1000;
  int requests_per_minute = 0;  // 0 disables limiting
  int max_in_flight = 8;
  std::int64_t token_budget = 0;  // 0 disables the budget
  std::filesystem::path call_log;  // empty keeps the log in memory only
};

struct StructuredResult {
  nlohmann::json record;
  std::string raw_text;
  std::vector<std::uint64_t> call_indices;
  std::vector<std::string> request_hashes;
};

/// Thread-safe front door to a Provider: bounded in-flight calls, rate
/// limiting, retries with exponential backoff on transient errors, a token
/// budget and the call log.
class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, GatewayConfig config,
          std::shared_ptr<Clock> clock = std::make_shared<SystemClock>());

  ChatResponse complete(const ChatRequest& request);

  /// Sends with a structured-output schema, parses and validates the reply.
  /// A reply that fails to parse or validate gets one repair round trip;
  /// a second failure throws SchemaViolation carrying the raw text.
  StructuredResult complete_structured(const ChatRequest& request, const OutputSchema& schema);

  bool supports_logprobs() const { return provider_->supports_logprobs(); }
  const CallLog& call_log() const { return log_; }
  Usage total_usage() const;

 private:
  ChatResponse dispatch(const ChatRequest& request, const OutputSchema* schema);

  std::shared_ptr<Provider> provider_;
  GatewayConfig config_;
  std::shared_ptr<Clock> clock_;
  RateLimiter limiter_;
  CallLog log_;
  std::counting_semaphore<1024> in_flight_;
  mutable std::mutex usage_mu_;
  Usage usage_;
};

}  // namespace impact::llm
