#include "impact/llm/gateway.hpp"

#include <algorithm>
#include <thread>

#include <spdlog/spdlog.h>

#include "impact/common/error.hpp"
#include "impact/llm/schema.hpp"

namespace impact::llm {

std::int64_t SystemClock::now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void SystemClock::sleep_ms(std::int64_t ms) {
  if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

std::int64_t ManualClock::now_ms() {
  std::lock_guard lock(mu_);
  return now_;
}

void ManualClock::sleep_ms(std::int64_t ms) {
  std::lock_guard lock(mu_);
  if (ms > 0) {
    now_ += ms;
    slept_ += ms;
  }
}

std::int64_t ManualClock::total_slept_ms() const {
  std::lock_guard lock(mu_);
  return slept_;
}

RateLimiter::RateLimiter(int requests_per_minute, std::shared_ptr<Clock> clock)
    : rpm_(requests_per_minute), clock_(std::move(clock)) {}

std::int64_t RateLimiter::acquire() {
  constexpr std::int64_t kWindowMs = 60'000;
  std::unique_lock lock(mu_);
  for (;;) {
    const std::int64_t now = clock_->now_ms();
    if (rpm_ <= 0) return now;
    while (!sent_.empty() && sent_.front() + kWindowMs <= now) sent_.pop_front();
    if (static_cast<int>(sent_.size()) < rpm_) {
      sent_.push_back(now);
      return now;
    }
    const std::int64_t wait = sent_.front() + kWindowMs - now;
    lock.unlock();
    clock_->sleep_ms(wait);
    lock.lock();
  }
}

CallLog::CallLog(std::filesystem::path path) : path_(std::move(path)) {
  if (!path_.empty()) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    out_.open(path_, std::ios::app);
    if (!out_) throw IoError("cannot open call log " + path_.string());
  }
}

std::uint64_t CallLog::append(nlohmann::json record) {
  std::lock_guard lock(mu_);
  const std::uint64_t index = next_index_++;
  record["call_index"] = index;
  if (out_.is_open()) {
    out_ << record.dump() << '\n';
    out_.flush();
  }
  records_.push_back(std::move(record));
  return index;
}

std::vector<nlohmann::json> CallLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::uint64_t CallLog::size() const {
  std::lock_guard lock(mu_);
  return next_index_;
}

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayConfig config, std::shared_ptr<Clock> clock)
    : provider_(std::move(provider)),
      config_(std::move(config)),
      clock_(std::move(clock)),
      limiter_(config_.requests_per_minute, clock_),
      log_(config_.call_log),
      in_flight_(std::clamp(config_.max_in_flight, 1, 1024)) {
  if (!provider_) throw PreconditionError("gateway needs a provider");
  if (config_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

Usage Gateway::total_usage() const {
  std::lock_guard lock(usage_mu_);
  return usage_;
}

ChatResponse Gateway::complete(const ChatRequest& request) { return dispatch(request, nullptr); }

ChatResponse Gateway::dispatch(const ChatRequest& request, const OutputSchema* schema) {
  request.validate();
  if (config_.token_budget > 0) {
    std::lock_guard lock(usage_mu_);
    if (usage_.total() >= config_.token_budget)
      throw BudgetExceeded("token budget of " + std::to_string(config_.token_budget) + " exhausted");
  }

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  nlohmann::json record = {{"request_hash", request_hash(request, schema)},
                           {"provider", provider_->name()},
                           {"request", request},
                           {"schema_name", schema ? nlohmann::json(schema->schema_name) : nlohmann::json(nullptr)}};

  int attempt = 0;
  std::int64_t backoff = config_.initial_backoff_ms;
  for (;;) {
    ++attempt;
    const std::int64_t sent_at = limiter_.acquire();
    record["ts_ms"] = sent_at;
    record["attempts"] = attempt;
    try {
      ChatResponse resp = provider_->send(request, schema);
      {
        std::lock_guard lock(usage_mu_);
        usage_.prompt_tokens += resp.usage.prompt_tokens;
        usage_.completion_tokens += resp.usage.completion_tokens;
      }
      record["response"] = resp;
      resp.request_hash = record["request_hash"].get<std::string>();
      resp.call_index = log_.append(std::move(record));
      return resp;
    } catch (const ProviderError& e) {
      if (e.transient() && attempt < config_.max_attempts) {
        spdlog::warn("transient provider error (attempt {}/{}): {}", attempt, config_.max_attempts, e.what());
        clock_->sleep_ms(backoff);
        backoff *= 2;
        continue;
      }
      record["response"] = nullptr;
      record["error"] = {{"kind", e.kind()}, {"message", e.what()}, {"transient", e.transient()}};
      log_.append(std::move(record));
      if (e.transient())
        throw ProviderError("gave up after " + std::to_string(attempt) + " attempts: " + e.what(), true);
      throw;
    } catch (const AuthError& e) {
      record["response"] = nullptr;
      record["error"] = {{"kind", e.kind()}, {"message", e.what()}};
      log_.append(std::move(record));
      throw;
    }
  }
}

StructuredResult Gateway::complete_structured(const ChatRequest& request, const OutputSchema& schema) {
  if (!is_well_formed_schema(schema.schema_body))
    throw PreconditionError("schema '" + schema.schema_name + "' is not well formed");

  StructuredResult result;
  auto check = [&](const std::string& raw, std::vector<std::string>& problems) -> std::optional<nlohmann::json> {
    auto parsed = extract_json(raw);
    if (!parsed) {
      problems = {"reply is not valid JSON"};
      return std::nullopt;
    }
    problems = validate_json(*parsed, schema.schema_body);
    if (!problems.empty()) return std::nullopt;
    return parsed;
  };

  ChatResponse first = dispatch(request, &schema);
  result.call_indices.push_back(first.call_index);
  result.request_hashes.push_back(first.request_hash);
  std::vector<std::string> problems;
  if (auto ok = check(first.text, problems)) {
    result.record = std::move(*ok);
    result.raw_text = first.text;
    return result;
  }

  std::string summary;
  for (std::size_t i = 0; i < problems.size() && i < 8; ++i) summary += "\n- " + problems[i];
  ChatRequest repair = request;
  repair.messages.push_back({Role::assistant, first.text});
  repair.messages.push_back(
      {Role::user, "Your previous reply does not satisfy the required JSON schema '" + schema.schema_name +
                       "':" + summary + "\nReply again with only a JSON object that satisfies the schema."});
  ChatResponse second = dispatch(repair, &schema);
  result.call_indices.push_back(second.call_index);
  result.request_hashes.push_back(second.request_hash);
  if (auto ok = check(second.text, problems)) {
    result.record = std::move(*ok);
    result.raw_text = second.text;
    return result;
  }
  std::string detail = problems.empty() ? std::string("invalid") : problems.front();
  throw SchemaViolation("reply violates schema '" + schema.schema_name + "' after repair: " + detail, second.text);
}

}  // namespace impact::llm
