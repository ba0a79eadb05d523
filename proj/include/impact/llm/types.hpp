#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace impact::llm {

enum class Role { system, user, assistant };

std::string to_string(Role role);
Role role_from_string(const std::string& s);

struct Message {
  Role role = Role::user;
  std::string text;
};

struct ChatRequest {
  std::string model_id;
  std::vector<Message> messages;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
  int max_output_tokens = 1024;
  /// Ask the provider for per-token logprobs with top alternatives.
  bool logprobs = false;

  /// Throws PreconditionError on empty messages, temperature outside [0, 2]
  /// or a non-positive token limit.
  void validate() const;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
  std::vector<std::pair<std::string, double>> top;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::int64_t total() const { return prompt_tokens + completion_tokens; }
};

struct ChatResponse {
  std::string text;
  std::optional<std::vector<TokenLogprob>> token_logprobs;
  Usage usage;
  std::int64_t provider_latency_ms = 0;
  /// Position of this exchange in the gateway call log.
  std::uint64_t call_index = 0;
  /// Hash of the request that produced this reply; stable across runs,
  /// unlike call_index which follows scheduling.
  std::string request_hash;
};

struct OutputSchema {
  std::string schema_name;
  nlohmann::json schema_body;
};

void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);
void to_json(nlohmann::json& j, const ChatRequest& r);
void from_json(const nlohmann::json& j, ChatRequest& r);
void to_json(nlohmann::json& j, const TokenLogprob& t);
void from_json(const nlohmann::json& j, TokenLogprob& t);
void to_json(nlohmann::json& j, const ChatResponse& r);
void from_json(const nlohmann::json& j, ChatResponse& r);

/// Stable hash over the request and optional schema; keys the mock and replay
/// providers.
std::string request_hash(const ChatRequest& request, const OutputSchema* schema);

/// Text of the last user message, or empty.
const std::string& last_user_text(const ChatRequest& request);

}  // namespace impact::llm
