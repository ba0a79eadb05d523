#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/llm/types.hpp"

namespace impact::llm {

/// A chat-completion backend. Implementations throw ProviderError (with the
/// transient flag set for retryable failures) or AuthError.
class Provider {
 public:
  virtual ~Provider() = default;

  /// `schema` is non-null for structured-output requests.
  virtual ChatResponse send(const ChatRequest& request, const OutputSchema* schema) = 0;

  virtual bool supports_logprobs() const { return false; }
  virtual std::string name() const = 0;
};

/// Deterministic in-process provider driven by a responder function. With a
/// pure responder, send() is a pure function of the request.
class MockProvider : public Provider {
 public:
  using Responder = std::function<ChatResponse(const ChatRequest&, const OutputSchema*)>;
  using TextResponder = std::function<std::string(const ChatRequest&)>;

  explicit MockProvider(Responder responder, bool logprobs = false);
  explicit MockProvider(TextResponder responder);

  /// Always answers `reply`.
  static std::shared_ptr<MockProvider> canned(std::string reply);

  ChatResponse send(const ChatRequest& request, const OutputSchema* schema) override;
  bool supports_logprobs() const override { return logprobs_; }
  std::string name() const override { return "mock"; }

 private:
  Responder responder_;
  bool logprobs_ = false;
};

/// Scripted replies loaded from a JSON document:
///
///   {
///     "by_hash":  {"<request hash>": "reply", ...},
///     "sequence": ["reply 1", "reply 2", ...],
///     "rules": [{"contains": "...", "regex": "...", "after": "marker",
///                "reply": "..."}, ...],
///     "default":  "reply"
///   }
///
/// Lookup order is by_hash, sequence (consumed in call order, the only
/// stateful source), the first matching rule, then default. Rules match the
/// last user message; with "after" set, only the text following the last
/// occurrence of that marker is searched.
class MockScript {
 public:
  explicit MockScript(const nlohmann::json& script);
  static MockScript from_file(const std::filesystem::path& path);

  std::string reply(const ChatRequest& request, const OutputSchema* schema) const;

 private:
  struct Rule {
    std::optional<std::string> contains;
    std::optional<std::regex> pattern;
    std::optional<std::string> after;
    std::string reply;
  };

  std::unordered_map<std::string, std::string> by_hash_;
  std::vector<std::string> sequence_;
  mutable std::shared_ptr<std::atomic<std::size_t>> cursor_;
  std::vector<Rule> rules_;
  std::optional<std::string> default_;
};

std::shared_ptr<MockProvider> make_scripted_provider(MockScript script);

/// Answers from a previous run's call log, keyed by request hash. A request
/// that was never logged is a non-transient ProviderError.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(const std::filesystem::path& call_log);

  ChatResponse send(const ChatRequest& request, const OutputSchema* schema) override;
  bool supports_logprobs() const override { return any_logprobs_; }
  std::string name() const override { return "replay"; }
  std::size_t size() const { return responses_.size(); }

 private:
  std::unordered_map<std::string, ChatResponse> responses_;
  bool any_logprobs_ = false;
};

struct OpenAiSettings {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  int timeout_seconds = 120;

  /// Reads LLM_API_KEY and LLM_BASE_URL.
  static OpenAiSettings from_env();
};

/// OpenAI-compatible /chat/completions client. Structured requests use the
/// json_schema response format.
class OpenAiProvider : public Provider {
 public:
  explicit OpenAiProvider(OpenAiSettings settings);

  ChatResponse send(const ChatRequest& request, const OutputSchema* schema) override;
  bool supports_logprobs() const override { return true; }
  std::string name() const override { return "openai"; }

  static nlohmann::json build_body(const ChatRequest& request, const OutputSchema* schema);
  static ChatResponse parse_body(const nlohmann::json& body);

 private:
  OpenAiSettings settings_;
};

}  // namespace impact::llm
