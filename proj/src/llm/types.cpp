#include "impact/llm/types.hpp"

#include "impact/common/error.hpp"
#include "impact/common/text.hpp"

namespace impact::llm {

std::string to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(const std::string& s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw PreconditionError("unknown role '" + s + "'");
}

void ChatRequest::validate() const {
  if (messages.empty()) throw PreconditionError("chat request has no messages");
  if (!(temperature >= 0.0 && temperature <= 2.0))
    throw PreconditionError("temperature must be in [0, 2]");
  if (max_output_tokens <= 0) throw PreconditionError("max_output_tokens must be positive");
}

void to_json(nlohmann::json& j, const Message& m) {
  j = {{"role", to_string(m.role)}, {"text", m.text}};
}

void from_json(const nlohmann::json& j, Message& m) {
  m.role = role_from_string(j.at("role").get<std::string>());
  m.text = j.at("text").get<std::string>();
}

void to_json(nlohmann::json& j, const ChatRequest& r) {
  j = {{"model_id", r.model_id},
       {"messages", r.messages},
       {"temperature", r.temperature},
       {"max_output_tokens", r.max_output_tokens},
       {"logprobs", r.logprobs}};
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ChatRequest& r) {
  r.model_id = j.at("model_id").get<std::string>();
  r.messages = j.at("messages").get<std::vector<Message>>();
  r.temperature = j.at("temperature").get<double>();
  r.max_output_tokens = j.at("max_output_tokens").get<int>();
  r.logprobs = j.value("logprobs", false);
  if (j.contains("seed") && !j["seed"].is_null()) r.seed = j["seed"].get<std::int64_t>();
}

void to_json(nlohmann::json& j, const TokenLogprob& t) {
  nlohmann::json top = nlohmann::json::array();
  for (const auto& [tok, lp] : t.top) top.push_back({{"token", tok}, {"logprob", lp}});
  j = {{"token", t.token}, {"logprob", t.logprob}, {"top", top}};
}

void from_json(const nlohmann::json& j, TokenLogprob& t) {
  t.token = j.at("token").get<std::string>();
  t.logprob = j.at("logprob").get<double>();
  t.top.clear();
  for (const auto& e : j.value("top", nlohmann::json::array()))
    t.top.emplace_back(e.at("token").get<std::string>(), e.at("logprob").get<double>());
}

void to_json(nlohmann::json& j, const ChatResponse& r) {
  j = {{"text", r.text},
       {"usage", {{"prompt_tokens", r.usage.prompt_tokens}, {"completion_tokens", r.usage.completion_tokens}}},
       {"provider_latency_ms", r.provider_latency_ms}};
  j["token_logprobs"] = r.token_logprobs ? nlohmann::json(*r.token_logprobs) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ChatResponse& r) {
  r.text = j.at("text").get<std::string>();
  if (j.contains("usage")) {
    r.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
    r.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
  }
  r.provider_latency_ms = j.value("provider_latency_ms", std::int64_t{0});
  if (j.contains("token_logprobs") && !j["token_logprobs"].is_null())
    r.token_logprobs = j["token_logprobs"].get<std::vector<TokenLogprob>>();
}

std::string request_hash(const ChatRequest& request, const OutputSchema* schema) {
  nlohmann::json key = request;
  if (schema) key["schema"] = {{"name", schema->schema_name}, {"body", schema->schema_body}};
  return text::sha256_hex(key.dump());
}

const std::string& last_user_text(const ChatRequest& request) {
  static const std::string kEmpty;
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it)
    if (it->role == Role::user) return it->text;
  return kEmpty;
}

}  // namespace impact::llm
