#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>

#include "impact/common/error.hpp"
#include "impact/common/url.hpp"
#include "impact/llm/provider.hpp"

namespace impact::llm {

OpenAiSettings OpenAiSettings::from_env() {
  OpenAiSettings s;
  if (const char* key = std::getenv("LLM_API_KEY")) s.api_key = key;
  if (const char* base = std::getenv("LLM_BASE_URL"); base && *base) s.base_url = base;
  return s;
}

OpenAiProvider::OpenAiProvider(OpenAiSettings settings) : settings_(std::move(settings)) {
  if (settings_.api_key.empty()) throw AuthError("LLM_API_KEY is not set");
}

nlohmann::json OpenAiProvider::build_body(const ChatRequest& request, const OutputSchema* schema) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  nlohmann::json body = {{"model", request.model_id},
                         {"messages", messages},
                         {"temperature", request.temperature},
                         {"max_tokens", request.max_output_tokens}};
  if (request.seed) body["seed"] = *request.seed;
  if (request.logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = 20;
  }
  if (schema) {
    body["response_format"] = {
        {"type", "json_schema"},
        {"json_schema", {{"name", schema->schema_name}, {"schema", schema->schema_body}, {"strict", true}}}};
  }
  return body;
}

ChatResponse OpenAiProvider::parse_body(const nlohmann::json& body) {
  ChatResponse resp;
  const auto& choices = body.at("choices");
  if (!choices.is_array() || choices.empty()) throw ProviderError("response has no choices");
  const auto& message = choices[0].at("message");
  if (message.contains("refusal") && message["refusal"].is_string())
    throw ProviderError("model refused: " + message["refusal"].get<std::string>());
  if (auto c = message.find("content"); c != message.end() && c->is_string()) resp.text = c->get<std::string>();
  if (choices[0].contains("logprobs") && choices[0]["logprobs"].is_object() &&
      choices[0]["logprobs"].contains("content") && choices[0]["logprobs"]["content"].is_array()) {
    std::vector<TokenLogprob> tokens;
    for (const auto& t : choices[0]["logprobs"]["content"]) {
      TokenLogprob tl;
      tl.token = t.value("token", "");
      tl.logprob = t.value("logprob", 0.0);
      for (const auto& alt : t.value("top_logprobs", nlohmann::json::array()))
        tl.top.emplace_back(alt.value("token", ""), alt.value("logprob", 0.0));
      tokens.push_back(std::move(tl));
    }
    resp.token_logprobs = std::move(tokens);
  }
  if (body.contains("usage") && body["usage"].is_object()) {
    resp.usage.prompt_tokens = body["usage"].value("prompt_tokens", std::int64_t{0});
    resp.usage.completion_tokens = body["usage"].value("completion_tokens", std::int64_t{0});
  }
  return resp;
}

ChatResponse OpenAiProvider::send(const ChatRequest& request, const OutputSchema* schema) {
  const BaseUrl base = split_base_url(settings_.base_url);
  httplib::Client client(base.scheme_host_port);
  client.set_connection_timeout(std::chrono::seconds(15));
  client.set_read_timeout(std::chrono::seconds(settings_.timeout_seconds));
  client.set_write_timeout(std::chrono::seconds(30));
  client.set_bearer_token_auth(settings_.api_key);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(base.path_prefix + "/chat/completions", build_body(request, schema).dump(),
                         "application/json");
  const auto latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();

  if (!res) throw ProviderError("transport failure: " + httplib::to_string(res.error()), true);
  if (res->status == 401 || res->status == 403) throw AuthError("provider rejected credentials (" + std::to_string(res->status) + ")");
  if (res->status == 429 || res->status >= 500)
    throw ProviderError("provider status " + std::to_string(res->status), true);
  if (res->status != 200)
    throw ProviderError("provider status " + std::to_string(res->status) + ": " + res->body.substr(0, 300));

  auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw ProviderError("provider returned invalid JSON", true);
  ChatResponse resp;
  try {
    resp = parse_body(body);
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("unexpected response shape: ") + e.what());
  }
  resp.provider_latency_ms = latency;
  return resp;
}

}  // namespace impact::llm
