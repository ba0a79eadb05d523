#include <fstream>

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/llm/provider.hpp"

namespace impact::llm {

MockProvider::MockProvider(Responder responder, bool logprobs)
    : responder_(std::move(responder)), logprobs_(logprobs) {}

MockProvider::MockProvider(TextResponder responder)
    : responder_([r = std::move(responder)](const ChatRequest& req, const OutputSchema*) {
        ChatResponse resp;
        resp.text = r(req);
        return resp;
      }) {}

std::shared_ptr<MockProvider> MockProvider::canned(std::string reply) {
  return std::make_shared<MockProvider>(TextResponder([reply = std::move(reply)](const ChatRequest&) { return reply; }));
}

ChatResponse MockProvider::send(const ChatRequest& request, const OutputSchema* schema) {
  ChatResponse resp = responder_(request, schema);
  if (resp.usage.prompt_tokens == 0 && resp.usage.completion_tokens == 0) {
    std::size_t chars = 0;
    for (const auto& m : request.messages) chars += m.text.size();
    resp.usage.prompt_tokens = static_cast<std::int64_t>(chars / 4);
    resp.usage.completion_tokens = static_cast<std::int64_t>(resp.text.size() / 4);
  }
  return resp;
}

MockScript::MockScript(const nlohmann::json& script) : cursor_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (!script.is_object()) throw ConfigError("mock script must be a JSON object");
  const auto hashed = script.value("by_hash", nlohmann::json::object());
  for (auto it = hashed.begin(); it != hashed.end(); ++it) by_hash_[it.key()] = it.value().get<std::string>();
  for (const auto& s : script.value("sequence", nlohmann::json::array())) sequence_.push_back(s.get<std::string>());
  for (const auto& r : script.value("rules", nlohmann::json::array())) {
    Rule rule;
    if (r.contains("contains")) rule.contains = r["contains"].get<std::string>();
    if (r.contains("regex")) {
      try {
        rule.pattern = std::regex(r["regex"].get<std::string>(), std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& e) {
        throw ConfigError(std::string("bad mock rule regex: ") + e.what());
      }
    }
    if (r.contains("after")) rule.after = r["after"].get<std::string>();
    if (!r.contains("reply")) throw ConfigError("mock rule without reply");
    rule.reply = r["reply"].is_string() ? r["reply"].get<std::string>() : r["reply"].dump();
    rules_.push_back(std::move(rule));
  }
  if (script.contains("default"))
    default_ = script["default"].is_string() ? script["default"].get<std::string>() : script["default"].dump();
}

MockScript MockScript::from_file(const std::filesystem::path& path) {
  return MockScript(read_json_file(path));
}

std::string MockScript::reply(const ChatRequest& request, const OutputSchema* schema) const {
  if (!by_hash_.empty()) {
    if (auto it = by_hash_.find(request_hash(request, schema)); it != by_hash_.end()) return it->second;
  }
  if (!sequence_.empty()) {
    std::size_t i = cursor_->fetch_add(1);
    if (i < sequence_.size()) return sequence_[i];
  }
  const std::string& user = last_user_text(request);
  for (const auto& rule : rules_) {
    std::string_view scope = user;
    if (rule.after) {
      auto pos = user.rfind(*rule.after);
      if (pos == std::string::npos) continue;
      scope = std::string_view(user).substr(pos + rule.after->size());
    }
    if (rule.contains && scope.find(*rule.contains) == std::string_view::npos) continue;
    if (rule.pattern && !std::regex_search(scope.begin(), scope.end(), *rule.pattern)) continue;
    return rule.reply;
  }
  if (default_) return *default_;
  throw ProviderError("mock script has no reply for request " + request_hash(request, schema));
}

std::shared_ptr<MockProvider> make_scripted_provider(MockScript script) {
  auto shared = std::make_shared<MockScript>(std::move(script));
  return std::make_shared<MockProvider>(MockProvider::Responder(
      [shared](const ChatRequest& req, const OutputSchema* schema) {
        ChatResponse resp;
        resp.text = shared->reply(req, schema);
        return resp;
      }));
}

ReplayProvider::ReplayProvider(const std::filesystem::path& call_log) {
  std::ifstream in(call_log);
  if (!in) throw IoError("cannot open call log " + call_log.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto rec = nlohmann::json::parse(line);
      if (!rec.contains("response") || rec["response"].is_null()) continue;
      auto resp = rec["response"].get<ChatResponse>();
      if (resp.token_logprobs) any_logprobs_ = true;
      responses_.emplace(rec.at("request_hash").get<std::string>(), std::move(resp));
    } catch (const nlohmann::json::exception& e) {
      throw CorruptRecord(line_no, e.what());
    }
  }
}

ChatResponse ReplayProvider::send(const ChatRequest& request, const OutputSchema* schema) {
  auto it = responses_.find(request_hash(request, schema));
  if (it == responses_.end()) throw ProviderError("replay log has no response for this request");
  return it->second;
}

}  // namespace impact::llm
