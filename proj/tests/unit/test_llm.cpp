#include <doctest.h>

#include <random>
#include <set>
#include <thread>

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/text.hpp"
#include "impact/llm/gateway.hpp"
#include "impact/llm/schema.hpp"
#include "temp_dir.hpp"

using namespace impact;
using namespace impact::llm;
using nlohmann::json;

namespace {

ChatRequest user_request(const std::string& text) {
  ChatRequest r;
  r.model_id = "test-model";
  r.messages = {{Role::user, text}};
  return r;
}

GatewayConfig fast_config() {
  GatewayConfig c;
  c.initial_backoff_ms = 1000;
  return c;
}

/// Throws transient errors for the first `failures` calls.
class FlakyProvider : public Provider {
 public:
  explicit FlakyProvider(int failures) : failures_(failures) {}
  ChatResponse send(const ChatRequest&, const OutputSchema*) override {
    ++calls;
    if (calls <= failures_) throw ProviderError("503", true);
    ChatResponse r;
    r.text = "ok";
    return r;
  }
  std::string name() const override { return "flaky"; }
  int calls = 0;

 private:
  int failures_;
};

class AuthFailProvider : public Provider {
 public:
  ChatResponse send(const ChatRequest&, const OutputSchema*) override {
    ++calls;
    throw AuthError("bad key");
  }
  std::string name() const override { return "auth"; }
  int calls = 0;
};

json valid_summary_record() {
  return json{{"input_paper_info", {{"input_paper_id", "P1"}, {"input_paper_title", "T"}, {"input_paper_year", 1997}}},
              {"impact_periods",
               json::array({{{"impact_period", "1997 - 2007"},
                             {"aspect_of_period", "method use"},
                             {"impact_description", "Used widely."},
                             {"evidence", json::array({1, 2})}}})}};
}

// Hand-written check of the impact-summary shape, independent of
// validate_json: exact key sets, scalar types, integer evidence.
bool shape_oracle(const json& j) {
  if (!j.is_object() || j.size() != 2 || !j.contains("input_paper_info") || !j.contains("impact_periods"))
    return false;
  const json& info = j["input_paper_info"];
  if (!info.is_object() || info.size() != 3) return false;
  if (!info.contains("input_paper_id") || !info["input_paper_id"].is_string()) return false;
  if (!info.contains("input_paper_title") || !info["input_paper_title"].is_string()) return false;
  if (!info.contains("input_paper_year") || !info["input_paper_year"].is_number_integer()) return false;
  const json& periods = j["impact_periods"];
  if (!periods.is_array()) return false;
  for (const json& p : periods) {
    if (!p.is_object() || p.size() != 4) return false;
    for (const char* k : {"impact_period", "aspect_of_period", "impact_description"})
      if (!p.contains(k) || !p[k].is_string()) return false;
    if (!p.contains("evidence") || !p["evidence"].is_array()) return false;
    for (const json& e : p["evidence"])
      if (!e.is_number_integer()) return false;
  }
  return true;
}

json mutate(json rec, std::mt19937& rng) {
  std::uniform_int_distribution<int> pick(0, 9);
  switch (pick(rng)) {
    case 0: rec.erase("impact_periods"); break;
    case 1: rec["input_paper_info"].erase("input_paper_year"); break;
    case 2: rec["impact_periods"][0].erase("evidence"); break;
    case 3: rec["impact_periods"][0]["evidence"] = json::array({"one"}); break;
    case 4: rec["input_paper_info"]["input_paper_year"] = "1997"; break;
    case 5: rec["extra"] = 1; break;
    case 6: rec["impact_periods"] = json::object(); break;
    case 7: rec["impact_periods"].push_back(rec["impact_periods"][0]); break;
    case 8: rec["impact_periods"] = json::array(); break;
    default: break;
  }
  return rec;
}

}  // namespace

TEST_CASE("empty messages are rejected before reaching the provider") {
  Gateway gw(MockProvider::canned("X"), fast_config());
  ChatRequest r;
  r.model_id = "m";
  CHECK_THROWS_AS(gw.complete(r), PreconditionError);
  CHECK(gw.call_log().size() == 0);

  auto hot = user_request("hi");
  hot.temperature = 2.5;
  CHECK_THROWS_AS(gw.complete(hot), PreconditionError);
}

TEST_CASE("canned mock echoes the same reply on every call") {
  Gateway gw(MockProvider::canned("X"), fast_config());
  for (int i = 0; i < 5; ++i) CHECK(gw.complete(user_request("say OK " + std::to_string(i))).text == "X");
  CHECK(gw.complete(user_request("say OK")).text.size() > 0);
}

TEST_CASE("every call is logged exactly once with increasing indices") {
  testing::TempDir dir;
  auto cfg = fast_config();
  cfg.call_log = dir / "llm_calls.jsonl";
  {
    Gateway gw(MockProvider::canned("X"), cfg);
    for (int i = 0; i < 4; ++i) {
      auto resp = gw.complete(user_request("q" + std::to_string(i)));
      CHECK(resp.call_index == static_cast<std::uint64_t>(i));
    }
  }
  auto lines = text::split_lines(read_text_file(dir / "llm_calls.jsonl"));
  std::size_t n = 0;
  for (const auto& l : lines) {
    if (l.empty()) continue;
    auto rec = json::parse(l);
    CHECK(rec["call_index"].get<std::size_t>() == n);
    CHECK(rec["request"]["messages"][0]["text"] == "q" + std::to_string(n));
    ++n;
  }
  CHECK(n == 4);
}

TEST_CASE("transient errors retry with exponential backoff") {
  auto clock = std::make_shared<ManualClock>();
  auto flaky = std::make_shared<FlakyProvider>(2);
  Gateway gw(flaky, fast_config(), clock);
  auto resp = gw.complete(user_request("x"));
  CHECK(resp.text == "ok");
  CHECK(flaky->calls == 3);
  CHECK(clock->total_slept_ms() == 1000 + 2000);
  auto recs = gw.call_log().records();
  REQUIRE(recs.size() == 1);
  CHECK(recs[0]["attempts"] == 3);
}

TEST_CASE("transient errors surface after three attempts") {
  auto clock = std::make_shared<ManualClock>();
  auto flaky = std::make_shared<FlakyProvider>(10);
  Gateway gw(flaky, fast_config(), clock);
  try {
    gw.complete(user_request("x"));
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.transient());
  }
  CHECK(flaky->calls == 3);
  CHECK(gw.call_log().size() == 1);
}

TEST_CASE("auth errors are not retried") {
  auto clock = std::make_shared<ManualClock>();
  auto p = std::make_shared<AuthFailProvider>();
  Gateway gw(p, fast_config(), clock);
  CHECK_THROWS_AS(gw.complete(user_request("x")), AuthError);
  CHECK(p->calls == 1);
  CHECK(clock->total_slept_ms() == 0);
}

TEST_CASE("token budget stops further calls") {
  auto cfg = fast_config();
  cfg.token_budget = 10;
  auto provider = std::make_shared<MockProvider>(MockProvider::Responder([](const ChatRequest&, const OutputSchema*) {
    ChatResponse r;
    r.text = "reply";
    r.usage = {6, 2};
    return r;
  }));
  Gateway gw(provider, cfg);
  gw.complete(user_request("a"));
  gw.complete(user_request("b"));
  CHECK_THROWS_AS(gw.complete(user_request("c")), BudgetExceeded);
  CHECK(gw.total_usage().total() == 16);
}

TEST_CASE("rate limiter keeps every 60 s window within the configured rpm") {
  auto clock = std::make_shared<ManualClock>(1'000'000);
  auto cfg = fast_config();
  cfg.requests_per_minute = 3;
  Gateway gw(MockProvider::canned("X"), cfg, clock);
  for (int i = 0; i < 10; ++i) gw.complete(user_request(std::to_string(i)));

  std::vector<std::int64_t> ts;
  for (const auto& rec : gw.call_log().records()) ts.push_back(rec["ts_ms"].get<std::int64_t>());
  REQUIRE(ts.size() == 10);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    int in_window = 0;
    for (std::size_t j = i; j < ts.size(); ++j)
      if (ts[j] - ts[i] < 60'000) ++in_window;
    CHECK(in_window <= 3);
  }
  CHECK(ts.back() - ts.front() >= 3 * 60'000);
}

TEST_CASE("concurrent callers get unique call indices") {
  Gateway gw(MockProvider::canned("X"), fast_config());
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&gw, t] {
      for (int i = 0; i < 25; ++i) gw.complete(user_request(std::to_string(t) + ":" + std::to_string(i)));
    });
  for (auto& t : threads) t.join();
  std::set<std::uint64_t> seen;
  for (const auto& rec : gw.call_log().records()) seen.insert(rec["call_index"].get<std::uint64_t>());
  CHECK(seen.size() == 200);
  CHECK(*seen.rbegin() == 199);
}

TEST_CASE("structured output: valid record parses on the first attempt") {
  Gateway gw(MockProvider::canned(valid_summary_record().dump()), fast_config());
  auto result = gw.complete_structured(user_request("summarize"), impact_summary_schema());
  CHECK(result.record == valid_summary_record());
  CHECK(result.call_indices.size() == 1);
}

TEST_CASE("structured output: missing evidence fails after one repair") {
  auto bad = valid_summary_record();
  bad["impact_periods"][0].erase("evidence");
  Gateway gw(MockProvider::canned(bad.dump()), fast_config());
  try {
    gw.complete_structured(user_request("summarize"), impact_summary_schema());
    FAIL("expected SchemaViolation");
  } catch (const SchemaViolation& e) {
    CHECK(e.raw_text() == bad.dump());
  }
  CHECK(gw.call_log().size() == 2);
}

TEST_CASE("structured output: repair round trip recovers") {
  auto bad = valid_summary_record();
  bad["impact_periods"][0].erase("evidence");
  auto provider = std::make_shared<MockProvider>(MockProvider::TextResponder([bad](const ChatRequest& r) {
    return r.messages.size() == 1 ? bad.dump() : "```json\n" + valid_summary_record().dump() + "\n```";
  }));
  Gateway gw(provider, fast_config());
  auto result = gw.complete_structured(user_request("summarize"), impact_summary_schema());
  CHECK(result.record == valid_summary_record());
  CHECK(result.call_indices == std::vector<std::uint64_t>{0, 1});
}

TEST_CASE("structured output agrees with an independent shape oracle on fuzzed replies") {
  std::mt19937 rng(20240611);
  int accepted = 0;
  for (int i = 0; i < 100; ++i) {
    json candidate = mutate(valid_summary_record(), rng);
    Gateway gw(MockProvider::canned(candidate.dump()), fast_config());
    bool ok = true;
    try {
      auto result = gw.complete_structured(user_request("s"), impact_summary_schema());
      CHECK(result.record.contains("impact_periods"));
      CHECK(result.record["impact_periods"].is_array());
    } catch (const SchemaViolation&) {
      ok = false;
    }
    CHECK_MESSAGE(ok == shape_oracle(candidate), candidate.dump());
    accepted += ok;
  }
  CHECK(accepted > 0);
  CHECK(accepted < 100);
}

TEST_CASE("malformed schema is a precondition error") {
  Gateway gw(MockProvider::canned("{}"), fast_config());
  CHECK_THROWS_AS(gw.complete_structured(user_request("s"), OutputSchema{"bad", json::array()}), PreconditionError);
}

TEST_CASE("impact summary schema declares every required field") {
  CHECK(declares_impact_summary_fields(impact_summary_schema().schema_body));
  auto body = impact_summary_schema().schema_body;
  body["properties"]["impact_periods"]["items"]["properties"].erase("evidence");
  CHECK_FALSE(declares_impact_summary_fields(body));
}

TEST_CASE("extract_json finds fenced and embedded documents") {
  CHECK(extract_json("{\"a\":1}")->at("a") == 1);
  CHECK(extract_json("Here:\n```json\n{\"a\":2}\n```\nthanks")->at("a") == 2);
  CHECK(extract_json("prefix [1,2,3] suffix")->size() == 3);
  CHECK_FALSE(extract_json("no json here").has_value());
}

TEST_CASE("mock script resolves by hash, sequence, rule and default") {
  auto req = user_request("Target: the model builds upon prior work");
  json script = {
      {"by_hash", {{request_hash(user_request("hashed"), nullptr), "from-hash"}}},
      {"rules", json::array({{{"after", "Target:"}, {"regex", "builds? upon"}, {"reply", "rule-hit"}},
                             {{"contains", "never"}, {"reply", "unused"}}})},
      {"default", "fallback"}};
  MockScript ms(script);
  CHECK(ms.reply(user_request("hashed"), nullptr) == "from-hash");
  CHECK(ms.reply(req, nullptr) == "rule-hit");
  CHECK(ms.reply(user_request("builds upon, but no marker"), nullptr) == "fallback");

  MockScript seq(json{{"sequence", {"a", "b"}}});
  CHECK(seq.reply(req, nullptr) == "a");
  CHECK(seq.reply(req, nullptr) == "b");
  CHECK_THROWS_AS(seq.reply(req, nullptr), ProviderError);
}

TEST_CASE("scripted mock is a pure function of the request") {
  auto provider = make_scripted_provider(MockScript(json{{"rules", json::array({{{"contains", "a"}, {"reply", "A"}}})},
                                                         {"default", "D"}}));
  Gateway gw(provider, fast_config());
  for (int i = 0; i < 3; ++i) {
    CHECK(gw.complete(user_request("xa")).text == "A");
    CHECK(gw.complete(user_request("xy")).text == "D");
  }
}

TEST_CASE("replaying a call log reproduces every response") {
  testing::TempDir dir;
  std::vector<std::string> first;
  {
    auto cfg = fast_config();
    cfg.call_log = dir / "calls.jsonl";
    auto provider = std::make_shared<MockProvider>(
        MockProvider::TextResponder([](const ChatRequest& r) { return "echo:" + r.messages[0].text; }));
    Gateway gw(provider, cfg);
    for (int i = 0; i < 5; ++i) first.push_back(gw.complete(user_request("m" + std::to_string(i))).text);
  }
  auto replay = std::make_shared<ReplayProvider>(dir / "calls.jsonl");
  CHECK(replay->size() == 5);
  Gateway gw(replay, fast_config());
  for (int i = 0; i < 5; ++i) CHECK(gw.complete(user_request("m" + std::to_string(i))).text == first[i]);
  CHECK_THROWS_AS(gw.complete(user_request("never logged")), ProviderError);
}
