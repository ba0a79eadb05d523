#include <doctest.h>

#include <algorithm>
#include <mutex>
#include <random>
#include <regex>
#include <set>
#include <unordered_map>

#include "impact/common/error.hpp"
#include "impact/common/text.hpp"
#include "impact/intent/analysis.hpp"
#include "impact/intent/prompt.hpp"
#include "temp_dir.hpp"

using namespace impact;
using namespace impact::intent;
using nlohmann::json;

namespace {

constexpr auto IR = IntentClass::impact_revealing;
constexpr auto OT = IntentClass::other;

IclConfig config_with(int k, std::uint64_t seed, std::vector<IclExample> pool = seed_pool()) {
  IclConfig c;
  c.k = k;
  c.shuffle_seed = seed;
  c.example_pool = std::move(pool);
  return c;
}

// Example contexts in prompt order, read back from the rendered text.
std::vector<std::string> shots_in(const std::string& prompt) {
  std::vector<std::string> out;
  static const std::regex line(R"(^Citation context: (.*)$)");
  for (const auto& l : text::split_lines(prompt)) {
    std::smatch m;
    if (std::regex_match(l, m, line)) out.push_back(m[1]);
  }
  return out;
}

std::string target_of(const llm::ChatRequest& r) {
  const auto& prompt = r.messages.front().text;
  auto pos = prompt.rfind(kTargetMarker);
  auto rest = prompt.substr(pos + std::string(kTargetMarker).size() + 1);
  return rest.substr(0, rest.find('\n'));
}

llm::GatewayConfig quiet() { return llm::GatewayConfig{}; }

}  // namespace

TEST_CASE("metrics: perfect predictor") {
  std::map<std::string, IntentClass> gold = {{"a", IR}, {"b", OT}, {"c", IR}};
  auto m = compute_metrics(gold, gold);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
  CHECK(m.accuracy == 1.0);
}

TEST_CASE("metrics: hand-counted confusion matrix") {
  std::map<std::string, IntentClass> gold = {{"1", IR}, {"2", IR}, {"3", OT}, {"4", IR}, {"5", OT}};
  std::map<std::string, IntentClass> pred = {{"1", IR}, {"2", IR}, {"3", IR}, {"4", OT}, {"5", OT}};
  auto m = compute_metrics(pred, gold);
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.tn == 1);
  CHECK(m.precision == doctest::Approx(2.0 / 3.0));
  CHECK(m.recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(m.accuracy == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("metrics: always-impact baseline with 53% positives") {
  std::map<std::string, IntentClass> gold;
  for (int i = 0; i < 100; ++i) gold["id" + std::to_string(i)] = i < 53 ? IR : OT;
  auto m = always_impact_baseline(gold);
  CHECK(std::round(m.precision * 100) / 100 == doctest::Approx(0.53));
  CHECK(m.recall == 1.0);
  CHECK(std::round(m.f1 * 100) / 100 == doctest::Approx(0.69));
  CHECK(std::round(m.accuracy * 100) / 100 == doctest::Approx(0.53));
}

TEST_CASE("metrics: identities hold on random predictions") {
  std::mt19937 rng(11);
  for (int round = 0; round < 200; ++round) {
    std::map<std::string, IntentClass> gold, pred;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      gold[std::to_string(i)] = rng() % 2 ? IR : OT;
      pred[std::to_string(i)] = rng() % 2 ? IR : OT;
    }
    auto m = compute_metrics(pred, gold);
    CHECK(m.accuracy == doctest::Approx(static_cast<double>(m.tp + m.tn) / n));
    if (m.precision + m.recall > 0)
      CHECK(m.f1 == doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
    else
      CHECK(m.f1 == 0.0);
    for (double v : {m.precision, m.recall, m.f1, m.accuracy}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("metrics: id sets must match") {
  CHECK_THROWS_AS(compute_metrics({{"a", IR}}, {{"b", IR}}), IdMismatch);
  CHECK_THROWS_AS(compute_metrics({{"a", IR}}, {{"a", IR}, {"b", OT}}), IdMismatch);
}

TEST_CASE("prompt: zero-shot has instructions and target only") {
  auto prompt = build_icl_prompt(config_with(0, 1), "We use X [1].");
  CHECK(prompt.find("Below are examples") == std::string::npos);
  CHECK(shots_in(prompt).empty());
  CHECK(prompt.find("describe, in a few words, the intention") != std::string::npos);
  CHECK(prompt.find(std::string(kTargetMarker) + " We use X [1].") != std::string::npos);
}

TEST_CASE("prompt: deterministic, and reseeding only reorders") {
  const auto a = build_icl_prompt(config_with(10, 1), "ctx");
  CHECK(a == build_icl_prompt(config_with(10, 1), "ctx"));
  const auto b = build_icl_prompt(config_with(10, 2), "ctx");
  auto sa = shots_in(a), sb = shots_in(b);
  CHECK(sa.size() == 10);
  CHECK(sa != sb);
  std::multiset<std::string> ma(sa.begin(), sa.end()), mb(sb.begin(), sb.end());
  CHECK(ma == mb);
  std::multiset<std::string> pool;
  for (const auto& e : seed_pool()) pool.insert(text::collapse_whitespace(e.context_text));
  CHECK(ma == pool);
}

TEST_CASE("prompt: subsets of k shots are drawn from the pool") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto shots = select_shots(config_with(4, seed));
    CHECK(shots.size() == 4);
    std::set<std::string> distinct;
    for (const auto& s : shots) {
      distinct.insert(s.context_text);
      CHECK(std::find(seed_pool().begin(), seed_pool().end(), s) != seed_pool().end());
    }
    CHECK(distinct.size() == 4);
  }
}

TEST_CASE("prompt: k beyond the pool is a config error") {
  CHECK_THROWS_AS(build_icl_prompt(config_with(11, 1), "x"), ConfigError);
}

TEST_CASE("shipped pool file matches the built-in seed examples") {
  auto pool = load_pool(std::filesystem::path(IMPACT_SOURCE_DIR) / "data" / "icl_pool.jsonl");
  CHECK(pool == seed_pool());
  CHECK(pool.size() == 10);
  CHECK(std::count_if(pool.begin(), pool.end(), [](const auto& e) { return e.intent_class == IR; }) == 6);
}

TEST_CASE("pool loading enforces short intents") {
  testing::TempDir dir;
  std::ofstream(dir / "pool.jsonl") << json(IclExample{"ctx", "one two three four five six seven eight nine ten eleven "
                                                              "twelve thirteen fourteen fifteen sixteen",
                                                       IR})
                                           .dump()
                                    << "\n";
  CHECK_THROWS_AS(load_pool(dir / "pool.jsonl"), CorruptRecord);
}

TEST_CASE("reply parser on scripted replies") {
  struct Case {
    std::string reply;
    std::optional<IntentClass> cls;
    std::string intent;
  };
  std::vector<Case> cases = {
      {"intent: X | class: impact-revealing", IR, "X"},
      {"intent: method use | class: Impact Revealing", IR, "method use"},
      {"Intent: background | Class: other", OT, "background"},
      {"Some reasoning first.\nintent: use of data | class: \"impact-revealing\".", IR, "use of data"},
      {"intent: x | class: non-impact-revealing", OT, "x"},
      {"intent: x | class: not impact revealing", OT, "x"},
      {"I think it is\nother", OT, ""},
      {"intent: another thing | class: unsure", std::nullopt, ""},
      {"intent: x | class: impact-revealing or other", std::nullopt, ""},
      {"", std::nullopt, ""},
  };
  for (const auto& c : cases) {
    auto parsed = parse_intent_reply(c.reply);
    CHECK_MESSAGE(parsed.has_value() == c.cls.has_value(), c.reply);
    if (parsed && c.cls) {
      CHECK(parsed->intent_class == *c.cls);
      CHECK(parsed->intent_text == c.intent);
    }
  }
}

TEST_CASE("generate_intent on seed contexts with a scripted model") {
  json script = {{"rules", json::array({{{"after", kTargetMarker}, {"contains", "minimization process"},
                                         {"reply", "intent: use of minimization methodology | class: impact-revealing"}},
                                        {{"after", kTargetMarker}, {"contains", "Chiu and Nichols"},
                                         {"reply", "intent: background about NER methods | class: other"}}})}};
  llm::Gateway gw(llm::make_scripted_provider(llm::MockScript(script)), quiet());
  IntentEngine engine(gw, "m");
  auto a = engine.generate_intent("c1", "In order to reduce the memory requirements, we apply a minimization process [1].",
                                  config_with(10, 3), 0);
  CHECK(a.intent_class == IR);
  CHECK(a.intent_text == "use of minimization methodology");
  auto b = engine.generate_intent("c2", "Chiu and Nichols (2016) introduced convolutional neural networks for NER",
                                  config_with(10, 3), 1);
  CHECK(b.intent_class == OT);
  CHECK(b.run_index == 1);
}

TEST_CASE("unreadable replies get one repair, then ParseError") {
  {
    llm::Gateway gw(llm::make_scripted_provider(llm::MockScript(json{{"sequence", {"hmm", "intent: x | class: other"}}})),
                    quiet());
    IntentEngine engine(gw, "m");
    auto a = engine.generate_intent("c", "ctx", config_with(0, 0), 0);
    CHECK(a.intent_class == OT);
    CHECK(gw.call_log().size() == 2);
  }
  {
    llm::Gateway gw(llm::MockProvider::canned("no idea"), quiet());
    IntentEngine engine(gw, "m");
    try {
      engine.generate_intent("c", "ctx", config_with(0, 0), 0);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.raw_text() == "no idea");
    }
    CHECK(gw.call_log().size() == 2);
  }
}

TEST_CASE("majority vote: forced majority and unanimity") {
  auto t = tally_votes({IR, IR, OT});
  CHECK(t == VoteTally{2, 1});
  CHECK(majority_class(t) == IR);
  auto u = tally_votes({OT, OT, OT});
  CHECK(u == VoteTally{0, 3});
  CHECK(majority_class(u) == OT);
  CHECK_THROWS_AS(tally_votes({IR, OT}), PreconditionError);
  CHECK_THROWS_AS(tally_votes({}), PreconditionError);
}

TEST_CASE("majority vote: permutation invariant and tie-free on random triples") {
  std::mt19937 rng(99);
  for (int i = 0; i < 1000; ++i) {
    std::vector<IntentClass> v = {rng() % 2 ? IR : OT, rng() % 2 ? IR : OT, rng() % 2 ? IR : OT};
    const int impact = static_cast<int>(std::count(v.begin(), v.end(), IR));
    const IntentClass oracle = impact >= 2 ? IR : OT;
    std::sort(v.begin(), v.end());
    do {
      auto t = tally_votes(v);
      CHECK(t.impact_votes != t.other_votes);
      CHECK(t.impact_votes + t.other_votes == 3);
      CHECK(majority_class(t) == oracle);
    } while (std::next_permutation(v.begin(), v.end()));
  }
}

TEST_CASE("chosen intent comes from the first agreeing run") {
  auto c = combine_runs("x", {{"x", "second", IR, 1}, {"x", "zeroth", OT, 0}, {"x", "first", IR, 2}});
  CHECK(c.final_class == IR);
  CHECK(c.chosen_intent_text == "second");
}

TEST_CASE("scripted 72% full agreement is measured exactly") {
  std::mutex mu;
  std::unordered_map<std::string, int> seen;
  auto provider = std::make_shared<llm::MockProvider>(llm::MockProvider::TextResponder([&](const llm::ChatRequest& r) {
    const auto target = target_of(r);
    int run;
    {
      std::lock_guard lock(mu);
      run = seen[target]++;
    }
    const int idx = std::stoi(target.substr(target.find('#') + 1));
    const bool dissent = idx >= 72 && run == 2;
    return std::string("intent: t | class: ") + (dissent ? "other" : "impact-revealing");
  }));
  llm::Gateway gw(provider, quiet());
  IntentEngine engine(gw, "m");
  std::vector<corpus::CitationContext> contexts;
  for (int i = 0; i < 100; ++i) contexts.push_back({"c" + std::to_string(i), "P", "C", "t", 2000, "context #" + std::to_string(i)});
  auto classified = engine.classify_all(contexts, config_with(3, 5), 4);
  CHECK(full_agreement_rate(classified) == doctest::Approx(0.72));
  for (std::size_t i = 0; i < classified.size(); ++i) {
    CHECK(classified[i].context_id == contexts[i].context_id);
    CHECK(classified[i].final_class == IR);
  }
  CHECK(gw.call_log().size() == 300);
}

TEST_CASE("classification records round trip through JSON") {
  auto c = combine_runs("x", {{"x", "a", IR, 0}, {"x", "b", OT, 1}, {"x", "c", IR, 2}});
  CHECK(json(c).get<ClassifiedCitation>() == c);
}

TEST_CASE("k sweep steps from baseline to perfect at K=10") {
  std::vector<IclExample> dataset;
  for (int i = 0; i < 100; ++i)
    dataset.push_back({"item " + std::to_string(i) + (i % 2 ? " pos" : " neg"), "t", i % 2 ? IR : OT});
  auto provider = std::make_shared<llm::MockProvider>(llm::MockProvider::TextResponder([](const llm::ChatRequest& r) {
    const auto shots = shots_in(r.messages.front().text).size();
    const auto target = target_of(r);
    if (shots < 10) return std::string("intent: t | class: impact-revealing");
    const bool pos = target.size() >= 3 && target.substr(target.size() - 3) == "pos";
    return std::string("intent: t | class: ") + (pos ? "impact-revealing" : "other");
  }));
  llm::Gateway gw(provider, quiet());
  IntentEngine engine(gw, "m");

  CHECK_THROWS_AS(run_k_sweep(engine, dataset, {5, 41}, 2, 7), ConfigError);
  CHECK(gw.call_log().size() == 0);

  auto report = run_k_sweep(engine, dataset, {0, 5, 10, 40}, 2, 7, 2);
  CHECK(report.train_size == 40);
  CHECK(report.dev_size == 30);
  CHECK(report.test_size == 30);
  REQUIRE(report.points.size() == 4);
  for (int i : {0, 1}) {
    CHECK(report.points[i].test.accuracy == doctest::Approx(report.test_always_impact.accuracy));
    CHECK(report.points[i].dev.recall == 1.0);
  }
  for (int i : {2, 3}) {
    CHECK(report.points[i].dev.f1 == 1.0);
    CHECK(report.points[i].test.accuracy == 1.0);
  }
  CHECK(gw.call_log().size() == 4 * 2 * 60);
}

TEST_CASE("k equal to the pool keeps the shot set fixed") {
  std::set<std::string> first;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto shots = select_shots(config_with(10, seed));
    std::set<std::string> s;
    for (const auto& e : shots) s.insert(e.context_text);
    if (seed == 0) first = s;
    CHECK(s == first);
  }
}

TEST_CASE("sweep split sizes follow floor 40/30 and remainder") {
  std::vector<IclExample> items(17, IclExample{"c", "t", OT});
  auto s = split_for_sweep(items, 1);
  CHECK(s.train.size() == 6);
  CHECK(s.dev.size() == 5);
  CHECK(s.test.size() == 6);
}

TEST_CASE("external label mapping") {
  using S = ExternalScheme;
  CHECK(map_external_label(S::multicite, "Uses") == IR);
  CHECK(map_external_label(S::multicite, "Background") == OT);
  CHECK(map_external_label(S::multicite, "Future Work") == OT);
  CHECK(map_external_label(S::multicite, "future_work") == OT);
  CHECK(map_external_label(S::multicite, "Motivation") == IR);
  CHECK(map_external_label(S::multicite, "Similar/Difference") == IR);
  CHECK(map_external_label(S::multicite, "Extension") == IR);
  CHECK(map_external_label(S::scaffolds, "Background") == OT);
  CHECK(map_external_label(S::scaffolds, "Method") == IR);
  CHECK(map_external_label(S::scaffolds, "Result") == IR);
  CHECK(map_external_label(S::meaningful, "meaningful") == IR);
  CHECK(map_external_label(S::meaningful, "non-meaningful") == OT);
  CHECK_THROWS_AS(map_external_label(S::multicite, "FutureWork-typo"), UnknownLabel);
  CHECK_THROWS_AS(map_external_label(S::scaffolds, "Uses"), UnknownLabel);
}

TEST_CASE("field distribution splits") {
  using F = corpus::Field;
  std::vector<ClassifiedRecord> recs;
  auto add = [&](const std::string& paper, F field, std::optional<int> year, std::int64_t cites, IntentClass c) {
    recs.push_back({"c" + std::to_string(recs.size()), paper, field, year, cites, c, "x"});
  };
  // Ten papers so the top 20% is exactly two papers (P0, P1).
  for (int p = 0; p < 10; ++p) {
    const F field = p % 2 ? F::medicine : F::psychology;
    add("P" + std::to_string(p), field, 2024 - p, 1000 - p * 10, p < 2 ? IR : OT);
    add("P" + std::to_string(p), field, 2010, 1000 - p * 10, IR);
  }
  add("P9", F::medicine, std::nullopt, 910, OT);

  auto all = field_distribution(recs, Split::all);
  for (const auto& [f, s] : all) CHECK(s.impact_pct + s.other_pct == doctest::Approx(100.0));

  // Independent count for psychology/recent: years 2024..2020 inclusive.
  std::size_t n = 0, imp = 0;
  for (const auto& r : recs)
    if (r.field == F::psychology && r.citing_year && *r.citing_year >= 2020) {
      ++n;
      imp += r.final_class == IR;
    }
  auto recent = field_distribution(recs, Split::recent);
  CHECK(recent[F::psychology].n == n);
  CHECK(recent[F::psychology].impact_pct == doctest::Approx(100.0 * imp / n));

  auto high = field_distribution(recs, Split::highly_cited);
  CHECK(high[F::psychology].n == 2);
  CHECK(high[F::medicine].n == 2);
  CHECK(high[F::psychology].impact_pct == 100.0);
  auto low = field_distribution(recs, Split::less_cited);
  CHECK(low[F::psychology].n + low[F::medicine].n == recs.size() - 4);

  std::vector<ClassifiedRecord> all_impact = {{"a", "P", F::other, 2000, 5, IR, "x"}, {"b", "P", F::other, 2001, 5, IR, "y"}};
  auto degenerate = field_distribution(all_impact, Split::all);
  CHECK(degenerate[F::other].impact_pct == 100.0);
  CHECK(degenerate[F::other].other_pct == 0.0);
  CHECK_THROWS_AS(field_distribution({}, Split::all), EmptySplit);
}

TEST_CASE("intent frequency") {
  using F = corpus::Field;
  std::vector<ClassifiedRecord> recs;
  auto add = [&](const std::string& intent, IntentClass c = IR) {
    recs.push_back({"c" + std::to_string(recs.size()), "P", F::other, 2000, 1, c, intent});
  };
  for (int i = 0; i < 3; ++i) add("A");
  add("b ");
  add("B");
  add("c");
  add("ignored", OT);
  auto top = intent_frequency(recs, "P", 2);
  CHECK(top == std::vector<IntentTheme>{{"a", 3}, {"b", 2}});
  CHECK(intent_frequency(recs, "P", 10).size() == 3);

  std::vector<ClassifiedRecord> same;
  for (int i = 0; i < 7; ++i) same.push_back({"x" + std::to_string(i), "Q", F::other, 2000, 1, IR, "method use"});
  CHECK(intent_frequency(same, "Q", 5) == std::vector<IntentTheme>{{"method use", 7}});

  std::vector<ClassifiedRecord> tie = {{"1", "T", F::other, 2000, 1, IR, "zeta"}, {"2", "T", F::other, 2000, 1, IR, "alpha"}};
  CHECK(intent_frequency(tie, "T", 1).front().intent == "alpha");
  CHECK_THROWS_AS(intent_frequency(recs, "NONE", 3), NoImpactCitations);
}

TEST_CASE("external predictions file") {
  testing::TempDir dir;
  std::ofstream(dir / "preds_multicite.jsonl") << R"({"context_id":"a","label":"Uses"})" "\n"
                                               << R"({"context_id":"b","label":"Background"})" "\n";
  auto preds = load_external_predictions(ExternalScheme::multicite, dir / "preds_multicite.jsonl");
  CHECK(preds == std::map<std::string, IntentClass>{{"a", IR}, {"b", OT}});
}
