#include <doctest.h>

#include <algorithm>
#include <random>
#include <regex>
#include <set>

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/text.hpp"
#include "impact/summarizer/summarizer.hpp"
#include "temp_dir.hpp"

using namespace impact;
using namespace impact::summarizer;
using nlohmann::json;

namespace {

constexpr auto IR = intent::IntentClass::impact_revealing;
constexpr auto OT = intent::IntentClass::other;

corpus::Paper paper_of(const std::string& id, int year = 1997, int cites = 10) {
  return {id, "Title of " + id, year, corpus::Field::computer_science, cites};
}

EvidenceItem item(const std::string& id, std::optional<int> year, std::optional<intent::IntentClass> cls,
                  std::string text = "", std::string intent_text = "adopted the method") {
  corpus::CitationContext c;
  c.context_id = id;
  c.cited_paper_id = "P";
  c.citing_paper_id = "C" + id;
  c.citing_title = "Citing " + id;
  c.citing_year = year;
  c.text = text.empty() ? "Context sentence for " + id + " [1]." : std::move(text);
  return {c, cls, std::move(intent_text)};
}

struct PromptLine {
  int id;
  int year;
  std::size_t fields;
};

// Evidence lines as they appear in a prompt, read back independently.
std::vector<PromptLine> prompt_lines(const std::string& prompt) {
  static const std::regex head(R"(^<citation ID: (\d+) \| citation title: .* \| citation year: (\d{4}) \| .*>$)");
  std::vector<PromptLine> out;
  for (const auto& l : text::split_lines(prompt)) {
    std::smatch m;
    if (!std::regex_match(l, m, head)) continue;
    std::size_t fields = 0;
    for (const char* f : {"citation ID: ", "citation title: ", "citation year: ", "citation context: ",
                          "citation intent: "})
      if (l.find(f) != std::string::npos) ++fields;
    out.push_back({std::stoi(m[1]), std::stoi(m[2]), fields});
  }
  return out;
}

std::string one_period_reply(const std::string& label, std::vector<int> evidence) {
  json r = {{"input_paper_info", {{"input_paper_id", "P"}, {"input_paper_title", "T"}, {"input_paper_year", 1997}}},
            {"impact_periods",
             {{{"impact_period", label},
               {"aspect_of_period", "Foundation"},
               {"impact_description", "Used as a basis."},
               {"evidence", evidence}}}}};
  return r.dump();
}

// Cites every evidence id in the prompt, one period per distinct year.
std::string echo_reply(const llm::ChatRequest& req) {
  const auto lines = prompt_lines(req.messages.back().text);
  std::map<int, std::vector<int>> by_year;
  for (const auto& l : lines) by_year[l.year].push_back(l.id);
  json periods = json::array();
  for (auto it = by_year.rbegin(); it != by_year.rend(); ++it)
    periods.push_back({{"impact_period", std::to_string(it->first) + " - " + std::to_string(it->first)},
                       {"aspect_of_period", "Use"},
                       {"impact_description", "Cited " + std::to_string(it->second.size()) + " times."},
                       {"evidence", it->second}});
  if (periods.empty())
    periods.push_back({{"impact_period", "2000 - present"},
                       {"aspect_of_period", "Background"},
                       {"impact_description", "General recognition."},
                       {"evidence", json::array()}});
  return json{{"input_paper_info", {{"input_paper_id", "x"}, {"input_paper_title", "x"}, {"input_paper_year", 2000}}},
              {"impact_periods", periods}}
      .dump();
}

std::shared_ptr<llm::MockProvider> echo_provider() {
  return std::make_shared<llm::MockProvider>(llm::MockProvider::TextResponder(echo_reply));
}

PromptVariant variant(CitationMode c, bool intents, Ordering o = Ordering::chronological, std::uint64_t seed = 0) {
  return {c, intents, o, seed};
}

}  // namespace

TEST_CASE("variant grid has nine distinct variants and names round trip") {
  auto grid = variant_grid(7);
  CHECK(grid.size() == 9);
  std::set<std::string> names;
  for (const auto& v : grid) {
    names.insert(v.name());
    CHECK(PromptVariant::from_name(v.name(), 7) == v);
  }
  CHECK(names.size() == 9);
  CHECK(std::count_if(grid.begin(), grid.end(), [](auto& v) { return v.citations == CitationMode::none; }) == 1);
  CHECK_THROWS_AS(variant(CitationMode::none, true).validate(), ConfigError);
  CHECK_THROWS_AS(PromptVariant::from_name("all@sideways"), ConfigError);
}

TEST_CASE("none variant carries title and year and no evidence") {
  auto p = assemble_summary_prompt(paper_of("P"), {}, variant(CitationMode::none, false));
  CHECK(p.text.find("Title of P") != std::string::npos);
  CHECK(p.text.find("1997") != std::string::npos);
  CHECK(p.text.find("Generate an impact summary about") != std::string::npos);
  CHECK(p.text.find("<citation ID") == std::string::npos);
  CHECK(p.evidence_map.empty());
  // A citation-free variant ignores whatever candidates exist.
  CHECK(select_evidence({item("a", 2001, IR)}, variant(CitationMode::none, false)).empty());
}

TEST_CASE("chronological order is non-decreasing and intents add the fifth field") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EvidenceItem> ev;
    const int n = 1 + trial % 12;
    for (int i = 0; i < n; ++i)
      ev.push_back(item("c" + std::to_string(i), 1998 + static_cast<int>(rng() % 20), IR));
    for (bool intents : {false, true}) {
      auto p = assemble_summary_prompt(paper_of("P"), ev, variant(CitationMode::all, intents));
      auto lines = prompt_lines(p.text);
      REQUIRE(lines.size() == ev.size());
      for (std::size_t i = 0; i < lines.size(); ++i) {
        CHECK(lines[i].id == static_cast<int>(i) + 1);
        CHECK(lines[i].fields == (intents ? 5u : 4u));
        if (i > 0) CHECK(lines[i - 1].year <= lines[i].year);
      }
      CHECK(p.text.find(intents ? "five components" : "four components") != std::string::npos);
    }
  }
}

TEST_CASE("seeded shuffle is reproducible and the map follows prompt order") {
  std::vector<EvidenceItem> ev;
  for (int i = 0; i < 20; ++i) ev.push_back(item("c" + std::to_string(i), 2000 + i, IR));
  auto a = assemble_summary_prompt(paper_of("P"), ev, variant(CitationMode::all, false, Ordering::seeded_shuffle, 5));
  auto b = assemble_summary_prompt(paper_of("P"), ev, variant(CitationMode::all, false, Ordering::seeded_shuffle, 5));
  auto c = assemble_summary_prompt(paper_of("P"), ev, variant(CitationMode::all, false, Ordering::seeded_shuffle, 6));
  CHECK(a.text == b.text);
  CHECK(a.text != c.text);
  auto lines = prompt_lines(a.text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    CHECK(a.evidence_map[i].id == lines[i].id);
    CHECK(a.evidence_map[i].citing_year == lines[i].year);
  }
}

TEST_CASE("evidence selection per variant") {
  std::vector<EvidenceItem> ev = {item("a", 2001, IR), item("b", 2002, OT), item("c", std::nullopt, IR),
                                  item("d", 2003, IR)};
  CHECK(select_evidence(ev, variant(CitationMode::all, true)).size() == 3);
  auto only = select_evidence(ev, variant(CitationMode::impact_only, false));
  REQUIRE(only.size() == 2);
  CHECK(only[0].context.context_id == "a");
  CHECK(only[1].context.context_id == "d");

  CHECK_THROWS_AS(select_evidence({item("e", 2001, std::nullopt)}, variant(CitationMode::impact_only, false)),
                  MissingInput);
  CHECK(select_evidence({item("e", 2001, std::nullopt)}, variant(CitationMode::all, false)).size() == 1);
  CHECK_THROWS_AS(assemble_summary_prompt(paper_of("P"), {}, variant(CitationMode::impact_only, true)), EmptyEvidence);
  CHECK_THROWS_AS(assemble_summary_prompt(paper_of("P"), {item("b", 2002, OT)}, variant(CitationMode::impact_only, false)),
                  PreconditionError);
  CHECK_THROWS_AS(assemble_summary_prompt(paper_of("P"), {item("c", std::nullopt, IR)}, variant(CitationMode::all, false)),
                  PreconditionError);
}

TEST_CASE("truncation cuts long contexts, then drops oldest years in rotation") {
  std::vector<EvidenceItem> ev;
  for (int y = 2001; y <= 2003; ++y)
    for (int i = 0; i < 3; ++i)
      ev.push_back(item(std::to_string(y) + "-" + std::to_string(i), y, IR, std::string(900, 'a' + i)));
  const auto full = assemble_summary_prompt(paper_of("P"), ev, variant(CitationMode::all, false));
  CHECK_FALSE(full.truncation.applied);

  // Room for everything once contexts are cut to 600.
  auto cut = assemble_summary_prompt(paper_of("P"), ev, variant(CitationMode::all, false), full.text.size() - 9 * 250);
  CHECK(cut.truncation.applied);
  CHECK(cut.truncation.shortened_context_ids.size() == 9);
  CHECK(cut.truncation.dropped_context_ids.empty());
  CHECK(cut.evidence_map.size() == 9);
  for (const auto& r : cut.evidence_map) CHECK(r.context_text.size() == kMaxContextChars);

  // Every cut line has the same width; a budget one short of dropping three
  // lines forces a fourth: 2001, 2002, 2003, then 2001 again.
  const std::size_t width = format_evidence_line(cut.evidence_map[0], false).size() + 1;
  const std::size_t budget = cut.truncation.final_chars - 3 * width - 1;
  auto tight = assemble_summary_prompt(paper_of("P"), ev, variant(CitationMode::all, false), budget);
  CHECK(tight.truncation.dropped_context_ids ==
        std::vector<std::string>{"2001-0", "2002-0", "2003-0", "2001-1"});
  CHECK(tight.evidence_map.size() == 5);
  CHECK(tight.truncation.final_chars == cut.truncation.final_chars - 4 * width);
  for (std::size_t i = 0; i < tight.evidence_map.size(); ++i) CHECK(tight.evidence_map[i].id == static_cast<int>(i) + 1);

  CHECK_THROWS_AS(assemble_summary_prompt(paper_of("P"), ev, variant(CitationMode::all, false), 100), EmptyEvidence);
}

TEST_CASE("period labels") {
  CHECK(parse_period("1997 - 2007", 2024) == std::pair{1997, 2007});
  CHECK(parse_period("2019\xE2\x80\x93present", 2024) == std::pair{2019, 2024});
  CHECK(parse_period("2015 to 2012", 2024) == std::pair{2012, 2015});
  CHECK(parse_period("2003", 2024) == std::pair{2003, 2003});
  CHECK(parse_period("Early Period (2001-2004)", 2024) == std::pair{2001, 2004});
  CHECK_FALSE(parse_period("the early days", 2024));
}

TEST_CASE("minimal valid output gives one period") {
  llm::Gateway gw(llm::MockProvider::canned(one_period_reply("1997 - 2007", {1})), {});
  Summarizer s(gw, {});
  auto sum = s.generate_summary(paper_of("P"), {item("a", 1999, IR)}, variant(CitationMode::impact_only, true), "r1");
  REQUIRE(sum.periods.size() == 1);
  CHECK(sum.periods[0].start_year == 1997);
  CHECK(sum.periods[0].end_year == 2007);
  CHECK(sum.unresolved_evidence.empty());
  CHECK(sum.summary_id == "P/impact_only+intents@chronological");
  CHECK(sum.evidence_map.at(0).context_id == "a");
}

TEST_CASE("an evidence id outside the input is flagged, not dropped") {
  llm::Gateway gw(llm::MockProvider::canned(one_period_reply("1997 - 2007", {1, 9})), {});
  Summarizer s(gw, {});
  auto sum = s.generate_summary(paper_of("P"), {item("a", 1999, IR)}, variant(CitationMode::all, false), "r1");
  CHECK(sum.unresolved_evidence == std::vector<int>{9});
  CHECK(sum.periods[0].evidence == std::vector<int>{1, 9});
  CHECK(sum.find_evidence(9) == nullptr);
}

TEST_CASE("periods are re-sorted on ingest and unreadable periods are schema violations") {
  json r = json::parse(one_period_reply("2010 - 2012", {}));
  r["impact_periods"].push_back({{"impact_period", "1999 - 2003"},
                                 {"aspect_of_period", "a"},
                                 {"impact_description", "d"},
                                 {"evidence", json::array()}});
  r["impact_periods"].push_back({{"impact_period", "2004 - 2009"},
                                 {"aspect_of_period", "a"},
                                 {"impact_description", "d"},
                                 {"evidence", json::array()}});
  llm::Gateway gw(llm::MockProvider::canned(r.dump()), {});
  Summarizer s(gw, {});
  auto sum = s.generate_summary(paper_of("P"), {}, variant(CitationMode::none, false), "r");
  REQUIRE(sum.periods.size() == 3);
  CHECK(std::is_sorted(sum.periods.begin(), sum.periods.end(),
                       [](auto& a, auto& b) { return a.start_year < b.start_year; }));

  llm::Gateway bad(llm::MockProvider::canned(one_period_reply("long ago", {})), {});
  Summarizer s2(bad, {});
  CHECK_THROWS_AS(s2.generate_summary(paper_of("P"), {}, variant(CitationMode::none, false), "r"), SchemaViolation);

  llm::Gateway empty(llm::MockProvider::canned(R"({"input_paper_info":{"input_paper_id":"P","input_paper_title":"T","input_paper_year":1},"impact_periods":[]})"), {});
  Summarizer s3(empty, {});
  CHECK_THROWS_AS(s3.generate_summary(paper_of("P"), {}, variant(CitationMode::none, false), "r"), SchemaViolation);
}

TEST_CASE("ablation grid: 105 papers give 945 summaries, reproducibly") {
  corpus::Corpus corpus;
  std::map<std::string, intent::ClassifiedCitation> classified;
  std::mt19937 rng(11);
  for (int p = 0; p < 105; ++p) {
    const std::string pid = "paper" + std::to_string(p);
    corpus.papers.push_back(paper_of(pid, 1990 + p % 20, p));
    for (int c = 0; c < 4; ++c) {
      corpus::CitationContext ctx;
      ctx.cited_paper_id = pid;
      ctx.citing_paper_id = pid + "-c" + std::to_string(c);
      ctx.citing_title = "Citing work " + std::to_string(c);
      ctx.citing_year = 2000 + static_cast<int>(rng() % 20);
      ctx.text = "Sentence " + std::to_string(c) + " about " + pid + ".";
      ctx.context_id = corpus::make_context_id(pid, ctx.citing_paper_id, ctx.text);
      corpus.contexts.push_back(ctx);
      intent::ClassifiedCitation cc;
      cc.context_id = ctx.context_id;
      cc.final_class = c == 3 ? OT : IR;
      cc.chosen_intent_text = c == 3 ? "background" : "built on the method";
      classified[ctx.context_id] = cc;
    }
  }
  auto run = [&](std::size_t workers) {
    llm::Gateway gw(echo_provider(), {});
    Summarizer s(gw, {});
    return s.generate_grid(corpus, classified, variant_grid(3), "grid", workers);
  };
  auto a = run(4);
  CHECK(a.size() == 945);
  std::set<std::string> ids;
  for (const auto& s : a) ids.insert(s.summary_id);
  CHECK(ids.size() == 945);

  // impact_only periods only ever cite impact-revealing contexts.
  for (const auto& s : a) {
    CHECK(s.unresolved_evidence.empty());
    if (s.variant.citations != CitationMode::impact_only) continue;
    for (const auto& p : s.periods)
      for (int id : p.evidence) {
        const auto* ref = s.find_evidence(id);
        REQUIRE(ref != nullptr);
        CHECK(classified.at(ref->context_id).final_class == IR);
      }
  }

  testing::TempDir dir;
  store_records(dir / "a.jsonl", a);
  store_records(dir / "b.jsonl", run(1));
  CHECK(read_text_file(dir / "a.jsonl") == read_text_file(dir / "b.jsonl"));
  CHECK(load_records<ImpactSummary>(dir / "a.jsonl") == a);
}

TEST_CASE("author aggregation over one and ten summaries") {
  std::vector<llm::ChatRequest> seen;
  std::mutex mu;
  auto provider = std::make_shared<llm::MockProvider>(llm::MockProvider::TextResponder([&](const llm::ChatRequest& r) {
    std::lock_guard lock(mu);
    seen.push_back(r);
    return std::string("  Across three eras the work moved from theory to practice.  ");
  }));
  llm::Gateway gw(provider, {});
  Summarizer s(gw, {});

  std::vector<ImpactSummary> ten;
  for (int i = 0; i < 10; ++i) {
    ImpactSummary sum;
    sum.summary_id = "p" + std::to_string(i) + "/impact_only+intents@chronological";
    sum.paper_id = "p" + std::to_string(i);
    sum.paper_title = "Paper number " + std::to_string(i);
    sum.paper_year = 2000 + i;
    sum.periods.push_back({2001 + i, 2005 + i, "x", "Uses", "Applied widely.", {}});
    ten.push_back(sum);
  }

  auto one = s.aggregate_author("alice", {ten[0]});
  CHECK(one.narrative == "Across three eras the work moved from theory to practice.");
  CHECK(one.source_summaries == std::vector<std::string>{ten[0].summary_id});

  auto all = s.aggregate_author("alice", ten);
  CHECK(seen.size() == 2);
  std::set<std::string> expected, got(all.source_summaries.begin(), all.source_summaries.end());
  for (const auto& t : ten) expected.insert(t.summary_id);
  CHECK(got == expected);
  CHECK(all.source_summaries.size() == 10);
  const auto& prompt = seen.back().messages.back().text;
  for (const auto& t : ten) CHECK(prompt.find(t.paper_title) != std::string::npos);
  CHECK(prompt.find("summarize their overall impact") != std::string::npos);

  CHECK_THROWS_AS(s.aggregate_author("alice", {}), PreconditionError);
  llm::Gateway blank(llm::MockProvider::canned("   "), {});
  Summarizer s2(blank, {});
  CHECK_THROWS_AS(s2.aggregate_author("bob", {ten[0]}), ProviderError);
}

TEST_CASE("top-cited selection") {
  std::vector<corpus::Paper> papers;
  for (int i = 0; i < 15; ++i) papers.push_back(paper_of("p" + std::to_string(i), 2000, i % 5));
  auto top = select_top_cited(papers, 10);
  CHECK(top.size() == 10);
  for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].citation_count >= top[i].citation_count);
  CHECK(top.front().paper_id == "p14");
}
