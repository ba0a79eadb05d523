#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "fake_server.hpp"
#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/study/protocol.hpp"
#include "impact/study/server.hpp"
#include "impact/study/stats.hpp"
#include "impact/study/store.hpp"
#include "temp_dir.hpp"

using namespace impact;
using namespace impact::study;
using summarizer::ImpactSummary;
using summarizer::PromptVariant;

namespace {

const PromptVariant kA{summarizer::CitationMode::all, false, summarizer::Ordering::chronological, 0};
const PromptVariant kB{summarizer::CitationMode::impact_only, true, summarizer::Ordering::chronological, 0};

ImpactSummary make_summary(const std::string& pid, const PromptVariant& v) {
  ImpactSummary s;
  s.paper_id = pid;
  s.variant = v;
  s.summary_id = pid + "/" + v.name();
  s.run_id = "run-xyz";
  s.paper_title = "Title of " + pid;
  s.paper_year = 2001;
  s.periods = {{2002, 2005, "2002-2005", "early uptake", "Cited as a baseline.", {1, 2}},
               {2006, 2010, "2006-2010", "extensions", "Extended to new settings.", {3}}};
  return s;
}

struct Fixture {
  std::vector<StudyPaper> papers;
  std::vector<ImpactSummary> summaries;
  std::vector<Statement> statements = {{"clarity-1", "clarity", "Easy to follow."},
                                       {"info-1", "informativeness", "Told me something new."}};
};

Fixture fixture(std::size_t n, std::size_t owners = 3) {
  Fixture f;
  for (std::size_t i = 0; i < n; ++i) {
    const auto pid = "p" + std::to_string(1000 + i);
    f.papers.push_back({pid, "Title of " + pid, "owner" + std::to_string(i % owners), static_cast<int>(i * 7 % 101),
                        static_cast<int>(i * 13 % 37)});
    f.summaries.push_back(make_summary(pid, kA));
    f.summaries.push_back(make_summary(pid, kB));
  }
  return f;
}

Study make_study(std::size_t n, std::size_t owners = 3, std::uint64_t seed = 7) {
  auto f = fixture(n, owners);
  return create_study("s1", f.papers, f.summaries, kA.name(), kB.name(), f.statements, seed);
}

std::string variant_on_left(const Study& s, const StudyTask& t) { return s.summaries.at(t.left_summary_id).variant.name(); }

Vote pairwise_vote(const StudyTask& t, Side side) { return {t.task_id, t.assigned_rater, side, std::nullopt, 0}; }

// Votes so that `a_wins` of the pairwise tasks on `criterion` go to variant A.
std::vector<Vote> votes_for(const Study& s, Criterion criterion, std::size_t a_wins) {
  std::vector<Vote> votes;
  std::size_t given = 0;
  for (const auto& t : s.tasks) {
    if (t.kind != TaskKind::pairwise || t.criterion != criterion) continue;
    const bool a_left = variant_on_left(s, t) == s.variant_a;
    const bool pick_a = given++ < a_wins;
    votes.push_back(pairwise_vote(t, pick_a == a_left ? Side::left : Side::right));
  }
  return votes;
}

}  // namespace

TEST_CASE("two papers put each variant on the left once per criterion") {
  auto s = make_study(2);
  REQUIRE(s.tasks.size() == 2 * 2 + 2 * 2);
  for (auto c : {Criterion::relevance, Criterion::insightfulness}) {
    int a_left = 0;
    for (const auto& t : s.tasks)
      if (t.kind == TaskKind::pairwise && t.criterion == c && variant_on_left(s, t) == kA.name()) ++a_left;
    CHECK(a_left == 1);
  }
}

TEST_CASE("left/right placement is balanced for any paper count") {
  for (std::size_t n = 1; n <= 40; ++n) {
    auto s = make_study(n);
    long balance = 0;
    std::size_t pairwise = 0;
    for (const auto& t : s.tasks) {
      if (t.kind != TaskKind::pairwise) continue;
      ++pairwise;
      balance += variant_on_left(s, t) == kA.name() ? 1 : -1;
    }
    CHECK(pairwise == 2 * n);
    CHECK(std::labs(balance) <= 1);
  }
}

TEST_CASE("82 papers give 82 pairwise tasks per criterion and likert tasks on variant b") {
  auto s = make_study(82);
  std::map<std::string, int> per_criterion;
  int likert = 0;
  std::set<std::string> ids;
  for (const auto& t : s.tasks) {
    CHECK(ids.insert(t.task_id).second);
    CHECK(s.raters.count(t.assigned_rater) == 1);
    CHECK(s.raters.at(t.assigned_rater) == s.find_paper(t.paper_id)->owner);
    if (t.kind == TaskKind::pairwise) {
      per_criterion[to_string(*t.criterion)]++;
      CHECK(t.left_summary_id != t.right_summary_id);
    } else {
      ++likert;
      CHECK(variant_on_left(s, t) == kB.name());
    }
  }
  CHECK(per_criterion["relevance"] == 82);
  CHECK(per_criterion["insightfulness"] == 82);
  CHECK(likert == 82 * 2);
  CHECK(s.raters.size() == 3);
}

TEST_CASE("rater tokens are opaque, stable and seed dependent") {
  auto a = make_study(5, 2, 1), b = make_study(5, 2, 1), c = make_study(5, 2, 2);
  CHECK(a.raters == b.raters);
  CHECK(a.raters != c.raters);
  for (const auto& [token, owner] : a.raters) CHECK(token.find(owner) == std::string::npos);
}

TEST_CASE("study creation rejects missing summaries and identical variants") {
  auto f = fixture(3);
  f.summaries.pop_back();
  CHECK_THROWS_AS(create_study("s", f.papers, f.summaries, kA.name(), kB.name(), f.statements, 0), MissingSummary);
  auto g = fixture(3);
  CHECK_THROWS_AS(create_study("s", g.papers, g.summaries, kA.name(), kA.name(), g.statements, 0), ConfigError);
}

TEST_CASE("vote validation") {
  auto s = make_study(4);
  const StudyTask* pair = nullptr;
  const StudyTask* lik = nullptr;
  for (const auto& t : s.tasks) (t.kind == TaskKind::pairwise ? pair : lik) = &t;
  CHECK_NOTHROW(validate_vote(s, {lik->task_id, lik->assigned_rater, std::nullopt, 5, 0}));
  CHECK_THROWS_AS(validate_vote(s, {lik->task_id, lik->assigned_rater, std::nullopt, 6, 0}), InvalidLikert);
  CHECK_THROWS_AS(validate_vote(s, {lik->task_id, lik->assigned_rater, std::nullopt, 0, 0}), InvalidLikert);
  CHECK_THROWS_AS(validate_vote(s, {lik->task_id, lik->assigned_rater, Side::left, std::nullopt, 0}), PreconditionError);
  CHECK_THROWS_AS(validate_vote(s, {pair->task_id, pair->assigned_rater, std::nullopt, std::nullopt, 0}),
                  PreconditionError);
  CHECK_THROWS_AS(validate_vote(s, {pair->task_id, "r-nobody", Side::left, std::nullopt, 0}), PreconditionError);
  CHECK_THROWS_AS(validate_vote(s, {"t9999", pair->assigned_rater, Side::left, std::nullopt, 0}), UnknownTask);
}

TEST_CASE("store: duplicate votes supersede, counts and persistence") {
  testing::TempDir dir("study");
  auto s = make_study(60, 4);
  {
    StudyStore store(dir / "study.sqlite");
    CHECK_FALSE(store.has_study());
    CHECK_THROWS_AS(store.study(), MissingInput);
    store.create(s);
    CHECK_THROWS_AS(store.create(s), PreconditionError);

    const auto& t0 = s.tasks.front();
    CHECK_FALSE(store.record_vote(pairwise_vote(t0, Side::left)).superseded);
    CHECK(store.record_vote(pairwise_vote(t0, Side::left)).superseded);
    CHECK(store.vote_count() == 1);
    CHECK(store.record_vote(pairwise_vote(t0, Side::right)).superseded);
    CHECK(store.vote_count() == 1);
    CHECK(store.votes()->front().choice == Side::right);
    CHECK(store.superseded_count() == 2);

    Vote bad{s.tasks.back().task_id, s.tasks.back().assigned_rater, std::nullopt, 6, 0};
    CHECK_THROWS_AS(store.record_vote(bad), InvalidLikert);
    CHECK(store.vote_count() == 1);

    std::size_t cast = 1;
    for (std::size_t i = 1; cast < 100; ++i, ++cast) {
      const auto& t = s.tasks[i];
      if (t.kind == TaskKind::pairwise)
        store.record_vote(pairwise_vote(t, i % 2 ? Side::left : Side::right));
      else
        store.record_vote({t.task_id, t.assigned_rater, std::nullopt, static_cast<int>(1 + i % 5), 0});
    }
    CHECK(store.vote_count() == 100);
  }
  StudyStore reopened(dir / "study.sqlite");
  CHECK(reopened.has_study());
  CHECK(reopened.study().tasks.size() == s.tasks.size());
  CHECK(reopened.vote_count() == 100);
}

TEST_CASE("store accepts concurrent writers") {
  testing::TempDir dir("study");
  auto s = make_study(100, 5);
  StudyStore store(dir / "study.sqlite");
  store.create(s);
  std::vector<std::thread> threads;
  for (int w = 0; w < 4; ++w)
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < 200; i += 4) store.record_vote(pairwise_vote(s.tasks[i], Side::left));
    });
  for (auto& t : threads) t.join();
  CHECK(store.vote_count() == 200);
}

TEST_CASE("win percentages are exact") {
  auto s = make_study(100);
  auto r = aggregate_results(s, votes_for(s, Criterion::relevance, 63));
  const auto& share = r.views.at("all").pairwise.at("relevance");
  CHECK(share.votes == 100);
  CHECK(share.win_pct.at(kA.name()) == 63.0);
  CHECK(share.win_pct.at(kB.name()) == 37.0);
  CHECK(r.views.at("all").pairwise.count("insightfulness") == 0);

  auto four = make_study(4);
  auto r4 = aggregate_results(four, votes_for(four, Criterion::insightfulness, 3));
  CHECK(r4.views.at("all").pairwise.at("insightfulness").win_pct.at(kA.name()) == 75.0);
  CHECK(r4.views.at("all").pairwise.at("insightfulness").win_pct.at(kB.name()) == 25.0);

  auto r0 = aggregate_results(four, votes_for(four, Criterion::relevance, 0));
  CHECK(r0.views.at("all").pairwise.at("relevance").win_pct.at(kA.name()) == 0.0);
  CHECK(r0.views.at("all").pairwise.at("relevance").win_pct.at(kB.name()) == 100.0);
}

TEST_CASE("fair-coin votes stay near an even split") {
  auto s = make_study(1000);
  std::mt19937 rng(99);
  std::vector<Vote> votes;
  for (const auto& t : s.tasks)
    if (t.kind == TaskKind::pairwise && t.criterion == Criterion::relevance)
      votes.push_back(pairwise_vote(t, rng() % 2 ? Side::left : Side::right));
  const double a = aggregate_results(s, votes).views.at("all").pairwise.at("relevance").win_pct.at(kA.name());
  CHECK(a >= 45.0);
  CHECK(a <= 55.0);
}

TEST_CASE("likert shares and subgroup views") {
  auto s = make_study(82);
  std::vector<Vote> votes;
  int k = 0;
  for (const auto& t : s.tasks)
    if (t.kind == TaskKind::likert && t.statement_id == "clarity-1")
      votes.push_back({t.task_id, t.assigned_rater, std::nullopt, 1 + (k++ % 5), 0});
  auto r = aggregate_results(s, votes);
  const auto& share = r.views.at("all").likert.at("clarity-1");
  CHECK(share.votes == 82);
  std::size_t total = 0;
  for (const auto& [level, n] : share.counts) total += n;
  CHECK(total == 82);
  CHECK(share.agree_pct == doctest::Approx(100.0 * (share.counts.at(4) + share.counts.at(5)) / 82.0));
  CHECK(r.views.at("top10_citations").paper_ids.size() == 9);
  CHECK(r.views.at("top10_impact_revealing").paper_ids.size() == 9);

  // independent top-decile oracle
  auto sorted = s.papers;
  std::sort(sorted.begin(), sorted.end(), [](const StudyPaper& a, const StudyPaper& b) {
    return std::make_pair(-a.citation_count, a.paper_id) < std::make_pair(-b.citation_count, b.paper_id);
  });
  for (std::size_t i = 0; i < 9; ++i) CHECK(r.views.at("top10_citations").paper_ids[i] == sorted[i].paper_id);

  CHECK(top_decile(fixture(10).papers, &StudyPaper::citation_count).size() == 1);
  CHECK(top_decile(fixture(11).papers, &StudyPaper::citation_count).size() == 2);
  CHECK_THROWS_AS(aggregate_results(s, {}), NoVotes);
}

TEST_CASE("agreement statistics match the scipy reference") {
  const auto cases = nlohmann::json::parse(read_text_file(std::filesystem::path(IMPACT_SOURCE_DIR) / "tests" /
                                                          "fixtures" / "agreement_cases.json"));
  REQUIRE(cases.size() == 1000);
  auto close = [](const nlohmann::json& want, double got) {
    if (want.is_null()) return std::isnan(got);
    return std::fabs(want.get<double>() - got) <= 1e-9;
  };
  for (const auto& c : cases) {
    const auto h = c["human"].get<std::vector<double>>();
    const auto l = c["llm"].get<std::vector<double>>();
    const auto s = agreement_stats(h, l, "m");
    CHECK(s.n == h.size());
    CHECK_MESSAGE(close(c["spearman"], s.spearman), c["spearman"].dump() << " vs " << s.spearman);
    CHECK_MESSAGE(close(c["spearman_p"], s.spearman_p), c["spearman_p"].dump() << " vs " << s.spearman_p);
    CHECK_MESSAGE(close(c["kendall_tau"], s.kendall_tau), c["kendall_tau"].dump() << " vs " << s.kendall_tau);
    CHECK_MESSAGE(close(c["kendall_p"], s.kendall_p), c["kendall_p"].dump() << " vs " << s.kendall_p);
    CHECK(close(c["f1"], s.f1_agreement));
  }
}

TEST_CASE("agreement edge cases") {
  const std::vector<double> x = {0.1, 0.4, 0.2, 0.9, 0.7, 0.3};
  auto same = agreement_stats(x, x, "m");
  CHECK(same.spearman == doctest::Approx(1.0));
  CHECK(same.kendall_tau == doctest::Approx(1.0));
  CHECK(same.f1_agreement == 1.0);
  std::vector<double> rev(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) rev[i] = -x[i];
  auto opposite = agreement_stats(x, rev, "m");
  CHECK(opposite.spearman == doctest::Approx(-1.0));
  CHECK(opposite.kendall_tau == doctest::Approx(-1.0));

  CHECK(std::isnan(agreement_stats({1, 1, 1}, {1, 2, 3}, "m").spearman));
  CHECK(f1_agreement({0, 0, 0}, {0, 0.2, 0.1}, 0.5, 0.5) == 1.0);
  CHECK(f1_agreement({0, 0, 0}, {0, 0.9, 0.1}, 0.5, 0.5) == 0.0);
  CHECK_THROWS_AS(agreement_stats({1, 2, 3}, {1, 2}, "m"), LengthMismatch);
  CHECK_THROWS_AS(agreement_stats({1, 2}, {1, 2}, "m"), PreconditionError);
  auto j = nlohmann::json(agreement_stats({1, 1, 1}, {1, 2, 3}, "m"));
  CHECK(j["spearman"].is_null());
}

TEST_CASE("http api: task listing, blinded payloads, votes and results") {
  testing::TempDir dir("study");
  auto s = make_study(6, 2);
  auto store = std::make_shared<StudyStore>(dir / "study.sqlite");
  store->create(s);
  StudyServer server(store, {"127.0.0.1", 0, {}});
  const int port = server.bind();
  std::thread th([&] { server.run(); });
  while (!server.running()) std::this_thread::sleep_for(std::chrono::milliseconds(5));

  httplib::Client cli("127.0.0.1", port);
  const std::string rater = s.tasks.front().assigned_rater;
  std::string other_rater;
  for (const auto& [token, owner] : s.raters)
    if (token != rater) other_rater = token;

  CHECK(cli.Get("/api/results")->status == 409);
  CHECK(cli.Get("/api/tasks")->status == 400);
  CHECK(cli.Get("/api/tasks?rater=r-unknown")->status == 404);

  auto listing = cli.Get("/api/tasks?rater=" + rater);
  REQUIRE(listing->status == 200);
  auto tasks = nlohmann::json::parse(listing->body)["tasks"];
  CHECK(tasks.size() == 3 * 2 + 3 * 2);
  for (const auto& t : tasks) CHECK_FALSE(t["done"].get<bool>());

  for (const auto& t : s.tasks) {
    auto r = cli.Get("/api/task/" + t.task_id);
    REQUIRE(r->status == 200);
    for (const auto& [id, summary] : s.summaries) {
      CHECK(r->body.find(id) == std::string::npos);
      CHECK(r->body.find(summary.variant.name()) == std::string::npos);
    }
    CHECK(r->body.find("run-xyz") == std::string::npos);
    CHECK(r->body.find("variant") == std::string::npos);
  }
  CHECK(cli.Get("/api/task/t9999")->status == 404);

  const auto& pair = s.tasks.front();
  const std::string good = nlohmann::json{{"task_id", pair.task_id}, {"rater", rater}, {"choice", "left"}}.dump();
  auto ok = cli.Post("/api/votes", good, "application/json");
  REQUIRE(ok->status == 200);
  CHECK_FALSE(nlohmann::json::parse(ok->body)["superseded"].get<bool>());
  CHECK(nlohmann::json::parse(cli.Post("/api/votes", good, "application/json")->body)["superseded"].get<bool>());

  CHECK(cli.Post("/api/votes", "{not json", "application/json")->status == 400);
  CHECK(cli.Post("/api/votes", nlohmann::json{{"task_id", "t9999"}, {"rater", rater}, {"choice", "left"}}.dump(),
                 "application/json")->status == 404);
  CHECK(cli.Post("/api/votes", nlohmann::json{{"task_id", pair.task_id}, {"rater", other_rater}, {"choice", "left"}}.dump(),
                 "application/json")->status == 403);
  const StudyTask* lik = nullptr;
  for (const auto& t : s.tasks)
    if (t.kind == TaskKind::likert && t.assigned_rater == rater) lik = &t;
  REQUIRE(lik);
  auto bad = cli.Post("/api/votes", nlohmann::json{{"task_id", lik->task_id}, {"rater", rater}, {"likert", 6}}.dump(),
                      "application/json");
  CHECK(bad->status == 400);
  CHECK(nlohmann::json::parse(bad->body)["error"] == "InvalidLikert");
  CHECK(cli.Post("/api/votes", nlohmann::json{{"task_id", lik->task_id}, {"rater", rater}, {"likert", 4}}.dump(),
                 "application/json")->status == 200);

  tasks = nlohmann::json::parse(cli.Get("/api/tasks?rater=" + rater)->body)["tasks"];
  int done = 0;
  for (const auto& t : tasks) done += t["done"].get<bool>();
  CHECK(done == 2);

  auto results = cli.Get("/api/results");
  REQUIRE(results->status == 200);
  auto rj = nlohmann::json::parse(results->body);
  CHECK(rj["total_votes"] == 2);
  CHECK(rj["views"]["all"]["pairwise"]["relevance"]["votes"] == 1);

  server.stop();
  th.join();
}

TEST_CASE("bind address comes from the environment") {
  ::setenv("STUDY_BIND_ADDR", "0.0.0.0:9191", 1);
  auto c = server_config_from_env();
  CHECK(c.host == "0.0.0.0");
  CHECK(c.port == 9191);
  ::setenv("STUDY_BIND_ADDR", "nonsense", 1);
  CHECK_THROWS_AS(server_config_from_env(), ConfigError);
  ::unsetenv("STUDY_BIND_ADDR");
  CHECK(server_config_from_env().port == 8080);
}
