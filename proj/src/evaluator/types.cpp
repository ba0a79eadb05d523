#include "impact/evaluator/types.hpp"

#include "impact/common/error.hpp"

namespace impact::evaluator {

using nlohmann::json;

std::string to_string(Metric m) {
  switch (m) {
    case Metric::insightfulness: return "insightfulness";
    case Metric::trend_awareness: return "trend_awareness";
    case Metric::specificity: return "specificity";
  }
  return "?";
}

Metric metric_from_string(const std::string& s) {
  for (auto m : all_metrics())
    if (to_string(m) == s) return m;
  throw ConfigError("unknown metric '" + s + "'");
}

const std::vector<Metric>& all_metrics() {
  static const std::vector<Metric> m = {Metric::insightfulness, Metric::trend_awareness, Metric::specificity};
  return m;
}

void EvalReport::validate() const {
  auto check = [&](const char* name, std::optional<double> v) {
    if (v && !(*v >= 0.0 && *v <= 1.0))
      throw PreconditionError(std::string(name) + " of " + summary_id + " is outside [0, 1]");
  };
  check("faithfulness", faithfulness);
  check("coverage", coverage);
  check("coverage_at_k", coverage_at_k);
  check("year_compliance", year_compliance);
  check("insightfulness", insightfulness);
  check("trend_awareness", trend_awareness);
  check("specificity", specificity);
}

namespace {
json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::optional<double> read_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}
}  // namespace

void to_json(json& j, const FaithfulnessVerdict& v) {
  j = {{"period_index", v.period_index},
       {"analysis", v.analysis},
       {"answer", v.answer ? "yes" : "no"},
       {"proof", v.proof},
       {"judged", v.judged}};
}

void from_json(const json& j, FaithfulnessVerdict& v) {
  v.period_index = j.at("period_index").get<std::size_t>();
  v.analysis = j.at("analysis").get<std::string>();
  v.answer = j.at("answer").get<std::string>() == "yes";
  v.proof = j.at("proof").get<std::vector<std::string>>();
  v.judged = j.value("judged", true);
}

void to_json(json& j, const ThemeCluster& c) {
  j = {{"cluster_id", c.cluster_id}, {"label", c.label}, {"member_intents", c.member_intents}, {"size", c.size}};
}

void from_json(const json& j, ThemeCluster& c) {
  c.cluster_id = j.at("cluster_id").get<int>();
  c.label = j.at("label").get<std::string>();
  c.member_intents = j.at("member_intents").get<std::vector<std::string>>();
  c.size = j.at("size").get<std::size_t>();
}

void to_json(json& j, const EvalReport& r) {
  j = {{"summary_id", r.summary_id},
       {"paper_id", r.paper_id},
       {"variant", r.variant},
       {"faithfulness", opt(r.faithfulness)},
       {"faithfulness_yes", r.faithfulness_yes},
       {"faithfulness_periods", r.faithfulness_periods},
       {"coverage", opt(r.coverage)},
       {"coverage_at_k", opt(r.coverage_at_k)},
       {"k", r.k},
       {"year_compliance", opt(r.year_compliance)},
       {"insightfulness", r.insightfulness},
       {"trend_awareness", r.trend_awareness},
       {"specificity", r.specificity},
       {"verdicts", r.verdicts},
       {"judge_calls", r.judge_calls}};
}

void from_json(const json& j, EvalReport& r) {
  r.summary_id = j.at("summary_id").get<std::string>();
  r.paper_id = j.at("paper_id").get<std::string>();
  r.variant = j.at("variant").get<std::string>();
  r.faithfulness = read_opt(j, "faithfulness");
  r.faithfulness_yes = j.at("faithfulness_yes").get<std::size_t>();
  r.faithfulness_periods = j.at("faithfulness_periods").get<std::size_t>();
  r.coverage = read_opt(j, "coverage");
  r.coverage_at_k = read_opt(j, "coverage_at_k");
  r.k = j.at("k").get<int>();
  r.year_compliance = read_opt(j, "year_compliance");
  r.insightfulness = j.at("insightfulness").get<double>();
  r.trend_awareness = j.at("trend_awareness").get<double>();
  r.specificity = j.at("specificity").get<double>();
  r.verdicts = j.at("verdicts").get<std::vector<FaithfulnessVerdict>>();
  r.judge_calls = j.at("judge_calls").get<std::vector<std::string>>();
  r.validate();
}

}  // namespace impact::evaluator
