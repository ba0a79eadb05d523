#include "impact/pipeline/config.hpp"

#include <cstdlib>
#include <functional>
#include <sstream>

#include <CLI11.hpp>

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/text.hpp"
#include "impact/summarizer/types.hpp"

namespace impact::pipeline {

namespace fs = std::filesystem;

std::string to_string(ProviderMode m) {
  switch (m) {
    case ProviderMode::live: return "live";
    case ProviderMode::mock: return "mock";
    case ProviderMode::replay: return "replay";
  }
  return "live";
}

namespace {

using Values = std::vector<std::string>;

std::string one(const std::string& key, const Values& v) {
  if (v.size() != 1) throw ConfigError("config key " + key + " takes a single value");
  return v.front();
}

template <class Int>
Int integer(const std::string& key, const Values& v) {
  const auto s = one(key, v);
  try {
    std::size_t used = 0;
    const long long n = std::stoll(s, &used);
    if (used != s.size() || n < 0) throw std::invalid_argument(s);
    return static_cast<Int>(n);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " needs a non-negative integer, got '" + s + "'");
  }
}

bool boolean(const std::string& key, const Values& v) {
  const auto s = text::to_lower_ascii(one(key, v));
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config key " + key + " needs true or false, got '" + s + "'");
}

std::map<std::string, std::string> pairs(const std::string& key, const Values& v) {
  std::map<std::string, std::string> out;
  for (const auto& item : v) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("config key " + key + " needs name=value items");
    out[text::trim(item.substr(0, eq))] = text::trim(item.substr(eq + 1));
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : (base / path).lexically_normal();
}

}  // namespace

void apply_config_text(RunConfig& c, const std::string& body, const fs::path& base) {
  std::istringstream in(body);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }

  using Setter = std::function<void(const std::string&, const Values&)>;
  auto path_of = [&](fs::path& dst) { return [&dst, &base](const std::string& k, const Values& v) { dst = resolve(base, one(k, v)); }; };
  auto str_of = [](std::string& dst) { return [&dst](const std::string& k, const Values& v) { dst = one(k, v); }; };
  const std::map<std::string, Setter> setters = {
      {"run.id", str_of(c.run_id)},
      {"run.runs_dir", path_of(c.runs_dir)},
      {"run.seed", [&](auto& k, auto& v) { c.seed = integer<std::uint64_t>(k, v); }},
      {"run.workers", [&](auto& k, auto& v) { c.workers = integer<std::size_t>(k, v); }},
      {"llm.mode",
       [&](auto& k, auto& v) {
         const auto m = one(k, v);
         if (m == "live") c.mode = ProviderMode::live;
         else if (m == "mock") c.mode = ProviderMode::mock;
         else if (m == "replay") c.mode = ProviderMode::replay;
         else throw ConfigError("llm.mode must be live, mock or replay, got '" + m + "'");
       }},
      {"llm.script", path_of(c.mock_script)},
      {"llm.replay", path_of(c.replay_log)},
      {"llm.model_intent", str_of(c.model_intent)},
      {"llm.model_summary", str_of(c.model_summary)},
      {"llm.model_judge", str_of(c.model_judge)},
      {"llm.requests_per_minute", [&](auto& k, auto& v) { c.requests_per_minute = integer<int>(k, v); }},
      {"llm.max_in_flight", [&](auto& k, auto& v) { c.max_in_flight = integer<int>(k, v); }},
      {"llm.token_budget", [&](auto& k, auto& v) { c.token_budget = integer<std::int64_t>(k, v); }},
      {"corpus.fixture", path_of(c.corpus_fixture)},
      {"corpus.papers", [&](auto&, auto& v) { c.paper_ids = v; }},
      {"corpus.citation_limit", [&](auto& k, auto& v) { c.citation_limit = integer<std::size_t>(k, v); }},
      {"corpus.cache_dir", path_of(c.cache_dir)},
      {"icl.k", [&](auto& k, auto& v) { c.icl_k = integer<int>(k, v); }},
      {"icl.runs", [&](auto& k, auto& v) { c.icl_runs = integer<int>(k, v); }},
      {"icl.pool", path_of(c.icl_pool)},
      {"dataset.patterns", path_of(c.patterns)},
      {"dataset.crawled", path_of(c.crawled)},
      {"dataset.pst_other", path_of(c.pst_other)},
      {"dataset.n_impact", [&](auto& k, auto& v) { c.n_impact = integer<std::size_t>(k, v); }},
      {"dataset.n_other", [&](auto& k, auto& v) { c.n_other = integer<std::size_t>(k, v); }},
      {"summary.variants", [&](auto&, auto& v) { c.variants = v; }},
      {"summary.ordering_seed", [&](auto& k, auto& v) { c.ordering_seed = integer<std::uint64_t>(k, v); }},
      {"summary.max_prompt_chars", [&](auto& k, auto& v) { c.max_prompt_chars = integer<std::size_t>(k, v); }},
      {"summary.present_year", [&](auto& k, auto& v) { c.present_year = integer<int>(k, v); }},
      {"summary.max_output_tokens", [&](auto& k, auto& v) { c.summary_max_tokens = integer<int>(k, v); }},
      {"judge.k", [&](auto& k, auto& v) { c.coverage_k = integer<int>(k, v); }},
      {"judge.samples", [&](auto& k, auto& v) { c.samples = integer<int>(k, v); }},
      {"judge.use_logprobs", [&](auto& k, auto& v) { c.use_logprobs = boolean(k, v); }},
      {"judge.prompts_dir", path_of(c.prompts_dir)},
      {"ksweep.k_values",
       [&](auto& k, auto& v) {
         c.k_values.clear();
         for (const auto& item : v) c.k_values.push_back(integer<int>(k, {item}));
       }},
      {"ksweep.runs", [&](auto& k, auto& v) { c.ksweep_runs = integer<int>(k, v); }},
      {"ksweep.dataset", path_of(c.labeled_dataset)},
      {"bench.predictions",
       [&](auto& k, auto& v) {
         c.external_predictions.clear();
         for (const auto& [scheme, file] : pairs(k, v)) c.external_predictions[scheme] = resolve(base, file);
       }},
      {"author.id", str_of(c.author_id)},
      {"author.papers", [&](auto&, auto& v) { c.author_papers = v; }},
      {"author.variant", str_of(c.author_variant)},
      {"study.id", str_of(c.study_id)},
      {"study.variant_a", str_of(c.variant_a)},
      {"study.variant_b", str_of(c.variant_b)},
      {"study.statements", path_of(c.statements)},
      {"study.owners", [&](auto& k, auto& v) { c.owners = pairs(k, v); }},
      {"study.ui_dir", path_of(c.ui_dir)},
  };

  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    std::string key;
    for (const auto& p : item.parents) key += p + ".";
    key += item.name;
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key " + key);
    it->second(key, item.inputs);
  }
}

void apply_config_file(RunConfig& c, const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  apply_config_text(c, read_text_file(path), fs::absolute(path).parent_path());
  c.config_file = path;
}

void apply_env(RunConfig& c) {
  auto env = [](const char* name, std::string& dst) {
    if (const char* v = std::getenv(name); v && *v) dst = v;
  };
  env("LLM_MODEL_INTENT", c.model_intent);
  env("LLM_MODEL_SUMMARY", c.model_summary);
  env("LLM_MODEL_JUDGE", c.model_judge);
}

void apply_shipped_defaults(RunConfig& c) {
  const fs::path root(IMPACT_SOURCE_DIR);
  if (c.icl_pool.empty()) c.icl_pool = root / "data" / "icl_pool.jsonl";
  if (c.patterns.empty()) c.patterns = root / "data" / "patterns.txt";
  if (c.statements.empty()) c.statements = root / "data" / "study" / "statements.json";
  if (c.prompts_dir.empty()) c.prompts_dir = root / "prompts" / "eval";
}

void RunConfig::validate() const {
  if (run_id.empty() || run_id.find('/') != std::string::npos || run_id == "." || run_id == "..")
    throw ConfigError("run id must be a plain non-empty name, got '" + run_id + "'");
  if (workers == 0) throw ConfigError("workers must be at least 1");
  if (mode == ProviderMode::mock && mock_script.empty()) throw ConfigError("mock mode needs a script path");
  if (mode == ProviderMode::replay && replay_log.empty()) throw ConfigError("replay mode needs a call log path");
  if (icl_k < 0 || icl_runs < 1) throw ConfigError("icl.k must be >= 0 and icl.runs >= 1");
  if (icl_runs % 2 == 0) throw ConfigError("icl.runs must be odd for a majority vote");
  if (coverage_k < 1) throw ConfigError("judge.k must be at least 1");
  if (samples < 1) throw ConfigError("judge.samples must be at least 1");
  if (ksweep_runs < 1) throw ConfigError("ksweep.runs must be at least 1");
  if (n_impact == 0 || n_other == 0) throw ConfigError("dataset sizes must be positive");
  for (const auto& name : variants) summarizer::PromptVariant::from_name(name).validate();
  summarizer::PromptVariant::from_name(author_variant).validate();
  if (variant_a == variant_b) throw ConfigError("study.variant_a and study.variant_b must differ");
}

nlohmann::json describe(const RunConfig& c) {
  const fs::path run = fs::absolute(c.run_dir()).lexically_normal();
  auto p = [&](const fs::path& path) -> nlohmann::json {
    if (path.empty()) return nullptr;
    const auto abs = fs::absolute(path).lexically_normal();
    const auto rel = abs.lexically_relative(run);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return abs.generic_string();
  };
  nlohmann::json preds = nlohmann::json::object();
  for (const auto& [scheme, file] : c.external_predictions) preds[scheme] = p(file);
  return {
      {"run_id", c.run_id},
      {"seed", c.seed},
      {"workers", c.workers},
      {"llm",
       {{"mode", to_string(c.mode)},
        {"script", p(c.mock_script)},
        {"replay", p(c.replay_log)},
        {"model_intent", c.model_intent},
        {"model_summary", c.model_summary},
        {"model_judge", c.model_judge},
        {"requests_per_minute", c.requests_per_minute},
        {"max_in_flight", c.max_in_flight},
        {"token_budget", c.token_budget}}},
      {"corpus",
       {{"fixture", p(c.corpus_fixture)}, {"papers", c.paper_ids}, {"citation_limit", c.citation_limit}}},
      {"icl", {{"k", c.icl_k}, {"runs", c.icl_runs}, {"pool", p(c.icl_pool)}}},
      {"dataset",
       {{"patterns", p(c.patterns)},
        {"crawled", p(c.crawled)},
        {"pst_other", p(c.pst_other)},
        {"n_impact", c.n_impact},
        {"n_other", c.n_other}}},
      {"summary",
       {{"variants", c.variants},
        {"max_prompt_chars", c.max_prompt_chars},
        {"present_year", c.present_year ? nlohmann::json(*c.present_year) : nlohmann::json(nullptr)},
        {"max_output_tokens", c.summary_max_tokens}}},
      {"judge",
       {{"k", c.coverage_k}, {"samples", c.samples}, {"use_logprobs", c.use_logprobs}, {"prompts_dir", p(c.prompts_dir)}}},
      {"ksweep", {{"k_values", c.k_values}, {"runs", c.ksweep_runs}, {"dataset", p(c.labeled_dataset)}}},
      {"bench", {{"predictions", preds}}},
      {"author", {{"id", c.author_id}, {"papers", c.author_papers}, {"variant", c.author_variant}}},
      {"study",
       {{"id", c.study_id},
        {"variant_a", c.variant_a},
        {"variant_b", c.variant_b},
        {"statements", p(c.statements)},
        {"owners", c.owners}}},
  };
}

}  // namespace impact::pipeline
