#include "impact/pipeline/run.hpp"

#include <set>

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/random.hpp"
#include "impact/common/text.hpp"
#include "impact/llm/provider.hpp"

namespace impact::pipeline {

namespace fs = std::filesystem;

RunSeeds RunSeeds::derive(const RunConfig& c) {
  RunSeeds s;
  s.icl_shuffle = derive_seed(c.seed, 1);
  s.ordering = c.ordering_seed ? *c.ordering_seed : derive_seed(c.seed, 2);
  s.dataset = derive_seed(c.seed, 3);
  s.judge = derive_seed(c.seed, 4);
  s.ksweep = derive_seed(c.seed, 5);
  s.study = derive_seed(c.seed, 6);
  return s;
}

std::shared_ptr<llm::Provider> make_provider(const RunConfig& c) {
  switch (c.mode) {
    case ProviderMode::mock:
      return llm::make_scripted_provider(llm::MockScript::from_file(c.mock_script));
    case ProviderMode::replay:
      if (!fs::exists(c.replay_log)) throw MissingInput("replay log not found: " + c.replay_log.string());
      return std::make_shared<llm::ReplayProvider>(c.replay_log);
    case ProviderMode::live: {
      auto settings = llm::OpenAiSettings::from_env();
      if (settings.api_key.empty()) throw ConfigError("live mode needs LLM_API_KEY (or pass --mock <script>)");
      return std::make_shared<llm::OpenAiProvider>(settings);
    }
  }
  throw ConfigError("unknown provider mode");
}

int exit_code_for(const std::string& kind) {
  static const std::set<std::string> config = {"ConfigError", "PreconditionError", "PatternCompileError",
                                               "UnknownLabel"};
  static const std::set<std::string> missing = {"MissingInput", "IoError",     "CorruptRecord",  "NotFound",
                                                "EmptyEvidence", "MissingSummary", "MissingCell",
                                                "NoImpactCitations", "EmptySplit", "InsufficientMatches",
                                                "IdMismatch", "NoVotes", "UnknownTask"};
  static const std::set<std::string> provider = {"ProviderError", "AuthError", "BudgetExceeded", "SchemaViolation",
                                                 "ParseError", "JudgeParseError", "ApiError", "PartialFetch"};
  if (config.count(kind)) return 2;
  if (missing.count(kind)) return 3;
  if (provider.count(kind)) return 4;
  return 1;
}

RunContext::RunContext(RunConfig config) : config_(std::move(config)), seeds_(RunSeeds::derive(config_)) {
  config_.validate();
  fs::create_directories(config_.run_dir());
}

llm::Gateway& RunContext::gateway() {
  if (!gateway_) {
    llm::GatewayConfig g;
    g.requests_per_minute = config_.requests_per_minute;
    g.max_in_flight = config_.max_in_flight;
    g.token_budget = config_.token_budget;
    g.call_log = path("llm_calls.jsonl");
    gateway_ = std::make_unique<llm::Gateway>(make_provider(config_), g);
  }
  return *gateway_;
}

corpus::Corpus RunContext::load_corpus() const {
  corpus::CorpusStore store(path("corpus"));
  if (!fs::exists(store.index_path()))
    throw MissingInput("no corpus in " + store.root().string() + "; run fetch first");
  return store.load();
}

std::vector<intent::ClassifiedCitation> RunContext::load_intents() const {
  const auto p = path("intents.jsonl");
  if (!fs::exists(p)) throw MissingInput("missing " + p.string() + "; run classify first");
  return load_records<intent::ClassifiedCitation>(p);
}

std::vector<summarizer::ImpactSummary> RunContext::load_summaries() const {
  const auto p = path("summaries.jsonl");
  if (!fs::exists(p)) throw MissingInput("missing " + p.string() + "; run summarize first");
  return load_records<summarizer::ImpactSummary>(p);
}

void RunContext::record(const std::string& command, const std::vector<fs::path>& inputs,
                        const std::vector<fs::path>& outputs, const nlohmann::json& seeds,
                        const nlohmann::json& details) {
  const fs::path run = fs::absolute(config_.run_dir()).lexically_normal();
  auto name = [&](const fs::path& p) {
    const auto abs = fs::absolute(p).lexically_normal();
    const auto rel = abs.lexically_relative(run);
    return !rel.empty() && *rel.begin() != ".." ? rel.generic_string() : abs.generic_string();
  };
  auto hashes = [&](const std::vector<fs::path>& files) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& f : files) {
      if (f.empty()) continue;
      out[name(f)] = fs::exists(f) ? nlohmann::json(text::sha256_hex(read_text_file(f))) : nlohmann::json(nullptr);
    }
    return out;
  };

  const auto manifest_path = path("manifest.json");
  nlohmann::json manifest = fs::exists(manifest_path) ? read_json_file(manifest_path) : nlohmann::json::object();
  manifest["run_id"] = config_.run_id;
  manifest["tool_version"] = IMPACT_VERSION;
  manifest["config"] = describe(config_);
  manifest["seed"] = config_.seed;
  manifest["commands"][command] = {{"inputs", hashes(inputs)},
                                   {"outputs", hashes(outputs)},
                                   {"seeds", seeds},
                                   {"details", details}};
  write_text_atomic(manifest_path, manifest.dump(2) + "\n");
}

}  // namespace impact::pipeline
