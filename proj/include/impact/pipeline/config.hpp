#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace impact::pipeline {

enum class ProviderMode { live, mock, replay };
std::string to_string(ProviderMode m);

/// Everything one run needs. Defaults match impact.toml at the repository
/// root; a config file overrides them and command-line flags override both.
struct RunConfig {
  // [run]
  std::string run_id = "default";
  std::filesystem::path runs_dir = "runs";
  std::uint64_t seed = 0;
  std::size_t workers = 8;

  // [llm]
  ProviderMode mode = ProviderMode::live;
  std::filesystem::path mock_script;
  std::filesystem::path replay_log;
  std::string model_intent = "gpt-4o";
  std::string model_summary = "gpt-4o";
  std::string model_judge = "gpt-4o";
  int requests_per_minute = 0;
  int max_in_flight = 8;
  std::int64_t token_budget = 0;

  // [corpus]
  std::filesystem::path corpus_fixture;  // mock graph document; empty uses the live API
  std::vector<std::string> paper_ids;
  std::size_t citation_limit = 5000;
  std::filesystem::path cache_dir;

  // [icl]
  int icl_k = 50;
  int icl_runs = 3;
  std::filesystem::path icl_pool;

  // [dataset]
  std::filesystem::path patterns;
  std::filesystem::path crawled;    // one context per line; empty uses the run's corpus
  std::filesystem::path pst_other;  // one context per line
  std::size_t n_impact = 2000;
  std::size_t n_other = 2000;

  // [summary]
  std::vector<std::string> variants;  // empty is the full grid
  std::optional<std::uint64_t> ordering_seed;
  std::size_t max_prompt_chars = 400000;
  std::optional<int> present_year;
  int summary_max_tokens = 4096;

  // [judge]
  int coverage_k = 3;
  int samples = 5;
  bool use_logprobs = true;
  std::filesystem::path prompts_dir;

  // [ksweep]
  std::vector<int> k_values = {0, 1, 5, 10, 20, 50};
  int ksweep_runs = 3;
  std::filesystem::path labeled_dataset;  // empty uses the run's dataset.jsonl

  // [bench]
  std::map<std::string, std::filesystem::path> external_predictions;  // scheme -> file

  // [author]
  std::string author_id = "author";
  std::vector<std::string> author_papers;  // empty takes every summarized paper
  std::string author_variant = "impact_only+intents@chronological";

  // [study]
  std::string study_id = "study";
  std::string variant_a = "all@chronological";
  std::string variant_b = "impact_only+intents@chronological";
  std::filesystem::path statements;
  std::map<std::string, std::string> owners;  // paper id -> owner
  std::filesystem::path ui_dir;

  std::filesystem::path config_file;  // where the values came from, if anywhere

  std::filesystem::path run_dir() const { return runs_dir / run_id; }

  /// ConfigError on any inconsistent value, e.g. mock mode without a script.
  void validate() const;
};

/// Reads a TOML-style file: `key = value` lines under [section] headers,
/// strings quoted, lists in brackets. Relative paths resolve against the
/// file's directory. Unknown keys are a ConfigError.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Same, from text; `base_dir` anchors relative paths.
void apply_config_text(RunConfig& config, const std::string& text, const std::filesystem::path& base_dir);

/// LLM_MODEL_INTENT / LLM_MODEL_SUMMARY / LLM_MODEL_JUDGE when set.
void apply_env(RunConfig& config);

/// Fills in paths that default to shipped data under the source tree.
void apply_shipped_defaults(RunConfig& config);

/// The effective settings recorded in the manifest. Paths inside the run
/// directory are made relative to it.
nlohmann::json describe(const RunConfig& config);

}  // namespace impact::pipeline
