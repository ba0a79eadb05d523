#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/corpus/store.hpp"
#include "impact/intent/types.hpp"
#include "impact/llm/gateway.hpp"
#include "impact/pipeline/config.hpp"
#include "impact/summarizer/types.hpp"

namespace impact::pipeline {

/// Per-step seeds, all derived from the run seed so a single number pins the
/// whole run.
struct RunSeeds {
  std::uint64_t icl_shuffle = 0;
  std::uint64_t ordering = 0;
  std::uint64_t dataset = 0;
  std::uint64_t judge = 0;
  std::uint64_t ksweep = 0;
  std::uint64_t study = 0;

  static RunSeeds derive(const RunConfig& config);
};

/// Owns a run directory: artifact paths, the manifest and the gateway.
class RunContext {
 public:
  explicit RunContext(RunConfig config);

  const RunConfig& config() const { return config_; }
  const RunSeeds& seeds() const { return seeds_; }
  std::filesystem::path path(const std::string& name) const { return config_.run_dir() / name; }

  /// Built on first use so commands that never call a model need no key.
  llm::Gateway& gateway();

  corpus::Corpus load_corpus() const;
  std::vector<intent::ClassifiedCitation> load_intents() const;
  std::vector<summarizer::ImpactSummary> load_summaries() const;

  /// Rewrites this command's manifest entry: input and output files with
  /// their sha256, the seeds used and any command-specific details.
  void record(const std::string& command, const std::vector<std::filesystem::path>& inputs,
              const std::vector<std::filesystem::path>& outputs, const nlohmann::json& seeds,
              const nlohmann::json& details = nlohmann::json::object());

 private:
  RunConfig config_;
  RunSeeds seeds_;
  std::unique_ptr<llm::Gateway> gateway_;
};

std::shared_ptr<llm::Provider> make_provider(const RunConfig& config);

/// 2 config, 3 missing input, 4 provider failure, 1 anything else.
int exit_code_for(const std::string& error_kind);

/// Command implementations; each writes its artifacts and a manifest entry
/// and prints one line per artifact to `out`.
namespace commands {
void fetch(RunContext& run, std::ostream& out);
void classify(RunContext& run, std::ostream& out);
void build_dataset(RunContext& run, std::ostream& out);
void summarize(RunContext& run, std::ostream& out);
void evaluate(RunContext& run, std::ostream& out);
void ablate(RunContext& run, std::ostream& out);
void ksweep(RunContext& run, std::ostream& out);
void author_summary(RunContext& run, std::ostream& out);
void bench_classifier(RunContext& run, std::ostream& out);
void fields(RunContext& run, std::ostream& out);
void create_study(RunContext& run, std::ostream& out);
void serve_study(RunContext& run, std::ostream& out);
}  // namespace commands

/// Full command line: global flags, one subcommand. Errors are reported on
/// `err` as a single JSON line and mapped to the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace impact::pipeline
