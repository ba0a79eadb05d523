#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impact/corpus/store.hpp"
#include "impact/intent/engine.hpp"
#include "impact/intent/types.hpp"

namespace impact::intent {

/// impact_revealing is the positive class. Throws IdMismatch unless both maps
/// cover the same ids.
ClassifierMetrics compute_metrics(const std::map<std::string, IntentClass>& predictions,
                                  const std::map<std::string, IntentClass>& gold);

/// Metrics of a predictor that always answers impact_revealing.
ClassifierMetrics always_impact_baseline(const std::map<std::string, IntentClass>& gold);

// --- K sweep -------------------------------------------------------------

struct SweepSplit {
  std::vector<IclExample> train, dev, test;
};

/// floor(40%) train, floor(30%) dev, the rest test, by seeded permutation.
SweepSplit split_for_sweep(const std::vector<IclExample>& items, std::uint64_t seed);

struct SweepPoint {
  int k = 0;
  ClassifierMetrics dev;   // averaged over runs
  ClassifierMetrics test;  // averaged over runs
};

struct SweepReport {
  std::uint64_t split_seed = 0;
  std::size_t train_size = 0, dev_size = 0, test_size = 0;
  ClassifierMetrics dev_always_impact, test_always_impact;
  std::vector<SweepPoint> points;
};

/// Every dev and test instance is classified once per run with shots drawn
/// from the train split under derive_seed(derive_seed(seed, k), run).
/// ConfigError if any k exceeds the train split, checked before any call.
SweepReport run_k_sweep(IntentEngine& engine, const std::vector<IclExample>& dataset, const std::vector<int>& k_values,
                        int runs, std::uint64_t seed, std::size_t workers = 8);

void to_json(nlohmann::json& j, const SweepReport& r);

// --- external classifiers ---------------------------------------------------

enum class ExternalScheme { scaffolds, meaningful, multicite };

ExternalScheme scheme_from_string(const std::string& s);
std::string to_string(ExternalScheme s);

/// Coarse label of an external classifier mapped onto the binary classes.
/// UnknownLabel for anything outside the scheme's vocabulary.
IntentClass map_external_label(ExternalScheme scheme, const std::string& label);

/// preds_<scheme>.jsonl: {"context_id": ..., "label": ...} per line.
std::map<std::string, IntentClass> load_external_predictions(ExternalScheme scheme, const std::filesystem::path& path);

// --- corpus-level statistics -----------------------------------------------

/// One classified context joined with its cited paper's metadata.
struct ClassifiedRecord {
  std::string context_id;
  std::string cited_paper_id;
  corpus::Field field = corpus::Field::other;
  std::optional<int> citing_year;
  std::int64_t citation_count = 0;
  IntentClass final_class = IntentClass::other;
  std::string intent_text;
};

/// Joins classifications to contexts and papers. MissingInput if a
/// classification refers to an unknown context.
std::vector<ClassifiedRecord> join_classified(const corpus::Corpus& corpus,
                                              const std::vector<ClassifiedCitation>& classified);

enum class Split { all, recent, older, highly_cited, less_cited };
Split split_from_string(const std::string& s);
std::string to_string(Split s);

struct FieldShare {
  std::size_t n = 0;
  double impact_pct = 0;
  double other_pct = 0;
};

/// Per-field impact/other percentages over one split. "recent" is the last
/// five citing years up to the newest citing year in the records; undated
/// contexts belong to neither recent nor older. "highly_cited" is the top
/// ceil(20%) of distinct cited papers by citation count (ties by id).
/// EmptySplit when the split selects nothing.
std::map<corpus::Field, FieldShare> field_distribution(const std::vector<ClassifiedRecord>& records, Split split);

struct IntentTheme {
  std::string intent;
  std::size_t count = 0;
  bool operator==(const IntentTheme&) const = default;
};

/// Top-n normalized intents among a paper's impact-revealing contexts,
/// by count then lexicographically. NoImpactCitations if there are none.
std::vector<IntentTheme> intent_frequency(const std::vector<ClassifiedRecord>& records, const std::string& paper_id,
                                          std::size_t n);

}  // namespace impact::intent
