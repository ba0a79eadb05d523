#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/dataset/patterns.hpp"
#include "impact/intent/types.hpp"

namespace impact::dataset {

enum class Provenance { pattern_match, pst_other };

struct LabeledContext {
  std::string context_text;
  intent::IntentClass label = intent::IntentClass::other;
  Provenance provenance = Provenance::pst_other;
  std::vector<int> matched_pattern_ids;
  std::optional<Polarity> polarity;  // set for impact-revealing records

  bool operator==(const LabeledContext&) const = default;
};

void to_json(nlohmann::json& j, const LabeledContext& c);
void from_json(const nlohmann::json& j, LabeledContext& c);

struct BuildOptions {
  std::size_t n_impact = 2000;
  std::size_t n_other = 2000;
  std::uint64_t seed = 0;
  std::size_t workers = 8;
};

/// Balanced labeled set. Impact-revealing records are pattern matches from
/// `crawled`, ceil(n_impact/2) confirmation and floor(n_impact/2) correction;
/// a context's polarity is that of its lowest-id matching pattern. "Other"
/// records come from `pst_other` and must match no pattern at all. Texts are
/// deduplicated after normalization across both sources. Sampling is a
/// seeded shuffle per bucket; the result is shuffled once more.
/// InsufficientMatches(polarity, have, need) when a bucket runs short.
std::vector<LabeledContext> build_dataset(const std::vector<std::string>& crawled,
                                          const std::vector<std::string>& pst_other, const PatternSet& patterns,
                                          const BuildOptions& options);

}  // namespace impact::dataset
