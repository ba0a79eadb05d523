#include "impact/dataset/builder.hpp"

#include <unordered_set>

#include "impact/common/error.hpp"
#include "impact/common/parallel.hpp"
#include "impact/common/random.hpp"
#include "impact/common/text.hpp"

namespace impact::dataset {

void to_json(nlohmann::json& j, const LabeledContext& c) {
  j = {{"context_text", c.context_text},
       {"label", intent::to_string(c.label)},
       {"provenance", c.provenance == Provenance::pattern_match ? "pattern_match" : "pst_other"},
       {"matched_pattern_ids", c.matched_pattern_ids},
       {"polarity", c.polarity ? nlohmann::json(to_string(*c.polarity)) : nlohmann::json(nullptr)}};
}

void from_json(const nlohmann::json& j, LabeledContext& c) {
  c.context_text = j.at("context_text").get<std::string>();
  c.label = intent::class_from_string(j.at("label").get<std::string>());
  const auto prov = j.at("provenance").get<std::string>();
  if (prov != "pattern_match" && prov != "pst_other") throw PreconditionError("unknown provenance " + prov);
  c.provenance = prov == "pattern_match" ? Provenance::pattern_match : Provenance::pst_other;
  c.matched_pattern_ids = j.at("matched_pattern_ids").get<std::vector<int>>();
  const auto& pol = j.value("polarity", nlohmann::json(nullptr));
  c.polarity = pol.is_null() ? std::nullopt : std::optional<Polarity>(polarity_from_string(pol.get<std::string>()));
}

namespace {

struct Candidate {
  std::string text;
  MatchResult match;
};

// Unique (by normalized text) candidates with their match results, in input order.
std::vector<Candidate> match_unique(const std::vector<std::string>& texts, const PatternSet& patterns,
                                    std::size_t workers, std::unordered_set<std::string>& seen) {
  std::vector<std::string> unique;
  for (const auto& t : texts) {
    const auto key = text::normalize(t);
    if (key.empty() || !seen.insert(key).second) continue;
    unique.push_back(t);
  }
  std::vector<Candidate> out(unique.size());
  parallel_for(unique.size(), workers, [&](std::size_t i) { out[i] = {unique[i], match_impact(unique[i], patterns)}; });
  return out;
}

std::vector<Candidate> take(std::vector<Candidate> bucket, std::size_t need, std::uint64_t seed,
                            const std::string& name) {
  if (bucket.size() < need) throw InsufficientMatches(name, bucket.size(), need);
  seeded_shuffle(bucket, seed);
  bucket.resize(need);
  return bucket;
}

}  // namespace

std::vector<LabeledContext> build_dataset(const std::vector<std::string>& crawled,
                                          const std::vector<std::string>& pst_other, const PatternSet& patterns,
                                          const BuildOptions& options) {
  if (patterns.empty()) throw ConfigError("no patterns");
  std::unordered_set<std::string> seen;
  auto crawled_matches = match_unique(crawled, patterns, options.workers, seen);

  std::vector<Candidate> confirmation, correction;
  for (auto& c : crawled_matches) {
    if (!c.match.matched) continue;
    const int first = c.match.pattern_ids.front();
    const Polarity primary = patterns[static_cast<std::size_t>(first - 1)].pattern.polarity;
    (primary == Polarity::confirmation ? confirmation : correction).push_back(std::move(c));
  }

  const std::size_t n_conf = (options.n_impact + 1) / 2;
  const std::size_t n_corr = options.n_impact / 2;
  auto conf = take(std::move(confirmation), n_conf, derive_seed(options.seed, 1), "confirmation");
  auto corr = take(std::move(correction), n_corr, derive_seed(options.seed, 2), "correction");

  // Texts already used as impact-revealing are in `seen`, so pst_other
  // duplicates of them are dropped here.
  auto other_candidates = match_unique(pst_other, patterns, options.workers, seen);
  std::vector<Candidate> clean;
  for (auto& c : other_candidates)
    if (!c.match.matched) clean.push_back(std::move(c));
  auto others = take(std::move(clean), options.n_other, derive_seed(options.seed, 3), "other");

  std::vector<LabeledContext> out;
  out.reserve(conf.size() + corr.size() + others.size());
  for (auto* bucket : {&conf, &corr})
    for (auto& c : *bucket)
      out.push_back({std::move(c.text), intent::IntentClass::impact_revealing, Provenance::pattern_match,
                     c.match.pattern_ids,
                     bucket == &conf ? Polarity::confirmation : Polarity::correction});
  for (auto& c : others)
    out.push_back({std::move(c.text), intent::IntentClass::other, Provenance::pst_other, {}, std::nullopt});
  seeded_shuffle(out, derive_seed(options.seed, 4));
  return out;
}

}  // namespace impact::dataset
