#include "impact/intent/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/parallel.hpp"
#include "impact/common/random.hpp"
#include "impact/common/text.hpp"

namespace impact::intent {

ClassifierMetrics compute_metrics(const std::map<std::string, IntentClass>& predictions,
                                  const std::map<std::string, IntentClass>& gold) {
  if (predictions.size() != gold.size()) throw IdMismatch("prediction and gold id sets differ in size");
  ClassifierMetrics m;
  for (const auto& [id, truth] : gold) {
    auto it = predictions.find(id);
    if (it == predictions.end()) throw IdMismatch("no prediction for id " + id);
    const bool pred = it->second == IntentClass::impact_revealing;
    const bool pos = truth == IntentClass::impact_revealing;
    if (pred && pos) ++m.tp;
    else if (pred) ++m.fp;
    else if (pos) ++m.fn;
    else ++m.tn;
  }
  const double tp = static_cast<double>(m.tp);
  m.precision = m.tp + m.fp ? tp / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn ? tp / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  const std::size_t n = m.tp + m.fp + m.fn + m.tn;
  m.accuracy = n ? static_cast<double>(m.tp + m.tn) / static_cast<double>(n) : 0.0;
  return m;
}

ClassifierMetrics always_impact_baseline(const std::map<std::string, IntentClass>& gold) {
  std::map<std::string, IntentClass> preds;
  for (const auto& [id, _] : gold) preds[id] = IntentClass::impact_revealing;
  return compute_metrics(preds, gold);
}

SweepSplit split_for_sweep(const std::vector<IclExample>& items, std::uint64_t seed) {
  const auto perm = seeded_permutation(items.size(), seed);
  const std::size_t n_train = items.size() * 4 / 10;
  const std::size_t n_dev = items.size() * 3 / 10;
  SweepSplit s;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    auto& bucket = i < n_train ? s.train : (i < n_train + n_dev ? s.dev : s.test);
    bucket.push_back(items[perm[i]]);
  }
  return s;
}

namespace {

std::map<std::string, IntentClass> gold_of(const std::vector<IclExample>& items, const char* prefix) {
  std::map<std::string, IntentClass> gold;
  for (std::size_t i = 0; i < items.size(); ++i) gold[prefix + std::to_string(i)] = items[i].intent_class;
  return gold;
}

void accumulate(ClassifierMetrics& acc, const ClassifierMetrics& m) {
  acc.precision += m.precision;
  acc.recall += m.recall;
  acc.f1 += m.f1;
  acc.accuracy += m.accuracy;
  acc.tp += m.tp;
  acc.fp += m.fp;
  acc.fn += m.fn;
  acc.tn += m.tn;
}

void divide(ClassifierMetrics& acc, int runs) {
  acc.precision /= runs;
  acc.recall /= runs;
  acc.f1 /= runs;
  acc.accuracy /= runs;
}

}  // namespace

SweepReport run_k_sweep(IntentEngine& engine, const std::vector<IclExample>& dataset, const std::vector<int>& k_values,
                        int runs, std::uint64_t seed, std::size_t workers) {
  if (runs < 1) throw ConfigError("sweep needs at least one run");
  SweepSplit split = split_for_sweep(dataset, seed);
  for (int k : k_values)
    if (k < 0 || static_cast<std::size_t>(k) > split.train.size())
      throw ConfigError("k=" + std::to_string(k) + " exceeds train split of " + std::to_string(split.train.size()));

  SweepReport report;
  report.split_seed = seed;
  report.train_size = split.train.size();
  report.dev_size = split.dev.size();
  report.test_size = split.test.size();
  const auto dev_gold = gold_of(split.dev, "dev-");
  const auto test_gold = gold_of(split.test, "test-");
  if (!dev_gold.empty()) report.dev_always_impact = always_impact_baseline(dev_gold);
  if (!test_gold.empty()) report.test_always_impact = always_impact_baseline(test_gold);

  for (int k : k_values) {
    SweepPoint point;
    point.k = k;
    for (int run = 0; run < runs; ++run) {
      IclConfig config;
      config.k = k;
      config.runs_per_context = 1;
      config.example_pool = split.train;
      config.shuffle_seed = derive_seed(derive_seed(seed, static_cast<std::uint64_t>(k)), static_cast<std::uint64_t>(run));

      auto score = [&](const std::vector<IclExample>& items, const std::map<std::string, IntentClass>& gold,
                       const std::string& prefix) {
        std::vector<IntentClass> preds(items.size());
        // run_index 0 keeps every instance of this run on the same shot list.
        parallel_for(items.size(), workers, [&](std::size_t i) {
          preds[i] = engine.generate_intent(prefix + std::to_string(i), items[i].context_text, config, 0).intent_class;
        });
        std::map<std::string, IntentClass> pred_map;
        for (std::size_t i = 0; i < preds.size(); ++i) pred_map[prefix + std::to_string(i)] = preds[i];
        return compute_metrics(pred_map, gold);
      };
      if (!split.dev.empty()) accumulate(point.dev, score(split.dev, dev_gold, "dev-"));
      if (!split.test.empty()) accumulate(point.test, score(split.test, test_gold, "test-"));
    }
    divide(point.dev, runs);
    divide(point.test, runs);
    report.points.push_back(point);
  }
  return report;
}

void to_json(nlohmann::json& j, const SweepReport& r) {
  j = {{"split_seed", r.split_seed},
       {"train_size", r.train_size},
       {"dev_size", r.dev_size},
       {"test_size", r.test_size},
       {"baseline_always_impact", {{"dev", r.dev_always_impact}, {"test", r.test_always_impact}}},
       {"points", nlohmann::json::array()}};
  for (const auto& p : r.points) j["points"].push_back({{"k", p.k}, {"dev", p.dev}, {"test", p.test}});
}

ExternalScheme scheme_from_string(const std::string& s) {
  if (s == "scaffolds") return ExternalScheme::scaffolds;
  if (s == "meaningful") return ExternalScheme::meaningful;
  if (s == "multicite") return ExternalScheme::multicite;
  throw ConfigError("unknown external scheme '" + s + "'");
}

std::string to_string(ExternalScheme s) {
  switch (s) {
    case ExternalScheme::scaffolds: return "scaffolds";
    case ExternalScheme::meaningful: return "meaningful";
    case ExternalScheme::multicite: return "multicite";
  }
  return "?";
}

IntentClass map_external_label(ExternalScheme scheme, const std::string& label) {
  std::string key;
  for (char ch : text::to_lower_ascii(text::trim(label))) key.push_back(ch == '_' || ch == '-' || ch == '/' ? ' ' : ch);
  key = text::collapse_whitespace(key);

  using C = IntentClass;
  static const std::map<std::string, C> scaffolds = {
      {"background", C::other}, {"method", C::impact_revealing}, {"result", C::impact_revealing}};
  static const std::map<std::string, C> meaningful = {
      {"meaningful", C::impact_revealing}, {"non meaningful", C::other}, {"not meaningful", C::other}};
  // MultiCite's released codes (background_information, similarities, ...) alias the display names.
  static const std::map<std::string, C> multicite = {
      {"background", C::other},          {"background information", C::other},
      {"motivation", C::impact_revealing}, {"future work", C::other},
      {"similar difference", C::impact_revealing}, {"similarities", C::impact_revealing},
      {"differences", C::impact_revealing},        {"uses", C::impact_revealing},
      {"extension", C::impact_revealing},          {"extends", C::impact_revealing}};

  const auto& table = scheme == ExternalScheme::scaffolds    ? scaffolds
                      : scheme == ExternalScheme::meaningful ? meaningful
                                                             : multicite;
  auto it = table.find(key);
  if (it == table.end()) throw UnknownLabel(to_string(scheme), label);
  return it->second;
}

std::map<std::string, IntentClass> load_external_predictions(ExternalScheme scheme,
                                                             const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingInput("no predictions file " + path.string());
  std::map<std::string, IntentClass> out;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(read_text_file(path))) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.contains("context_id") || !rec.contains("label"))
      throw CorruptRecord(line_no, "expected {context_id, label}");
    out[rec["context_id"].get<std::string>()] = map_external_label(scheme, rec["label"].get<std::string>());
  }
  return out;
}

std::vector<ClassifiedRecord> join_classified(const corpus::Corpus& corpus,
                                              const std::vector<ClassifiedCitation>& classified) {
  std::unordered_map<std::string, const corpus::CitationContext*> by_id;
  for (const auto& c : corpus.contexts) by_id[c.context_id] = &c;
  std::unordered_map<std::string, const corpus::Paper*> papers;
  for (const auto& p : corpus.papers) papers[p.paper_id] = &p;

  std::vector<ClassifiedRecord> out;
  for (const auto& cc : classified) {
    auto it = by_id.find(cc.context_id);
    if (it == by_id.end()) throw MissingInput("classification for unknown context " + cc.context_id);
    const auto* ctx = it->second;
    auto pit = papers.find(ctx->cited_paper_id);
    if (pit == papers.end()) throw MissingInput("context " + cc.context_id + " cites unknown paper");
    out.push_back({cc.context_id, ctx->cited_paper_id, pit->second->field, ctx->citing_year,
                   pit->second->citation_count, cc.final_class, cc.chosen_intent_text});
  }
  return out;
}

Split split_from_string(const std::string& s) {
  if (s == "all") return Split::all;
  if (s == "recent") return Split::recent;
  if (s == "older") return Split::older;
  if (s == "highly_cited") return Split::highly_cited;
  if (s == "less_cited") return Split::less_cited;
  throw ConfigError("unknown split '" + s + "'");
}

std::string to_string(Split s) {
  switch (s) {
    case Split::all: return "all";
    case Split::recent: return "recent";
    case Split::older: return "older";
    case Split::highly_cited: return "highly_cited";
    case Split::less_cited: return "less_cited";
  }
  return "?";
}

std::map<corpus::Field, FieldShare> field_distribution(const std::vector<ClassifiedRecord>& records, Split split) {
  std::optional<int> reference_year;
  for (const auto& r : records)
    if (r.citing_year && (!reference_year || *r.citing_year > *reference_year)) reference_year = r.citing_year;

  std::set<std::string> highly_cited;
  if (split == Split::highly_cited || split == Split::less_cited) {
    std::map<std::string, std::int64_t> counts;
    for (const auto& r : records) counts[r.cited_paper_id] = r.citation_count;
    std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    const std::size_t top = (ranked.size() * 20 + 99) / 100;
    for (std::size_t i = 0; i < top; ++i) highly_cited.insert(ranked[i].first);
  }

  auto selected = [&](const ClassifiedRecord& r) {
    switch (split) {
      case Split::all: return true;
      case Split::recent: return r.citing_year.has_value() && *r.citing_year > *reference_year - 5;
      case Split::older: return r.citing_year.has_value() && *r.citing_year <= *reference_year - 5;
      case Split::highly_cited: return highly_cited.count(r.cited_paper_id) > 0;
      case Split::less_cited: return highly_cited.count(r.cited_paper_id) == 0;
    }
    return false;
  };

  std::map<corpus::Field, std::pair<std::size_t, std::size_t>> counts;  // impact, total
  for (const auto& r : records) {
    if (!selected(r)) continue;
    auto& c = counts[r.field];
    if (r.final_class == IntentClass::impact_revealing) ++c.first;
    ++c.second;
  }
  if (counts.empty()) throw EmptySplit("split '" + to_string(split) + "' selects no contexts");

  std::map<corpus::Field, FieldShare> out;
  for (const auto& [field, c] : counts) {
    FieldShare s;
    s.n = c.second;
    s.impact_pct = 100.0 * static_cast<double>(c.first) / static_cast<double>(c.second);
    s.other_pct = 100.0 - s.impact_pct;
    out[field] = s;
  }
  return out;
}

std::vector<IntentTheme> intent_frequency(const std::vector<ClassifiedRecord>& records, const std::string& paper_id,
                                          std::size_t n) {
  std::map<std::string, std::size_t> counts;
  std::size_t impact = 0;
  for (const auto& r : records) {
    if (r.cited_paper_id != paper_id || r.final_class != IntentClass::impact_revealing) continue;
    ++impact;
    ++counts[text::normalize_label(r.intent_text)];
  }
  if (impact == 0) throw NoImpactCitations(paper_id);
  std::vector<IntentTheme> themes;
  for (const auto& [intent, count] : counts) themes.push_back({intent, count});
  std::stable_sort(themes.begin(), themes.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  if (themes.size() > n) themes.resize(n);
  return themes;
}

}  // namespace impact::intent
