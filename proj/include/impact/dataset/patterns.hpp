#pragma once

#include <filesystem>
#include <regex>
#include <set>
#include <string>
#include <vector>

namespace impact::dataset {

enum class Polarity { confirmation, correction };

std::string to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);

struct ImpactPattern {
  int pattern_id = 0;
  std::string expression;
  Polarity polarity = Polarity::confirmation;
};

struct CompiledPattern {
  ImpactPattern pattern;
  std::regex regex;
};

using PatternSet = std::vector<CompiledPattern>;

/// Parses "polarity<TAB>expression" lines; '#' lines and blank lines are
/// skipped. ConfigError for an empty list or a malformed line,
/// PatternCompileError(pattern_id) for an expression that does not compile.
PatternSet compile_patterns_text(const std::string& content);
PatternSet compile_patterns(const std::filesystem::path& pattern_file);

struct MatchResult {
  bool matched = false;
  std::vector<int> pattern_ids;  // ascending
  std::set<Polarity> polarities;
};

MatchResult match_impact(const std::string& context_text, const PatternSet& patterns);

}  // namespace impact::dataset
