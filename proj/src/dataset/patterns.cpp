#include "impact/dataset/patterns.hpp"

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/text.hpp"

namespace impact::dataset {

std::string to_string(Polarity p) { return p == Polarity::confirmation ? "confirmation" : "correction"; }

Polarity polarity_from_string(const std::string& s) {
  if (s == "confirmation") return Polarity::confirmation;
  if (s == "correction") return Polarity::correction;
  throw ConfigError("unknown polarity '" + s + "'");
}

PatternSet compile_patterns_text(const std::string& content) {
  PatternSet set;
  int line_no = 0;
  for (const auto& raw : text::split_lines(content)) {
    ++line_no;
    const std::string line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = raw.find('\t');
    if (tab == std::string::npos)
      throw ConfigError("pattern line " + std::to_string(line_no) + " lacks a polarity<TAB>expression split");

    ImpactPattern p;
    p.pattern_id = static_cast<int>(set.size()) + 1;
    p.polarity = polarity_from_string(text::trim(raw.substr(0, tab)));
    p.expression = raw.substr(tab + 1);
    while (!p.expression.empty() && (p.expression.back() == '\r' || p.expression.back() == ' '))
      p.expression.pop_back();
    if (p.expression.empty()) throw ConfigError("pattern line " + std::to_string(line_no) + " has no expression");
    try {
      std::regex re(p.expression, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
      set.push_back({p, std::move(re)});
    } catch (const std::regex_error& e) {
      throw PatternCompileError(p.pattern_id, e.what());
    }
  }
  if (set.empty()) throw ConfigError("pattern file contains no patterns");
  return set;
}

PatternSet compile_patterns(const std::filesystem::path& pattern_file) {
  if (!std::filesystem::exists(pattern_file)) throw MissingInput("pattern file not found: " + pattern_file.string());
  return compile_patterns_text(read_text_file(pattern_file));
}

MatchResult match_impact(const std::string& context_text, const PatternSet& patterns) {
  MatchResult r;
  for (const auto& p : patterns) {
    if (std::regex_search(context_text, p.regex)) {
      r.pattern_ids.push_back(p.pattern.pattern_id);
      r.polarities.insert(p.pattern.polarity);
    }
  }
  r.matched = !r.pattern_ids.empty();
  return r;
}

}  // namespace impact::dataset
