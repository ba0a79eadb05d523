#include "impact/evaluator/judges.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/text.hpp"

namespace impact::evaluator {

namespace {

void require(const std::string& tmpl, const std::string& file, std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (tmpl.find(k) == std::string::npos) throw ConfigError(file + " lacks placeholder " + k);
}

std::string read_prompt(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingInput("judge prompt " + path.string() + " not found");
  return read_text_file(path);
}

std::optional<std::string> tag(const std::string& reply, const std::string& name) {
  const std::regex re("<" + name + R"(>([\s\S]*?)</)" + name + ">", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(reply, m, re)) return std::nullopt;
  return m[1].str();
}

// Drops wrapping brackets or quotes left over from the template, e.g. "[yes]".
std::string unwrap(std::string s) {
  s = text::trim(s);
  while (s.size() >= 2 && ((s.front() == '[' && s.back() == ']') || (s.front() == '"' && s.back() == '"') ||
                           (s.front() == '\'' && s.back() == '\''))) {
    s = text::trim(s.substr(1, s.size() - 2));
  }
  return s;
}

std::optional<int> small_int(const std::string& token) {
  const auto t = text::trim(token);
  if (t.empty() || t.size() > 2 || !std::all_of(t.begin(), t.end(), ::isdigit)) return std::nullopt;
  const int v = std::stoi(t);
  if (v > 10) return std::nullopt;
  return v;
}

}  // namespace

std::filesystem::path EvalPrompts::default_dir() { return std::filesystem::path(IMPACT_SOURCE_DIR) / "prompts" / "eval"; }

EvalPrompts EvalPrompts::load(const std::filesystem::path& dir) {
  EvalPrompts p;
  p.faithfulness = read_prompt(dir / "faithfulness.txt");
  require(p.faithfulness, "faithfulness.txt", {"{{PAPER_NAME}}", "{{DESCRIPTION}}", "{{SOURCES}}"});
  p.coverage_cluster = read_prompt(dir / "coverage_cluster.txt");
  require(p.coverage_cluster, "coverage_cluster.txt", {"$listOfPhrases$"});
  p.coverage_judge = read_prompt(dir / "coverage_judge.txt");
  require(p.coverage_judge, "coverage_judge.txt", {"$listOfThemes$", "$summary$"});
  p.geval = read_prompt(dir / "geval.txt");
  require(p.geval, "geval.txt", {"$title$", "$year$", "$metric$", "$steps$", "$summary$"});
  for (auto m : all_metrics()) {
    const auto file = to_string(m) + ".txt";
    for (const auto& line : text::split_lines(read_prompt(dir / file))) {
      const auto l = text::trim(line);
      if (l.empty()) continue;
      if (l.front() == '#') {
        p.metric_names[m] = text::trim(l.substr(1));
        continue;
      }
      p.steps[m].push_back(l);
    }
    if (p.steps[m].empty()) throw ConfigError(file + " has no evaluation steps");
    if (!p.metric_names.count(m)) p.metric_names[m] = to_string(m);
  }
  return p;
}

std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    bool hit = false;
    for (const auto& [key, value] : values) {
      if (!key.empty() && tmpl.compare(i, key.size(), key) == 0) {
        out += value;
        i += key.size();
        hit = true;
        break;
      }
    }
    if (!hit) out.push_back(tmpl[i++]);
  }
  return out;
}

std::string python_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += nlohmann::json(items[i]).dump();
  }
  return out + "]";
}

std::string render_period_description(const summarizer::ImpactPeriod& p) {
  return "Impact period: " + std::to_string(p.start_year) + " - " + std::to_string(p.end_year) + "\n" +
         "Aspect: " + p.aspect + "\n" + text::trim(p.description);
}

std::string render_summary_text(const summarizer::ImpactSummary& s) {
  std::string out = "Impact summary of \"" + s.paper_title + "\" (" + std::to_string(s.paper_year) + ")\n";
  for (std::size_t i = 0; i < s.periods.size(); ++i) {
    const auto& p = s.periods[i];
    out += "\nPeriod " + std::to_string(i + 1) + ": " + std::to_string(p.start_year) + " - " +
           std::to_string(p.end_year) + " | " + p.aspect + "\n" + text::trim(p.description) + "\n";
  }
  return out;
}

std::vector<corpus::CitationContext> contexts_in_period(const std::vector<corpus::CitationContext>& contexts,
                                                        const summarizer::ImpactPeriod& period) {
  std::vector<corpus::CitationContext> out;
  for (const auto& c : contexts)
    if (c.citing_year && *c.citing_year >= period.start_year && *c.citing_year <= period.end_year) out.push_back(c);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(*a.citing_year, a.citing_title, a.text, a.context_id) <
           std::tie(*b.citing_year, b.citing_title, b.text, b.context_id);
  });
  return out;
}

std::string format_sources(const std::vector<corpus::CitationContext>& bucket) {
  std::string out;
  for (const auto& c : bucket) {
    if (!out.empty()) out += "\n";
    out += c.citing_title + ":" + text::collapse_whitespace(c.text);
  }
  return out;
}

std::optional<FaithfulnessVerdict> parse_faithfulness_reply(const std::string& reply, std::size_t period_index,
                                                            std::string& problem) {
  const auto answer = tag(reply, "answer");
  if (!answer) {
    problem = "missing <answer> tag";
    return std::nullopt;
  }
  const auto a = text::normalize_label(unwrap(*answer));
  if (a != "yes" && a != "no") {
    problem = "answer must be yes or no, got '" + text::trim(*answer) + "'";
    return std::nullopt;
  }
  FaithfulnessVerdict v;
  v.period_index = period_index;
  v.answer = a == "yes";
  v.analysis = text::trim(tag(reply, "analysis").value_or(""));

  if (v.answer) {
    const auto proof = tag(reply, "proof");
    if (!proof) {
      problem = "a yes answer needs a <proof> tag";
      return std::nullopt;
    }
    static const std::regex bullet(R"(^\s*(?:[-*•]|\d+[.)])\s*)");
    for (const auto& line : text::split_lines(*proof)) {
      auto entry = unwrap(std::regex_replace(line, bullet, ""));
      if (entry.empty() || text::normalize_label(entry) == "none") continue;
      v.proof.push_back(entry);
    }
    if (v.proof.empty()) {
      problem = "a yes answer must list the supporting citations in <proof>";
      return std::nullopt;
    }
  }
  return v;
}

std::optional<double> parse_score(const std::string& reply) {
  static const std::regex re(R"(score\s*(?:\*\*)?\s*[:=]\s*(?:\*\*)?\s*(\d+(?:\.\d+)?))", std::regex::icase);
  std::optional<double> last;
  for (auto it = std::sregex_iterator(reply.begin(), reply.end(), re); it != std::sregex_iterator(); ++it)
    last = std::stod((*it)[1].str());
  if (!last || *last < 0.0 || *last > 10.0) return std::nullopt;
  return last;
}

std::optional<double> logprob_score(const std::vector<llm::TokenLogprob>& tokens) {
  std::size_t anchor = tokens.size();
  for (std::size_t i = tokens.size(); i-- > 0;) {
    if (text::icontains(tokens[i].token, "score")) {
      anchor = i;
      break;
    }
  }
  if (anchor == tokens.size()) return std::nullopt;
  for (std::size_t i = anchor + 1; i < tokens.size(); ++i) {
    if (!small_int(tokens[i].token)) continue;
    double mass = 0.0, weighted = 0.0;
    auto add = [&](const std::string& tok, double lp) {
      if (auto v = small_int(tok)) {
        const double p = std::exp(lp);
        mass += p;
        weighted += p * *v;
      }
    };
    if (tokens[i].top.empty()) {
      add(tokens[i].token, tokens[i].logprob);
    } else {
      for (const auto& [tok, lp] : tokens[i].top) add(tok, lp);
    }
    if (mass <= 0.0) return std::nullopt;
    return weighted / mass;
  }
  return std::nullopt;
}

}  // namespace impact::evaluator
