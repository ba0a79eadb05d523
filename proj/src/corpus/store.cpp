#include "impact/corpus/store.hpp"

#include <set>
#include <unordered_set>

#include "impact/common/error.hpp"
#include "impact/common/jsonl.hpp"
#include "impact/common/text.hpp"

namespace impact::corpus {

const Paper* Corpus::find_paper(const std::string& paper_id) const {
  for (const auto& p : papers)
    if (p.paper_id == paper_id) return &p;
  return nullptr;
}

std::vector<CitationContext> Corpus::contexts_of(const std::string& paper_id) const {
  std::vector<CitationContext> out;
  for (const auto& c : contexts)
    if (c.cited_paper_id == paper_id) out.push_back(c);
  return out;
}

void Corpus::validate() const {
  std::set<std::string> ids;
  for (const auto& p : papers) {
    p.validate();
    if (!ids.insert(p.paper_id).second) throw PreconditionError("duplicate paper id " + p.paper_id);
  }
  std::unordered_set<std::string> keys;
  for (const auto& c : contexts) {
    if (!ids.count(c.cited_paper_id))
      throw PreconditionError("context " + c.context_id + " cites unknown paper " + c.cited_paper_id);
    if (text::normalize(c.text).empty()) throw PreconditionError("context " + c.context_id + " has empty text");
    if (!keys.insert(dedup_key(c)).second) throw PreconditionError("duplicate context " + c.context_id);
  }
}

std::map<std::string, IndexEntry> CorpusStore::build_index(const Corpus& corpus) {
  std::map<std::string, IndexEntry> index;
  std::map<std::string, std::set<std::string>> citers;
  for (const auto& p : corpus.papers) index[p.paper_id];
  for (const auto& c : corpus.contexts) {
    ++index[c.cited_paper_id].contexts;
    citers[c.cited_paper_id].insert(c.citing_paper_id);
  }
  for (auto& [id, entry] : index) entry.citing_papers = citers[id].size();
  return index;
}

void CorpusStore::save(const Corpus& corpus) const {
  corpus.validate();
  store_records(papers_path(), corpus.papers);
  store_records(contexts_path(), corpus.contexts);
  nlohmann::json index = nlohmann::json::object();
  for (const auto& [id, e] : build_index(corpus))
    index[id] = {{"contexts", e.contexts}, {"citing_papers", e.citing_papers}};
  write_json_file(index_path(), index);
}

std::map<std::string, IndexEntry> CorpusStore::read_index() const {
  if (!std::filesystem::exists(index_path())) throw MissingInput("no corpus index at " + index_path().string());
  std::map<std::string, IndexEntry> index;
  const auto doc = read_json_file(index_path());
  for (const auto& [id, e] : doc.items())
    index[id] = {e.at("contexts").get<std::size_t>(), e.at("citing_papers").get<std::size_t>()};
  return index;
}

Corpus CorpusStore::load() const {
  for (const auto& p : {papers_path(), contexts_path()})
    if (!std::filesystem::exists(p)) throw MissingInput("missing corpus file " + p.string());
  Corpus corpus;
  corpus.papers = load_records<Paper>(papers_path());
  corpus.contexts = load_records<CitationContext>(contexts_path());
  const auto stored = read_index();
  const auto actual = build_index(corpus);
  if (stored.size() != actual.size()) throw CorruptRecord(1, "index lists a different set of papers");
  for (const auto& [id, e] : actual) {
    auto it = stored.find(id);
    if (it == stored.end() || it->second.contexts != e.contexts || it->second.citing_papers != e.citing_papers)
      throw CorruptRecord(1, "index counts for " + id + " disagree with " + contexts_path().filename().string());
  }
  return corpus;
}

}  // namespace impact::corpus
