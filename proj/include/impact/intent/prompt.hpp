#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "impact/intent/types.hpp"

namespace impact::intent {

/// Marker that introduces the context to classify; the answer follows it.
inline constexpr const char* kTargetMarker = "Target citation context:";

/// The ten hand-annotated seed examples shipped with the tool.
const std::vector<IclExample>& seed_pool();

/// Reads icl_pool.jsonl. Every intent must be at most 15 words.
std::vector<IclExample> load_pool(const std::filesystem::path& path);

/// The first k entries of a seeded shuffle of the whole pool.
std::vector<IclExample> select_shots(const IclConfig& config);

/// Instruction block, k shots (omitted with their header when k = 0), then
/// the target context and the expected answer format.
std::string build_icl_prompt(const IclConfig& config, const std::string& context_text);

/// One-line answer shape used by the examples and the repair reprompt.
std::string format_answer(const std::string& intent_text, IntentClass c);

}  // namespace impact::intent
