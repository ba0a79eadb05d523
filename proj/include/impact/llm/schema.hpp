#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/llm/types.hpp"

namespace impact::llm {

/// Validates `value` against the JSON-Schema subset used for structured
/// output: type (single or list), properties, required, additionalProperties
/// (boolean), items, enum, minItems. Returns one message per violation;
/// empty means valid.
std::vector<std::string> validate_json(const nlohmann::json& value, const nlohmann::json& schema);

/// True if `schema` is usable by validate_json (an object with a type).
bool is_well_formed_schema(const nlohmann::json& schema);

/// Schema for the impact-summary structured output: paper info plus a list of
/// impact periods, each with period, aspect, description and evidence ids.
OutputSchema impact_summary_schema();

/// True if the schema declares every required field of the impact-summary
/// shape.
bool declares_impact_summary_fields(const nlohmann::json& schema_body);

/// Pulls a JSON document out of model text: the whole text, a fenced
/// ```json block, or the outermost {...} / [...] span.
std::optional<nlohmann::json> extract_json(std::string_view text);

}  // namespace impact::llm
