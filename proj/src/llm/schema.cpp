#include "impact/llm/schema.hpp"

#include <algorithm>

namespace impact::llm {
namespace {

bool matches_type(const nlohmann::json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

void validate_at(const nlohmann::json& v, const nlohmann::json& schema, const std::string& path,
                 std::vector<std::string>& errors) {
  if (!schema.is_object()) return;

  if (auto t = schema.find("type"); t != schema.end()) {
    bool ok = false;
    if (t->is_string()) {
      ok = matches_type(v, t->get<std::string>());
    } else if (t->is_array()) {
      for (const auto& alt : *t)
        if (alt.is_string() && matches_type(v, alt.get<std::string>())) ok = true;
    }
    if (!ok) {
      errors.push_back(path + ": expected type " + t->dump());
      return;
    }
  }

  if (auto e = schema.find("enum"); e != schema.end() && e->is_array()) {
    if (std::find(e->begin(), e->end(), v) == e->end()) errors.push_back(path + ": value not in enum");
  }

  if (v.is_object()) {
    const auto props = schema.value("properties", nlohmann::json::object());
    for (const auto& req : schema.value("required", nlohmann::json::array())) {
      if (req.is_string() && !v.contains(req.get<std::string>()))
        errors.push_back(path + ": missing required field '" + req.get<std::string>() + "'");
    }
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (props.contains(it.key())) {
        validate_at(it.value(), props[it.key()], path + "." + it.key(), errors);
      } else if (schema.contains("additionalProperties") && schema["additionalProperties"].is_boolean() &&
                 !schema["additionalProperties"].get<bool>()) {
        errors.push_back(path + ": unexpected field '" + it.key() + "'");
      }
    }
  }

  if (v.is_array()) {
    if (auto m = schema.find("minItems"); m != schema.end() && m->is_number_integer() &&
                                          v.size() < m->get<std::size_t>())
      errors.push_back(path + ": fewer than " + m->dump() + " items");
    if (auto items = schema.find("items"); items != schema.end() && items->is_object()) {
      for (std::size_t i = 0; i < v.size(); ++i)
        validate_at(v[i], *items, path + "[" + std::to_string(i) + "]", errors);
    }
  }
}

}  // namespace

std::vector<std::string> validate_json(const nlohmann::json& value, const nlohmann::json& schema) {
  std::vector<std::string> errors;
  validate_at(value, schema, "$", errors);
  return errors;
}

bool is_well_formed_schema(const nlohmann::json& schema) {
  return schema.is_object() && schema.contains("type") &&
         (schema["type"].is_string() || schema["type"].is_array());
}

OutputSchema impact_summary_schema() {
  nlohmann::json period = {
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"impact_period", "aspect_of_period", "impact_description", "evidence"}},
      {"properties",
       {{"impact_period", {{"type", "string"}, {"description", "start year - end year"}}},
        {"aspect_of_period",
         {{"type", "string"}, {"description", "the dominating citation intent(s) of that period"}}},
        {"impact_description",
         {{"type", "string"}, {"description", "a paragraph to describe the impact of that period"}}},
        {"evidence",
         {{"type", "array"},
          {"items", {{"type", "integer"}}},
          {"description", "citation IDs of citing papers from that period that back up the described aspect"}}}}}};
  nlohmann::json info = {
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"input_paper_id", "input_paper_title", "input_paper_year"}},
      {"properties",
       {{"input_paper_id", {{"type", "string"}, {"description", "id of input paper"}}},
        {"input_paper_title", {{"type", "string"}, {"description", "title of input paper"}}},
        {"input_paper_year", {{"type", "integer"}, {"description", "year of input paper"}}}}}};
  nlohmann::json body = {{"type", "object"},
                         {"additionalProperties", false},
                         {"required", {"input_paper_info", "impact_periods"}},
                         {"properties",
                          {{"input_paper_info", info},
                           {"impact_periods", {{"type", "array"}, {"items", period}}}}}};
  return OutputSchema{"impact_statement", body};
}

bool declares_impact_summary_fields(const nlohmann::json& schema_body) {
  try {
    const auto& props = schema_body.at("properties");
    const auto& info = props.at("input_paper_info").at("properties");
    const auto& period = props.at("impact_periods").at("items").at("properties");
    for (const char* k : {"input_paper_id", "input_paper_title", "input_paper_year"})
      if (!info.contains(k)) return false;
    for (const char* k : {"impact_period", "aspect_of_period", "impact_description", "evidence"})
      if (!period.contains(k)) return false;
    return true;
  } catch (const nlohmann::json::exception&) {
    return false;
  }
}

std::optional<nlohmann::json> extract_json(std::string_view text) {
  auto try_parse = [](std::string_view s) -> std::optional<nlohmann::json> {
    auto j = nlohmann::json::parse(s.begin(), s.end(), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
  };
  if (auto j = try_parse(text)) return j;

  if (auto fence = text.find("```"); fence != std::string_view::npos) {
    auto body_start = text.find('\n', fence);
    auto close = body_start == std::string_view::npos ? std::string_view::npos : text.find("```", body_start);
    if (close != std::string_view::npos) {
      if (auto j = try_parse(text.substr(body_start + 1, close - body_start - 1))) return j;
    }
  }

  for (auto [open, shut] : {std::pair{'{', '}'}, std::pair{'[', ']'}}) {
    auto b = text.find(open);
    auto e = text.rfind(shut);
    if (b != std::string_view::npos && e != std::string_view::npos && e > b) {
      if (auto j = try_parse(text.substr(b, e - b + 1))) return j;
    }
  }
  return std::nullopt;
}

}  // namespace impact::llm
