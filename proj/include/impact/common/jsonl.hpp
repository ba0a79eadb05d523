#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "impact/common/error.hpp"

namespace impact {

std::string read_text_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename so readers never see a torn file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);

/// One compact JSON document per line. Returns the number of records written.
template <class T>
std::size_t store_records(const std::filesystem::path& path, const std::vector<T>& records) {
  std::string body;
  for (const auto& r : records) {
    body += nlohmann::json(r).dump();
    body.push_back('\n');
  }
  write_text_atomic(path, body);
  return records.size();
}

/// Inverse of store_records. Blank lines are skipped; anything that fails to
/// parse or convert raises CorruptRecord with the 1-based line number.
template <class T>
std::vector<T> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw CorruptRecord(line_no, e.what());
    } catch (const Error& e) {
      throw CorruptRecord(line_no, e.what());
    }
  }
  return out;
}

}  // namespace impact
