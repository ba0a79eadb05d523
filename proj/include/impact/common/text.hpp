#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace impact::text {

/// Unicode NFC followed by whitespace collapse (any Unicode white space run
/// becomes one ASCII space) and trimming. Used for dedup keys.
std::string normalize(std::string_view utf8);

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// Lowercase, trim, collapse whitespace and strip wrapping quotes or trailing
/// punctuation. Used when matching labels echoed back by a model.
std::string normalize_label(std::string_view s);

bool icontains(std::string_view haystack, std::string_view needle);
std::vector<std::string> split_lines(std::string_view s);
std::size_t word_count(std::string_view s);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace impact::text
