#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lqa {

std::string_view trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);

/// First whitespace-delimited token of `s`.
std::string_view first_token(std::string_view s);

/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view s);

/// Splits on `sep`, trimming each piece and dropping empty pieces.
std::vector<std::string> split_list(std::string_view s, char sep = ',');

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Whole file as a string; throws DataError naming the path on failure.
std::string read_file(const std::string& path);

}  // namespace lqa
