#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gridstorm::text {

void strip_cr(std::string& line);
[[nodiscard]] std::vector<std::string_view> split(std::string_view line, char sep);

// Throw ParseError("<field>: ...", line) on malformed input.
[[nodiscard]] double parse_double(std::string_view field, std::string_view name, std::size_t line);
[[nodiscard]] std::int64_t parse_int(std::string_view field, std::string_view name, std::size_t line);

/// Shortest decimal text that parses back to the identical double.
[[nodiscard]] std::string format_double(double v);

}  // namespace gridstorm::text
