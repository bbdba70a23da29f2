#pragma once
// Shared helpers for the line-oriented text formats.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ancer::textio {

// Shortest form that round-trips; never more than 17 significant digits.
std::string format_double(double v);
// Fixed 17 significant digits (%.17g).
std::string format_double17(double v);

// Throws ParseError carrying `line` on malformed input.
double parse_double(std::string_view token, std::size_t line);
std::size_t parse_size(std::string_view token, std::size_t line);

std::vector<std::string_view> split_ws(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delim);
std::string_view trim(std::string_view s);

}  // namespace ancer::textio
