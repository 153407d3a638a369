#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace uwbcoop::csv {

/// Shortest decimal form that parses back to the identical double.
std::string format(double value);

/// Splits on commas and trims surrounding blanks from each field.
std::vector<std::string_view> split(std::string_view line);

/// Whole-field parses; throw ParseError tagged with `line` on failure.
double parse_double(std::string_view field, std::size_t line, std::string_view what);
std::size_t parse_index(std::string_view field, std::size_t line, std::string_view what);

/// True for blank lines and `#` comments.
bool is_skippable(std::string_view line);

}  // namespace uwbcoop::csv
