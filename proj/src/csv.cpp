#include "uwbcoop/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <string>

#include "uwbcoop/errors.hpp"

namespace uwbcoop::csv {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format(double value) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t line, std::string_view what) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (field.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(value)) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(field) + "'", line);
  }
  return value;
}

std::size_t parse_index(std::string_view field, std::size_t line, std::string_view what) {
  std::size_t value = 0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (field.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(field) + "'", line);
  }
  return value;
}

bool is_skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace uwbcoop::csv
