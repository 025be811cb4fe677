#include "spikekal/text_format.hpp"

#include "spikekal/errors.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

namespace spikekal {

std::string format_double(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

std::string format_fixed6(double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t line) {
  const std::string text(trim(field));
  if (text.empty()) {
    throw ParseError("empty numeric field", line);
  }
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) {
    throw ParseError("not a number: '" + text + "'", line);
  }
  return value;
}

}  // namespace spikekal
