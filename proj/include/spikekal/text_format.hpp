#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spikekal {

// Shortest text that reads back to the same double.
std::string format_double(double value);
// Fixed notation with 6 decimals, used for time columns.
std::string format_fixed6(double value);

std::string_view trim(std::string_view text);
std::vector<std::string> split_csv_line(std::string_view line);

// Throws ParseError naming `line` when `field` is not a complete number.
double parse_double(std::string_view field, std::size_t line);

}  // namespace spikekal
