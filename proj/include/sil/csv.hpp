#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sil {

// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

std::string trim(std::string_view text);

}  // namespace sil
