#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace nelliptic {

/// Shortest decimal form that reads back to the identical double.
std::string format_double(double v);

/// Strict parse of a whole token; throws an invalid_input error on junk.
double parse_double(std::string_view text);
int parse_int(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::vector<double> parse_double_list(std::string_view text, char sep = ',');

}  // namespace nelliptic
