#pragma once

#include <string>
#include <vector>

namespace bsvi {

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

/// Strict double parse; accepts inf / -inf. Throws std::invalid_argument.
double parse_double(const std::string& s);
/// "[a,b,...]" -> {a, b, ...}. Throws std::invalid_argument.
std::vector<double> parse_bracket_list(const std::string& s);

/// Shortest decimal that round-trips.
std::string format_short(double v);
/// Fixed 17-significant-digit form used in CSV output.
std::string format_csv(double v);

}  // namespace bsvi
