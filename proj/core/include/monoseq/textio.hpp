#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace monoseq::textio {

/// Shortest round-trip representation; byte-stable for identical values.
std::string format_double(double value);

/// Parses the output of format_double (also "inf", "-inf"). Throws FormatError.
double parse_double(std::string_view text, std::size_t line = 0);

std::size_t parse_size(std::string_view text, std::size_t line = 0);

std::vector<std::string_view> split(std::string_view text, char sep);

/// Reads one line, dropping a trailing CR. Returns false at end of stream.
bool read_line(std::istream& in, std::string& line);

}  // namespace monoseq::textio
