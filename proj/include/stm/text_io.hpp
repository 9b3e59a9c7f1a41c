#pragma once

#include <string>
#include <vector>

namespace stm {

// Formats a double with enough digits to round-trip (%.17g trimmed).
std::string format_double(double x);

// Writes content to path via a temp file + atomic rename; partial outputs
// never appear under the final name.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Reads a text file into lines, stripping trailing \r. Throws DataError if
// the file cannot be opened.
std::vector<std::string> read_lines(const std::string& path);

std::vector<std::string> split_tabs(const std::string& line);

std::string lowercase_ascii(std::string s);

}  // namespace stm
