#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace coursemi::io {

// Reads a tab-separated file with a mandatory header line. `on_row` receives
// the 1-based line number and the split fields of every non-empty data line.
// Throws IoError if the file cannot be opened and ParseError if the header
// does not start with `expected_header`.
void read_tsv(const std::string& path, const std::vector<std::string>& expected_header,
              const std::function<void(std::size_t, const std::vector<std::string_view>&)>& on_row,
              bool allow_extra_columns = false);

std::vector<std::string_view> split(std::string_view line, char sep);

// Strict decimal parse of the whole field; returns false on junk or overflow.
bool parse_double(std::string_view s, double& out);
bool parse_size(std::string_view s, std::size_t& out);

// Shortest representation that round-trips exactly.
std::string format_double(double v);

// Writes via a temporary sibling file and renames it into place so readers
// never observe a partial file.
void write_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace coursemi::io
