#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// Minimal CSV plumbing shared by the file formats. Doubles are written in
// shortest round-trip form so load(save(x)) is bit-exact.
namespace optwedge::csv {

std::string format_double(double value);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Parses a full-field double; throws Error(Parse) naming `line_no`.
double parse_double(std::string_view field, std::size_t line_no);
long long parse_int(std::string_view field, std::size_t line_no);

/// Reads a whole file; throws Error(Io) if it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Reads `text` line by line, checks the header and returns the data rows
/// together with their 1-based line numbers.
struct Row {
  std::size_t line_no;
  std::vector<std::string_view> fields;
};
std::vector<Row> parse(std::string_view text, std::string_view expected_header);

/// 64-bit FNV-1a, used for config and data fingerprints.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace optwedge::csv
