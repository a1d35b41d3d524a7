#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace reco::io {

/// Writes `contents` to `path` through a sibling temp file and a rename, so a
/// reader never observes a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Lines of a text file with trailing '\r' stripped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view text, char sep);

std::string_view trim(std::string_view text);

/// Shortest decimal form that round-trips a double.
std::string format_double(double value);

double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

}  // namespace reco::io
