#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace uwbpos::csv {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

double parse_number(std::string_view text, std::string_view what);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Reads a whole file; throws IoError naming the path on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes `content` verbatim (LF endings); throws IoError naming the path.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Splits text into lines, dropping a trailing CR and the final empty line.
std::vector<std::string_view> lines(std::string_view text);

}  // namespace uwbpos::csv
