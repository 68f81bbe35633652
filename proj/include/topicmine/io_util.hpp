#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace topicmine {

/// Writes `content` to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

std::vector<std::string> split(std::string_view s, char sep);

/// Shortest decimal text that round-trips a double.
std::string format_double(double x);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

}  // namespace topicmine
