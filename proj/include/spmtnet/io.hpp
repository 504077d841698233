#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spmtnet::io {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view text);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes via a sibling temporary file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string_view> split(std::string_view line, char sep);

} // namespace spmtnet::io
