#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pmon {

// Shortest round-trip representation; integral values keep a trailing ".0".
std::string format_double(double v);
std::string join_doubles(std::span<const double> v, std::string_view sep);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);
std::vector<double> parse_double_list(std::string_view s);

// Writes via a temporary file in the same directory followed by rename().
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);
std::string read_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace pmon
