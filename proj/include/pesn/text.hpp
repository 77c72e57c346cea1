#pragma once

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pesn {

/// Shortest decimal form that round-trips to the same double.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

[[nodiscard]] double parse_double(std::string_view s);
[[nodiscard]] long long parse_int(std::string_view s);
[[nodiscard]] std::string_view trim(std::string_view s);
[[nodiscard]] std::vector<std::string_view> split(std::string_view s, char sep);
/// Splits on runs of spaces/tabs.
[[nodiscard]] std::vector<std::string_view> split_ws(std::string_view s);

/// Whole-file read/write; failures throw ConfigError naming the path.
[[nodiscard]] std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace pesn
