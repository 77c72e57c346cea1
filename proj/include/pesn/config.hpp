#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pesn {

/// `key = value` text with `#` comments. Lookups record which keys were read
/// so that leftovers (typos) can be reported.
class Config {
 public:
  Config() = default;

  [[nodiscard]] static Config parse(std::string_view text);
  [[nodiscard]] static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }

  [[nodiscard]] std::string get(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double get(const std::string& key, double fallback) const;
  [[nodiscard]] long long get(const std::string& key, long long fallback) const;
  [[nodiscard]] int get(const std::string& key, int fallback) const;
  [[nodiscard]] std::size_t get(const std::string& key, std::size_t fallback) const;
  [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  [[nodiscard]] bool get(const std::string& key, bool fallback) const;
  /// Comma or whitespace separated list.
  [[nodiscard]] std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
  [[nodiscard]] std::vector<std::size_t> get_sizes(const std::string& key,
                                                   const std::vector<std::size_t>& fallback) const;

  /// Throws ConfigError listing keys that were never read.
  void check_all_used() const;

  /// Canonical `key = value` lines, sorted by key.
  [[nodiscard]] std::string canonical() const;

 private:
  [[nodiscard]] const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// 64-bit FNV-1a, hex encoded.
[[nodiscard]] std::string fnv1a_hex(std::string_view data);

}  // namespace pesn
