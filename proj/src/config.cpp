#include "pesn/config.hpp"

#include <cstdio>

#include "pesn/errors.hpp"
#include "pesn/text.hpp"

namespace pesn {

Config Config::parse(std::string_view text) {
  Config cfg;
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    if (cfg.values_.count(std::string(key)) != 0) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
    cfg.values_[std::string(key)] = std::string(value);
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) { return parse(read_file(path)); }

const std::string* Config::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  return v ? *v : fallback;
}

double Config::get(const std::string& key, double fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  try {
    return parse_double(*v);
  } catch (const ConfigError&) {
    throw ConfigError("config key '" + key + "': not a number: '" + *v + "'");
  }
}

long long Config::get(const std::string& key, long long fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  try {
    return parse_int(*v);
  } catch (const ConfigError&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + *v + "'");
  }
}

int Config::get(const std::string& key, int fallback) const {
  return static_cast<int>(get(key, static_cast<long long>(fallback)));
}

std::size_t Config::get(const std::string& key, std::size_t fallback) const {
  const long long v = get(key, static_cast<long long>(fallback));
  if (v < 0) {
    throw ConfigError("config key '" + key + "' must be >= 0");
  }
  return static_cast<std::size_t>(v);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: '" + *v + "'");
  }
  return out;
}

bool Config::get(const std::string& key, bool fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + *v + "'");
}

namespace {

std::vector<std::string_view> list_items(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto part : split(s, ',')) {
    for (auto item : split_ws(part)) out.push_back(item);
  }
  return out;
}

}  // namespace

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (auto item : list_items(*v)) out.push_back(parse_double(item));
  if (out.empty()) {
    throw ConfigError("config key '" + key + "': empty list");
  }
  return out;
}

std::vector<std::size_t> Config::get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<std::size_t> out;
  for (auto item : list_items(*v)) {
    const long long n = parse_int(item);
    if (n < 0) {
      throw ConfigError("config key '" + key + "': negative entry");
    }
    out.push_back(static_cast<std::size_t>(n));
  }
  if (out.empty()) {
    throw ConfigError("config key '" + key + "': empty list");
  }
  return out;
}

void Config::check_all_used() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (used_.count(key) == 0) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) {
    throw ConfigError("unknown config keys: " + unknown);
  }
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
  return out;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pesn
