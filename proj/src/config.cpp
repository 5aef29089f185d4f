#include "gpsfilt/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "gpsfilt/errors.hpp"

namespace gpsfilt {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  return from_stream(in);
}

KeyValueConfig KeyValueConfig::from_stream(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected 'key = value'", line_no);
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) throw ParseError("config: empty key", line_no);
    cfg.entries_[key] = trim(stripped.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  std::istringstream in(text);
  return from_stream(in);
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::optional<std::string> KeyValueConfig::raw(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto value = raw(key);
  if (!value) return fallback;
  double parsed = 0.0;
  const char* first = value->data();
  const char* last = value->data() + value->size();
  auto [ptr, ec] = std::from_chars(first, last, parsed);
  if (ec != std::errc() || ptr != last)
    throw ParseError("config: '" + key + "' is not a number: '" + *value + "'");
  return parsed;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  const auto value = raw(key);
  if (!value) return fallback;
  long long parsed = 0;
  const char* first = value->data();
  const char* last = value->data() + value->size();
  auto [ptr, ec] = std::from_chars(first, last, parsed);
  if (ec != std::errc() || ptr != last)
    throw ParseError("config: '" + key + "' is not an integer: '" + *value + "'");
  return parsed;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto value = raw(key);
  if (!value) return fallback;
  const std::string v = lowercase(*value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParseError("config: '" + key + "' is not a boolean: '" + *value + "'");
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

}  // namespace gpsfilt
