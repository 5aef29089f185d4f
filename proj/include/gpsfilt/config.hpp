#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace gpsfilt {

/// Flat `key = value` configuration file. Lines starting with '#' and blank
/// lines are ignored; later duplicates override earlier ones. Typed getters
/// fall back to the supplied default when the key is absent and throw a
/// ParseError when the stored text does not parse as the requested type.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_stream(std::istream& in);
  static KeyValueConfig from_string(const std::string& text);

  bool has(const std::string& key) const;
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace gpsfilt
