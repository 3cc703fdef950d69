#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace gtrans {

// Flat key=value configuration. Blank lines and lines starting with '#' are
// ignored; whitespace around keys and values is trimmed. Typed getters throw
// ConfigError on unparseable values.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::string_view text);
  static KeyValueConfig Load(const std::filesystem::path& path);

  bool Has(const std::string& key) const { return entries_.count(key) > 0; }
  void Set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  void SetReal(const std::string& key, double value);
  void SetInt(const std::string& key, std::int64_t value) { Set(key, std::to_string(value)); }
  void SetBool(const std::string& key, bool value) { Set(key, value ? "true" : "false"); }

  std::string GetString(const std::string& key, const std::string& fallback) const;
  std::string RequireString(const std::string& key) const;
  double GetReal(const std::string& key, double fallback) const;
  std::int64_t GetInt(const std::string& key, std::int64_t fallback) const;
  std::uint64_t GetSeed(const std::string& key, std::uint64_t fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;

  // Sorted key=value lines; parsing the result reproduces this object.
  std::string Serialize() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace gtrans
