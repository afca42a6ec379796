#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace limix {

// Flat INI-style document: [section] headers and key=value lines, '#'
// comments. Unknown sections/keys are rejected at validation time with the
// offending line number.
class IniDoc {
 public:
  static IniDoc parse_file(const std::string& path);
  static IniDoc parse_text(const std::string& text, const std::string& origin);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_num(const std::string& section, const std::string& key,
                 double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;

  // Throws ConfigError naming the first key outside the allowed schema.
  void enforce_schema(
      const std::map<std::string, std::vector<std::string>>& schema) const;
  void require_sections(const std::vector<std::string>& sections) const;

  const std::string& raw_text() const { return raw_; }
  std::uint64_t content_hash() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::string raw_;
  std::string origin_;
};

}  // namespace limix
