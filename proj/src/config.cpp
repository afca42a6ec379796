#include "limix/config.hpp"

#include <fstream>
#include <sstream>

#include "limix/errors.hpp"

namespace limix {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

IniDoc IniDoc::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str(), path);
}

IniDoc IniDoc::parse_text(const std::string& text, const std::string& origin) {
  IniDoc doc;
  doc.raw_ = text;
  doc.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty section name");
      doc.sections_[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected key=value, got '" + t + "'");
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": key=value before any [section]");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (doc.sections_[section].count(key))
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                        key + "' in [" + section + "]");
    doc.sections_[section][key] = {value, line_no};
  }
  return doc;
}

bool IniDoc::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

bool IniDoc::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

std::string IniDoc::get(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  if (it == sections_.end())
    throw ConfigError(origin_ + ": missing section [" + section + "]");
  const auto kit = it->second.find(key);
  if (kit == it->second.end())
    throw ConfigError(origin_ + ": missing key '" + key + "' in [" + section + "]");
  return kit->second.value;
}

std::string IniDoc::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double IniDoc::get_num(const std::string& section, const std::string& key,
                       double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                      "] is not a number: '" + v + "'");
  }
}

std::int64_t IniDoc::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  try {
    std::size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                      "] is not an integer: '" + v + "'");
  }
}

bool IniDoc::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                    "] is not a boolean: '" + v + "'");
}

void IniDoc::enforce_schema(
    const std::map<std::string, std::vector<std::string>>& schema) const {
  for (const auto& [section, keys] : sections_) {
    const auto it = schema.find(section);
    if (it == schema.end())
      throw ConfigError(origin_ + ": unknown section [" + section + "]");
    for (const auto& [key, entry] : keys) {
      bool ok = false;
      for (const auto& allowed : it->second)
        if (allowed == key) {
          ok = true;
          break;
        }
      if (!ok)
        throw ConfigError(origin_ + ":" + std::to_string(entry.line) +
                          ": unknown key '" + key + "' in [" + section + "]");
    }
  }
}

void IniDoc::require_sections(const std::vector<std::string>& sections) const {
  for (const auto& s : sections)
    if (!has_section(s))
      throw ConfigError(origin_ + ": missing required section [" + s + "]");
}

std::uint64_t IniDoc::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : raw_) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace limix
