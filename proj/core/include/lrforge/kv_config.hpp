#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lrforge {

// Flat `key = value` text files, optionally split into `[section]` blocks.
// Full-line comments start with '#'. Values are trimmed; `\n` and `\t`
// escapes are expanded by KvSection::get_text only.

struct KvEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

struct Diagnostic {
  int line = 0;  // 0 when the problem is not tied to a line
  std::string message;
};

struct KvFile {
  std::vector<KvEntry> entries;
  std::vector<Diagnostic> syntax_errors;
  std::vector<std::string> sections;  // in order of appearance
};

KvFile parse_kv(std::string_view text);
KvFile read_kv_file(const std::string& path);  // throws Errc::io

enum class KvType { string, integer, number, boolean, list };

struct KvKey {
  std::string name;
  KvType type = KvType::string;
  bool required = false;
};

// Allowed keys per section. The empty section name covers sectionless files.
struct KvSchema {
  std::map<std::string, std::vector<KvKey>> sections;
};

// Reports unknown sections and keys, duplicates, missing required keys and
// values that do not parse as their declared type. Empty iff valid.
std::vector<Diagnostic> validate(const KvFile& file, const KvSchema& schema);

std::string format_diagnostics(const std::vector<Diagnostic>& diags, std::string_view origin);

std::optional<double> parse_number(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);
std::optional<bool> parse_bool(std::string_view text);
std::vector<std::string> split_list(std::string_view text);

// Typed read access to one section of a validated file.
class KvSection {
 public:
  KvSection() = default;
  KvSection(const KvFile& file, std::string_view section);

  bool has(std::string_view key) const;
  std::string get_string(std::string_view key, std::string fallback = {}) const;
  std::string get_text(std::string_view key, std::string fallback = {}) const;
  double get_number(std::string_view key, double fallback) const;
  long long get_integer(std::string_view key, long long fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<std::string> get_list(std::string_view key) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace lrforge
