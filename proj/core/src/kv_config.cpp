#include "lrforge/kv_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lrforge/error.hpp"

namespace lrforge {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view type_name(KvType t) {
  switch (t) {
    case KvType::string: return "string";
    case KvType::integer: return "integer";
    case KvType::number: return "number";
    case KvType::boolean: return "boolean";
    case KvType::list: return "list";
  }
  return "value";
}

}  // namespace

KvFile parse_kv(std::string_view text) {
  KvFile file;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        file.syntax_errors.push_back({line_no, "malformed section header"});
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      file.sections.push_back(section);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      file.syntax_errors.push_back({line_no, "expected `key = value`"});
      continue;
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) {
      file.syntax_errors.push_back({line_no, "empty key"});
      continue;
    }
    file.entries.push_back(
        {section, std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return file;
}

KvFile read_kv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kv(ss.str());
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<long long> parse_integer(std::string_view text) {
  // Accepts e-notation ("171e6") as long as the value is integral.
  const auto v = parse_number(text);
  if (!v || std::floor(*v) != *v || std::fabs(*v) > 9.0e18) return std::nullopt;
  return static_cast<long long>(*v);
}

std::optional<bool> parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
  if (text == "false" || text == "no" || text == "off" || text == "0") return false;
  return std::nullopt;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view item =
        trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<Diagnostic> validate(const KvFile& file, const KvSchema& schema) {
  std::vector<Diagnostic> diags = file.syntax_errors;
  std::set<std::pair<std::string, std::string>> seen;
  std::set<std::string> unknown_sections;

  for (const auto& e : file.entries) {
    const auto sec = schema.sections.find(e.section);
    if (sec == schema.sections.end()) {
      if (unknown_sections.insert(e.section).second) {
        diags.push_back({e.line, e.section.empty() ? "entries outside a section"
                                                   : "unknown section [" + e.section + "]"});
      }
      continue;
    }
    const KvKey* spec = nullptr;
    for (const auto& k : sec->second) {
      if (k.name == e.key) spec = &k;
    }
    if (spec == nullptr) {
      diags.push_back({e.line, "unknown key `" + e.key + "`" +
                                   (e.section.empty() ? "" : " in [" + e.section + "]")});
      continue;
    }
    if (!seen.insert({e.section, e.key}).second) {
      diags.push_back({e.line, "duplicate key `" + e.key + "`"});
      continue;
    }
    bool ok = true;
    switch (spec->type) {
      case KvType::integer: ok = parse_integer(e.value).has_value(); break;
      case KvType::number: ok = parse_number(e.value).has_value(); break;
      case KvType::boolean: ok = parse_bool(e.value).has_value(); break;
      case KvType::string:
      case KvType::list: ok = true; break;
    }
    if (!ok) {
      diags.push_back({e.line, "key `" + e.key + "` expects " + std::string(type_name(spec->type)) +
                                   ", got `" + e.value + "`"});
    }
  }

  for (const auto& [section, keys] : schema.sections) {
    // Required keys are only enforced for sections that are present (or the
    // sectionless body, which always is).
    bool present = section.empty();
    for (const auto& s : file.sections) present = present || s == section;
    if (!present) continue;
    for (const auto& k : keys) {
      if (k.required && !seen.count({section, k.name})) {
        diags.push_back({0, "missing required key `" + k.name + "`" +
                                (section.empty() ? "" : " in [" + section + "]")});
      }
    }
  }
  return diags;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags, std::string_view origin) {
  std::string out;
  for (const auto& d : diags) {
    out += origin;
    if (d.line > 0) out += ":" + std::to_string(d.line);
    out += ": " + d.message + "\n";
  }
  return out;
}

KvSection::KvSection(const KvFile& file, std::string_view section) {
  for (const auto& e : file.entries) {
    if (e.section == section) values_[e.key] = e.value;
  }
}

bool KvSection::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::string KvSection::get_string(std::string_view key, std::string fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string KvSection::get_text(std::string_view key, std::string fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string out;
  const std::string& v = it->second;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == '\\' && i + 1 < v.size()) {
      const char n = v[i + 1];
      if (n == 'n') { out.push_back('\n'); ++i; continue; }
      if (n == 't') { out.push_back('\t'); ++i; continue; }
      if (n == '\\') { out.push_back('\\'); ++i; continue; }
    }
    out.push_back(v[i]);
  }
  return out;
}

double KvSection::get_number(std::string_view key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto v = parse_number(it->second);
  if (!v) throw Error(Errc::config, "key `" + std::string(key) + "` is not a number");
  return *v;
}

long long KvSection::get_integer(std::string_view key, long long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto v = parse_integer(it->second);
  if (!v) throw Error(Errc::config, "key `" + std::string(key) + "` is not an integer");
  return *v;
}

bool KvSection::get_bool(std::string_view key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto v = parse_bool(it->second);
  if (!v) throw Error(Errc::config, "key `" + std::string(key) + "` is not a boolean");
  return *v;
}

std::vector<std::string> KvSection::get_list(std::string_view key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? std::vector<std::string>{} : split_list(it->second);
}

}  // namespace lrforge
