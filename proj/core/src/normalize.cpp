#include "lrforge/normalize.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lrforge/error.hpp"
#include "lrforge/utf8.hpp"

namespace lrforge::normalize {

namespace {

constexpr char32_t kUrduQuestion = 0x061F;

constexpr bool is_latin_letter(char32_t c) noexcept {
  return (c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z');
}

constexpr bool is_ascii_digit(char32_t c) noexcept { return c >= U'0' && c <= U'9'; }

constexpr char32_t ascii_lower(char32_t c) noexcept {
  return (c >= U'A' && c <= U'Z') ? c + 32 : c;
}

bool is_email_local(char32_t c) noexcept {
  return is_latin_letter(c) || is_ascii_digit(c) || c == U'.' || c == U'_' || c == U'%' ||
         c == U'+' || c == U'-';
}

bool is_email_domain(char32_t c) noexcept {
  return is_latin_letter(c) || is_ascii_digit(c) || c == U'.' || c == U'-';
}

bool is_invisible(char32_t c) noexcept {
  return c == 0x200B || c == 0xFEFF || c == 0x200E || c == 0x200F ||
         (c >= 0x202A && c <= 0x202E) || (c >= 0x2060 && c <= 0x2064);
}

bool is_stray_symbol(char32_t c) noexcept {
  switch (c) {
    case U'#': case U'$': case U'%': case U'^': case U'&': case U'*': case U'_':
    case U'=': case U'|': case U'~': case U'`': case U'<': case U'>': case U'{':
    case U'}': case U'[': case U']': case U'\\': case U'@': case U'+':
      return true;
    default:
      break;
  }
  if (c < 0x20) return c != U'\t' && c != U'\n' && c != U'\r';
  if (c >= 0x7F && c <= 0x9F) return c != 0x85;
  return (c >= 0x2190 && c <= 0x21FF) ||    // arrows
         (c >= 0x2500 && c <= 0x27BF) ||    // box drawing .. dingbats
         (c >= 0xE000 && c <= 0xF8FF) ||    // private use
         c == 0xFE0E || c == 0xFE0F || c == 0xFFFD ||
         (c >= 0x1F000 && c <= 0x1FAFF);    // emoji and pictographs
}

bool starts_with_ci(const std::u32string& t, std::size_t pos, std::u32string_view prefix) {
  if (pos + prefix.size() > t.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (ascii_lower(t[pos + k]) != prefix[k]) return false;
  }
  return true;
}

// Each scanner removes every match of its pattern in one left-to-right pass
// and returns the number of matches removed.

std::size_t strip_urls(std::u32string& t) {
  std::u32string out;
  out.reserve(t.size());
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < t.size()) {
    if (starts_with_ci(t, i, U"http://") || starts_with_ci(t, i, U"https://") ||
        starts_with_ci(t, i, U"www.")) {
      while (i < t.size() && !utf8::is_space(t[i])) ++i;
      ++count;
      continue;
    }
    out.push_back(t[i++]);
  }
  t.swap(out);
  return count;
}

std::size_t strip_emails(std::u32string& t) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < t.size()) {
    if (t[i] != U'@') {
      ++i;
      continue;
    }
    std::size_t left = i;
    while (left > 0 && is_email_local(t[left - 1])) --left;
    std::size_t right = i + 1;
    while (right < t.size() && is_email_domain(t[right])) ++right;
    while (right > i + 1 && (t[right - 1] == U'.' || t[right - 1] == U'-')) --right;
    const std::u32string_view domain(t.data() + i + 1, right - i - 1);
    const std::size_t dot = domain.rfind(U'.');
    const bool ok = left < i && !domain.empty() && domain.front() != U'.' &&
                    dot != std::u32string_view::npos && dot + 1 < domain.size() && dot > 0;
    if (!ok) {
      ++i;
      continue;
    }
    t.erase(left, right - left);
    i = left;
    ++count;
  }
  return count;
}

std::size_t strip_phones(std::u32string& t, std::size_t min_digits = 7) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < t.size()) {
    const bool at_start = i == 0 || !is_ascii_digit(t[i - 1]);
    std::size_t j = i;
    if (at_start && t[j] == U'+' && j + 1 < t.size() && is_ascii_digit(t[j + 1])) ++j;
    if (!at_start || !is_ascii_digit(t[j])) {
      ++i;
      continue;
    }
    std::size_t digits = 0;
    std::size_t last = j;
    while (j < t.size()) {
      if (is_ascii_digit(t[j])) {
        ++digits;
        last = j++;
      } else if ((t[j] == U'-' || t[j] == U' ') && j + 1 < t.size() && is_ascii_digit(t[j + 1])) {
        ++j;
      } else {
        break;
      }
    }
    if (digits >= min_digits) {
      t.erase(i, last + 1 - i);
      ++count;
    } else {
      i = last + 1;
    }
  }
  return count;
}

std::size_t strip_latin_adjacent_digits(std::u32string& t) {
  std::u32string out;
  out.reserve(t.size());
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < t.size()) {
    if (!is_ascii_digit(t[i])) {
      out.push_back(t[i++]);
      continue;
    }
    std::size_t end = i;
    while (end < t.size() && is_ascii_digit(t[end])) ++end;
    const bool glued = (i > 0 && is_latin_letter(t[i - 1])) ||
                       (end < t.size() && is_latin_letter(t[end]));
    if (glued) {
      count += end - i;
    } else {
      out.append(t, i, end - i);
    }
    i = end;
  }
  t.swap(out);
  return count;
}

template <typename Pred>
std::size_t strip_if(std::u32string& t, Pred pred) {
  const auto it = std::remove_if(t.begin(), t.end(), pred);
  const auto n = static_cast<std::size_t>(t.end() - it);
  t.erase(it, t.end());
  return n;
}

void remove_noise_u32(std::u32string& t, const CleanConfig& config, CleanReport& r) {
  // Removing one match can splice together text that matches another
  // pattern, so the enabled passes repeat until nothing changes.
  while (true) {
    const std::u32string before = t;
    for (NoisePattern p : config.noise_patterns) {
      switch (p) {
        case NoisePattern::url: r.urls += strip_urls(t); break;
        case NoisePattern::email: r.emails += strip_emails(t); break;
        case NoisePattern::phone: r.phones += strip_phones(t); break;
        case NoisePattern::stray_latin_digits:
          if (config.remove_english) r.stray_digits += strip_latin_adjacent_digits(t);
          break;
        case NoisePattern::latin_script:
          if (config.remove_english) r.latin_chars += strip_if(t, is_latin_letter);
          break;
        case NoisePattern::stray_symbols: r.symbols += strip_if(t, is_stray_symbol); break;
      }
    }
    if (t == before) return;
  }
}

void convert_digits_u32(std::u32string& t, const CleanConfig& config, CleanReport& r) {
  for (char32_t& c : t) {
    if (is_ascii_digit(c)) {
      c = config.digit_map[c - U'0'];
      ++r.digits_converted;
    } else if (config.map_arabic_indic_digits && c >= 0x0660 && c <= 0x0669) {
      c = 0x06F0 + (c - 0x0660);
      ++r.digits_converted;
    }
  }
}

void normalize_characters_u32(std::u32string& t, const CharMap& map, CleanReport& r) {
  if (map.empty()) return;
  std::u32string out;
  out.reserve(t.size());
  for (char32_t c : t) {
    const auto it = map.find(c);
    if (it == map.end()) {
      out.push_back(c);
    } else {
      out += it->second;
      ++r.chars_mapped;
    }
  }
  t.swap(out);
}

void fix_word_spacing_u32(std::u32string& t, const WordSpaceMap& map, CleanReport& r) {
  if (map.empty() || t.empty()) return;
  std::vector<std::size_t> order(map.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return map[a].first.size() > map[b].first.size();
  });

  struct Match {
    std::size_t pos;
    std::size_t len;
    std::size_t entry;
  };
  std::vector<Match> matches;
  std::vector<bool> taken(t.size(), false);
  for (std::size_t idx : order) {
    const std::u32string& key = map[idx].first;
    if (key.empty()) continue;
    std::size_t pos = t.find(key);
    while (pos != std::u32string::npos) {
      const bool free =
          std::none_of(taken.begin() + static_cast<std::ptrdiff_t>(pos),
                       taken.begin() + static_cast<std::ptrdiff_t>(pos + key.size()),
                       [](bool b) { return b; });
      if (free) {
        std::fill(taken.begin() + static_cast<std::ptrdiff_t>(pos),
                  taken.begin() + static_cast<std::ptrdiff_t>(pos + key.size()), true);
        matches.push_back({pos, key.size(), idx});
        pos = t.find(key, pos + key.size());
      } else {
        pos = t.find(key, pos + 1);
      }
    }
  }
  if (matches.empty()) return;
  std::sort(matches.begin(), matches.end(),
            [](const Match& a, const Match& b) { return a.pos < b.pos; });
  std::u32string out;
  out.reserve(t.size() + matches.size());
  std::size_t cursor = 0;
  for (const auto& m : matches) {
    out.append(t, cursor, m.pos - cursor);
    out += map[m.entry].second;
    cursor = m.pos + m.len;
  }
  out.append(t, cursor, std::u32string::npos);
  r.spacings_fixed += matches.size();
  t.swap(out);
}

std::size_t remove_empty_parens(std::u32string& t) {
  std::size_t count = 0;
  std::u32string out;
  out.reserve(t.size());
  for (char32_t c : t) {
    out.push_back(c);
    const std::size_t n = out.size();
    if (c != U')') continue;
    if (n >= 2 && out[n - 2] == U'(') {
      out.resize(n - 2);
      ++count;
    } else if (n >= 3 && out[n - 2] == U' ' && out[n - 3] == U'(') {
      out.resize(n - 3);
      ++count;
    }
  }
  t.swap(out);
  return count;
}

void cleanup_unicode_u32(std::u32string& t, CleanReport& r) {
  while (true) {
    const std::u32string before = t;
    r.invisibles_removed += strip_if(t, is_invisible);

    std::u32string out;
    out.reserve(t.size());
    for (std::size_t i = 0; i < t.size();) {
      if (!utf8::is_space(t[i])) {
        out.push_back(t[i++]);
        continue;
      }
      std::size_t end = i;
      while (end < t.size() && utf8::is_space(t[end])) ++end;
      if (end - i != 1 || t[i] != U' ') ++r.whitespace_collapsed;
      out.push_back(U' ');
      i = end;
    }
    t.swap(out);

    r.empty_parens_removed += remove_empty_parens(t);

    out.clear();
    for (char32_t c : t) {
      if (c == kUrduQuestion && !out.empty() && out.back() == kUrduQuestion) {
        ++r.question_marks_collapsed;
        continue;
      }
      out.push_back(c);
    }
    t.swap(out);

    if (t == before) break;
  }
  const std::size_t first = t.find_first_not_of(U' ');
  if (first == std::u32string::npos) {
    t.clear();
    return;
  }
  const std::size_t last = t.find_last_not_of(U' ');
  t = t.substr(first, last - first + 1);
}

void cascade_u32(std::u32string& t, const CleanConfig& config, CleanReport& r) {
  remove_noise_u32(t, config, r);
  convert_digits_u32(t, config, r);
  normalize_characters_u32(t, config.char_map, r);
  fix_word_spacing_u32(t, config.word_space_map, r);
  cleanup_unicode_u32(t, r);
}

template <typename Fn>
std::string apply_u32(std::string_view text, CleanReport* report, Fn fn) {
  CleanReport local;
  std::u32string t = utf8::to_u32(text);
  fn(t, local);
  if (report) *report += local;
  return utf8::from_u32(t);
}

std::vector<std::pair<std::u32string, std::u32string>> read_tab_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::vector<std::pair<std::u32string, std::u32string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(Errc::config, path + ":" + std::to_string(line_no) + ": expected from<TAB>to");
    }
    if (!utf8::is_valid(line)) {
      throw Error(Errc::config, path + ":" + std::to_string(line_no) + ": invalid UTF-8");
    }
    entries.emplace_back(utf8::to_u32(std::string_view(line).substr(0, tab)),
                         utf8::to_u32(std::string_view(line).substr(tab + 1)));
  }
  return entries;
}

}  // namespace

std::string_view noise_pattern_name(NoisePattern p) noexcept {
  switch (p) {
    case NoisePattern::url: return "url";
    case NoisePattern::email: return "email";
    case NoisePattern::phone: return "phone";
    case NoisePattern::stray_latin_digits: return "stray-latin-digits";
    case NoisePattern::latin_script: return "latin-script";
    case NoisePattern::stray_symbols: return "stray-symbols";
  }
  return "";
}

std::optional<NoisePattern> parse_noise_pattern(std::string_view name) noexcept {
  for (auto p : {NoisePattern::url, NoisePattern::email, NoisePattern::phone,
                 NoisePattern::stray_latin_digits, NoisePattern::latin_script,
                 NoisePattern::stray_symbols}) {
    if (noise_pattern_name(p) == name) return p;
  }
  return std::nullopt;
}

CharMap default_char_map() {
  CharMap m;
  const auto put = [&m](std::initializer_list<char32_t> from, std::u32string to) {
    for (char32_t c : from) m[c] = to;
  };
  // Arabic letters commonly typed in place of their Urdu counterparts.
  put({0x0643}, U"ک");                          // kaf -> keheh
  put({0x064A, 0x0649}, U"ی");                  // yeh, alef maksura -> farsi yeh
  put({0x0647, 0x06D5}, U"ہ");                  // heh, ae -> heh goal
  put({0x0629}, U"ۃ");                          // teh marbuta -> teh marbuta goal
  put({0x06C0}, U"ۂ");                          // heh with yeh above -> heh goal with hamza
  // Presentation forms left behind by PDF and OCR extraction.
  put({0xFB8E, 0xFB8F, 0xFB90, 0xFB91}, U"ک");  // keheh
  put({0xFED9, 0xFEDA, 0xFEDB, 0xFEDC}, U"ک");  // kaf
  put({0xFBFC, 0xFBFD, 0xFBFE, 0xFBFF}, U"ی");  // farsi yeh
  put({0xFEEF, 0xFEF0}, U"ی");                  // alef maksura
  put({0xFEF1, 0xFEF2, 0xFEF3, 0xFEF4}, U"ی");  // yeh
  put({0xFBA6, 0xFBA7, 0xFBA8, 0xFBA9}, U"ہ");  // heh goal
  put({0xFEE9, 0xFEEA, 0xFEEB, 0xFEEC}, U"ہ");  // heh
  put({0xFBAA, 0xFBAB, 0xFBAC, 0xFBAD}, U"ھ");  // heh doachashmee
  put({0xFBAE, 0xFBAF}, U"ے");                  // yeh barree
  put({0xFE8D, 0xFE8E}, U"ا");                  // alef
  put({0xFE8F, 0xFE90, 0xFE91, 0xFE92}, U"ب");  // beh
  put({0xFB56, 0xFB57, 0xFB58, 0xFB59}, U"پ");  // peh
  put({0xFEFB, 0xFEFC}, U"لا");            // lam-alef ligature
  return m;
}

WordSpaceMap default_word_space_map() {
  return {
      {U"کےلیے", U"کے لیے"},   {U"کیلئے", U"کے لئے"},   {U"کےلئے", U"کے لئے"},
      {U"ہوگیا", U"ہو گیا"},   {U"ہوگئی", U"ہو گئی"},   {U"ہوگئے", U"ہو گئے"},
      {U"کرلیا", U"کر لیا"},   {U"جاسکتا", U"جا سکتا"}, {U"جاسکتی", U"جا سکتی"},
      {U"جاسکتے", U"جا سکتے"}, {U"کیاگیا", U"کیا گیا"}, {U"دیاگیا", U"دیا گیا"},
      {U"کےساتھ", U"کے ساتھ"}, {U"کےبعد", U"کے بعد"},   {U"کےبارے", U"کے بارے"},
      {U"اسکے", U"اس کے"},     {U"اسکی", U"اس کی"},     {U"انکے", U"ان کے"},
      {U"انکی", U"ان کی"},     {U"جسکے", U"جس کے"},
  };
}

DigitMap default_digit_map() noexcept {
  DigitMap m{};
  for (int d = 0; d < 10; ++d) m[d] = 0x06F0 + d;
  return m;
}

void validate(const CleanConfig& config) {
  std::set<char32_t> targets(config.digit_map.begin(), config.digit_map.end());
  if (targets.size() != 10) throw Error(Errc::config, "digit map is not a bijection");
  std::set<std::u32string> keys;
  for (const auto& [k, v] : config.word_space_map) {
    if (k.empty()) throw Error(Errc::config, "empty word-space key");
    if (!keys.insert(k).second) throw Error(Errc::config, "duplicate word-space key");
  }
}

std::size_t CleanReport::rule_total() const noexcept {
  return urls + emails + phones + stray_digits + latin_chars + symbols + digits_converted +
         chars_mapped + spacings_fixed + invisibles_removed + whitespace_collapsed +
         question_marks_collapsed + empty_parens_removed;
}

CleanReport& CleanReport::operator+=(const CleanReport& o) noexcept {
  urls += o.urls;
  emails += o.emails;
  phones += o.phones;
  stray_digits += o.stray_digits;
  latin_chars += o.latin_chars;
  symbols += o.symbols;
  digits_converted += o.digits_converted;
  chars_mapped += o.chars_mapped;
  spacings_fixed += o.spacings_fixed;
  invisibles_removed += o.invisibles_removed;
  whitespace_collapsed += o.whitespace_collapsed;
  question_marks_collapsed += o.question_marks_collapsed;
  empty_parens_removed += o.empty_parens_removed;
  input_codepoints += o.input_codepoints;
  output_codepoints += o.output_codepoints;
  documents_in += o.documents_in;
  documents_emptied += o.documents_emptied;
  return *this;
}

std::string report_to_json(const CleanReport& r) {
  nlohmann::ordered_json j;
  j["documents_in"] = r.documents_in;
  j["documents_emptied"] = r.documents_emptied;
  j["input_codepoints"] = r.input_codepoints;
  j["output_codepoints"] = r.output_codepoints;
  j["rules"] = {
      {"url", r.urls},
      {"email", r.emails},
      {"phone", r.phones},
      {"stray_latin_digits", r.stray_digits},
      {"latin_script", r.latin_chars},
      {"stray_symbols", r.symbols},
      {"digits_converted", r.digits_converted},
      {"chars_mapped", r.chars_mapped},
      {"word_spacing", r.spacings_fixed},
      {"invisibles_removed", r.invisibles_removed},
      {"whitespace_collapsed", r.whitespace_collapsed},
      {"question_marks_collapsed", r.question_marks_collapsed},
      {"empty_parens_removed", r.empty_parens_removed},
  };
  return j.dump(2) + "\n";
}

std::string remove_noise(std::string_view text, const CleanConfig& config, CleanReport* report) {
  return apply_u32(text, report,
                   [&](std::u32string& t, CleanReport& r) { remove_noise_u32(t, config, r); });
}

std::string convert_digits(std::string_view text, const CleanConfig& config, CleanReport* report) {
  return apply_u32(text, report,
                   [&](std::u32string& t, CleanReport& r) { convert_digits_u32(t, config, r); });
}

std::string normalize_characters(std::string_view text, const CharMap& char_map,
                                 CleanReport* report) {
  return apply_u32(text, report, [&](std::u32string& t, CleanReport& r) {
    normalize_characters_u32(t, char_map, r);
  });
}

std::string fix_word_spacing(std::string_view text, const WordSpaceMap& word_space_map,
                             CleanReport* report) {
  return apply_u32(text, report, [&](std::u32string& t, CleanReport& r) {
    fix_word_spacing_u32(t, word_space_map, r);
  });
}

std::string cleanup_unicode(std::string_view text, CleanReport* report) {
  return apply_u32(text, report,
                   [](std::u32string& t, CleanReport& r) { cleanup_unicode_u32(t, r); });
}

std::string clean_text(std::string_view text, const CleanConfig& config, CleanReport* report) {
  CleanReport local;
  std::u32string t = utf8::to_u32(text);
  local.input_codepoints = t.size();
  // A stage can expose a match for an earlier one (e.g. dropping U+200B
  // inside "w<ZWSP>ww."), so the cascade runs to its fixed point.
  constexpr int kMaxPasses = 16;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    const std::u32string before = t;
    cascade_u32(t, config, local);
    if (t == before) break;
  }
  local.output_codepoints = t.size();
  if (report) *report += local;
  return utf8::from_u32(t);
}

CleanOutcome clean_document(const RawDocument& doc, const CleanConfig& config) {
  CleanOutcome outcome;
  outcome.report.documents_in = 1;
  std::string text = clean_text(doc.text, config, &outcome.report);
  if (text.empty()) {
    outcome.report.documents_emptied = 1;
    return outcome;
  }
  outcome.document = RawDocument{std::move(text), doc.source, doc.category};
  return outcome;
}

CharMap load_char_map(const std::string& path) {
  CharMap m;
  for (auto& [from, to] : read_tab_file(path)) {
    if (from.size() != 1) {
      throw Error(Errc::config, path + ": char map keys must be single codepoints");
    }
    if (!m.emplace(from[0], std::move(to)).second) {
      throw Error(Errc::config, path + ": duplicate char map key");
    }
  }
  return m;
}

WordSpaceMap load_word_space_map(const std::string& path) {
  WordSpaceMap m = read_tab_file(path);
  std::set<std::u32string> keys;
  for (const auto& [k, v] : m) {
    if (!keys.insert(k).second) throw Error(Errc::config, path + ": duplicate word-space key");
  }
  return m;
}

}  // namespace lrforge::normalize
