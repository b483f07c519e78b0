#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lrforge::normalize {

struct RawDocument {
  std::string text;
  std::string source;
  std::string category;
};

enum class NoisePattern { url, email, phone, stray_latin_digits, latin_script, stray_symbols };

std::string_view noise_pattern_name(NoisePattern p) noexcept;
std::optional<NoisePattern> parse_noise_pattern(std::string_view name) noexcept;

using CharMap = std::unordered_map<char32_t, std::u32string>;
// Ordered phrase table; order only matters for equal-length keys.
using WordSpaceMap = std::vector<std::pair<std::u32string, std::u32string>>;
using DigitMap = std::array<char32_t, 10>;

CharMap default_char_map();
WordSpaceMap default_word_space_map();
DigitMap default_digit_map() noexcept;

struct CleanConfig {
  bool remove_english = false;
  std::vector<NoisePattern> noise_patterns{NoisePattern::url,
                                           NoisePattern::email,
                                           NoisePattern::phone,
                                           NoisePattern::stray_latin_digits,
                                           NoisePattern::latin_script,
                                           NoisePattern::stray_symbols};
  CharMap char_map = default_char_map();
  WordSpaceMap word_space_map = default_word_space_map();
  DigitMap digit_map = default_digit_map();
  // Also fold Arabic-Indic digits U+0660..U+0669 onto U+06F0..U+06F9.
  bool map_arabic_indic_digits = true;
};

// Throws Errc::config if the digit map is not a bijection or a word-space
// key is empty.
void validate(const CleanConfig& config);

struct CleanReport {
  std::size_t urls = 0;
  std::size_t emails = 0;
  std::size_t phones = 0;
  std::size_t stray_digits = 0;
  std::size_t latin_chars = 0;
  std::size_t symbols = 0;
  std::size_t digits_converted = 0;
  std::size_t chars_mapped = 0;
  std::size_t spacings_fixed = 0;
  std::size_t invisibles_removed = 0;
  std::size_t whitespace_collapsed = 0;
  std::size_t question_marks_collapsed = 0;
  std::size_t empty_parens_removed = 0;
  std::size_t input_codepoints = 0;
  std::size_t output_codepoints = 0;
  std::size_t documents_in = 0;
  std::size_t documents_emptied = 0;

  // Sum of all per-rule counters (excludes the size and document fields).
  std::size_t rule_total() const noexcept;
  CleanReport& operator+=(const CleanReport& other) noexcept;
};

std::string report_to_json(const CleanReport& report);

// Individual cascade stages. Each accepts and returns UTF-8.
std::string remove_noise(std::string_view text, const CleanConfig& config,
                         CleanReport* report = nullptr);
std::string convert_digits(std::string_view text, const CleanConfig& config = {},
                           CleanReport* report = nullptr);
std::string normalize_characters(std::string_view text, const CharMap& char_map,
                                 CleanReport* report = nullptr);
std::string fix_word_spacing(std::string_view text, const WordSpaceMap& word_space_map,
                             CleanReport* report = nullptr);
std::string cleanup_unicode(std::string_view text, CleanReport* report = nullptr);

struct CleanOutcome {
  // Empty when cleaning removed every codepoint (EmptyAfterClean).
  std::optional<RawDocument> document;
  CleanReport report;

  bool empty_after_clean() const noexcept { return !document.has_value(); }
};

// remove_noise -> convert_digits -> normalize_characters -> fix_word_spacing
// -> cleanup_unicode, repeated until the text stops changing.
CleanOutcome clean_document(const RawDocument& doc, const CleanConfig& config);

std::string clean_text(std::string_view text, const CleanConfig& config,
                       CleanReport* report = nullptr);

// `from<TAB>to` per line, '#' comments. Throws Errc::io / Errc::config.
CharMap load_char_map(const std::string& path);
WordSpaceMap load_word_space_map(const std::string& path);

}  // namespace lrforge::normalize
