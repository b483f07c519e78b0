#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace lrforge::utf8 {

inline constexpr char32_t replacement_char = 0xFFFD;

// Decodes one codepoint starting at `pos` and advances `pos`. Returns false on
// an invalid or truncated sequence; in that case exactly one byte is consumed
// and `cp` is set to the raw byte value.
bool next(std::string_view s, std::size_t& pos, char32_t& cp) noexcept;

void append(std::string& out, char32_t cp);

bool is_valid(std::string_view s) noexcept;

// Copies `s`, replacing every invalid sequence with U+FFFD.
std::string sanitize(std::string_view s);

std::size_t count_codepoints(std::string_view s) noexcept;

std::u32string to_u32(std::string_view s);
std::string from_u32(std::u32string_view s);

// Unicode White_Space property.
constexpr bool is_space(char32_t cp) noexcept {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

}  // namespace lrforge::utf8
