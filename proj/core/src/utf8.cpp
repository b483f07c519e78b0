#include "lrforge/utf8.hpp"

namespace lrforge::utf8 {

bool next(std::string_view s, std::size_t& pos, char32_t& cp) noexcept {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    cp = b0;
    ++pos;
    return true;
  }
  std::size_t len = 0;
  char32_t value = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2; value = b0 & 0x1F; min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3; value = b0 & 0x0F; min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4; value = b0 & 0x07; min = 0x10000;
  } else {
    cp = b0;
    ++pos;
    return false;
  }
  if (pos + len > s.size()) {
    cp = b0;
    ++pos;
    return false;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + k]);
    if ((b & 0xC0) != 0x80) {
      cp = b0;
      ++pos;
      return false;
    }
    value = (value << 6) | (b & 0x3F);
  }
  if (value < min || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
    cp = b0;
    ++pos;
    return false;
  }
  cp = value;
  pos += len;
  return true;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_valid(std::string_view s) noexcept {
  std::size_t pos = 0;
  char32_t cp = 0;
  while (pos < s.size()) {
    if (!next(s, pos, cp)) return false;
  }
  return true;
}

std::string sanitize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  char32_t cp = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    if (next(s, pos, cp)) {
      out.append(s.substr(start, pos - start));
    } else {
      append(out, replacement_char);
    }
  }
  return out;
}

std::size_t count_codepoints(std::string_view s) noexcept {
  std::size_t n = 0;
  std::size_t pos = 0;
  char32_t cp = 0;
  while (pos < s.size()) {
    next(s, pos, cp);
    ++n;
  }
  return n;
}

std::u32string to_u32(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  char32_t cp = 0;
  while (pos < s.size()) {
    if (!next(s, pos, cp)) cp = replacement_char;
    out.push_back(cp);
  }
  return out;
}

std::string from_u32(std::u32string_view s) {
  std::string out;
  out.reserve(s.size() * 2);
  for (char32_t cp : s) append(out, cp);
  return out;
}

}  // namespace lrforge::utf8
