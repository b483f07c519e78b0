#pragma once

#include <string_view>
#include <vector>

namespace lrforge {

// Chunk classes, tried in this order at every position:
//   urdu_word   optional U+0020 + run of U+0600..U+06FF letters (digits and
//               the four Urdu punctuation marks excluded)
//   urdu_digits run of U+06F0..U+06F9 / U+0660..U+0669
//   urdu_punct  one of U+06D4, U+060C, U+061F, U+061B
//   other       run of any other non-whitespace (invalid bytes included)
//   whitespace  run of whitespace; a trailing U+0020 is left for a
//               following Urdu word
enum class ChunkClass { urdu_word, urdu_digits, urdu_punct, other, whitespace };

struct Chunk {
  std::string_view text;
  ChunkClass cls;
};

constexpr bool is_urdu_digit(char32_t c) noexcept {
  return (c >= 0x06F0 && c <= 0x06F9) || (c >= 0x0660 && c <= 0x0669);
}

constexpr bool is_urdu_punct(char32_t c) noexcept {
  return c == 0x06D4 || c == 0x060C || c == 0x061F || c == 0x061B;
}

constexpr bool is_urdu_letter(char32_t c) noexcept {
  return c >= 0x0600 && c <= 0x06FF && !is_urdu_digit(c) && !is_urdu_punct(c);
}

// Concatenating the returned views reproduces `text` exactly.
std::vector<Chunk> pretokenize(std::string_view text);

}  // namespace lrforge
