#include "lrforge/pretokenize.hpp"

#include "lrforge/utf8.hpp"

namespace lrforge {

namespace {

struct Cursor {
  std::string_view text;

  // Decodes the codepoint at `pos`; invalid bytes come back as a value that
  // belongs to no Urdu class and is not whitespace.
  char32_t peek(std::size_t pos, std::size_t& next) const noexcept {
    next = pos;
    char32_t cp = 0;
    if (!utf8::next(text, next, cp)) return 0xFFFFFFFF;
    return cp;
  }
};

ChunkClass classify(char32_t cp) noexcept {
  if (is_urdu_letter(cp)) return ChunkClass::urdu_word;
  if (is_urdu_digit(cp)) return ChunkClass::urdu_digits;
  if (is_urdu_punct(cp)) return ChunkClass::urdu_punct;
  if (cp != 0xFFFFFFFF && utf8::is_space(cp)) return ChunkClass::whitespace;
  return ChunkClass::other;
}

}  // namespace

std::vector<Chunk> pretokenize(std::string_view text) {
  std::vector<Chunk> chunks;
  const Cursor cur{text};
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = 0;
    const char32_t cp = cur.peek(pos, next);
    ChunkClass cls = classify(cp);
    std::size_t end = next;

    // Runs through every following codepoint of class `want`.
    const auto extend = [&](ChunkClass want) {
      while (end < text.size()) {
        std::size_t after = 0;
        if (classify(cur.peek(end, after)) != want) break;
        end = after;
      }
    };

    if (cp == U' ' && end < text.size()) {
      std::size_t after = 0;
      if (classify(cur.peek(end, after)) == ChunkClass::urdu_word) {
        cls = ChunkClass::urdu_word;
        end = after;
      }
    }

    switch (cls) {
      case ChunkClass::urdu_word:
      case ChunkClass::urdu_digits:
      case ChunkClass::other:
        extend(cls);
        break;
      case ChunkClass::urdu_punct:
        break;
      case ChunkClass::whitespace: {
        std::size_t last_start = pos;
        while (end < text.size()) {
          std::size_t after = 0;
          if (classify(cur.peek(end, after)) != ChunkClass::whitespace) break;
          last_start = end;
          end = after;
        }
        // Leave a final plain space for the Urdu word that follows.
        if (last_start > pos && text[last_start] == ' ' && end < text.size()) {
          std::size_t after = 0;
          if (classify(cur.peek(end, after)) == ChunkClass::urdu_word) end = last_start;
        }
        break;
      }
    }
    chunks.push_back({text.substr(pos, end - pos), cls});
    pos = end;
  }
  return chunks;
}

}  // namespace lrforge
