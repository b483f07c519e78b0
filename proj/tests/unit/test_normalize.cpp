#include <doctest.h>

#include "lrforge/error.hpp"
#include "lrforge/normalize.hpp"
#include "lrforge/utf8.hpp"
#include "support.hpp"

using namespace lrforge;
using namespace lrforge::normalize;

namespace {

bool contains_cp(std::string_view s, char32_t target) {
  for (char32_t c : utf8::to_u32(s))
    if (c == target) return true;
  return false;
}

void check_forbidden_absent(const std::string& out, bool remove_english) {
  const auto u = utf8::to_u32(out);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const char32_t c = u[i];
    CHECK_FALSE((c >= U'0' && c <= U'9'));
    CHECK(c != 0x00A0);
    CHECK(c != 0x200B);
    if (remove_english) CHECK_FALSE(((c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z')));
    if (i + 1 < u.size()) {
      CHECK_FALSE((utf8::is_space(c) && utf8::is_space(u[i + 1])));
      CHECK_FALSE((c == 0x061F && u[i + 1] == 0x061F));
    }
  }
  CHECK(out.find("()") == std::string::npos);
  CHECK(out.find("( )") == std::string::npos);
  if (!out.empty()) {
    CHECK_FALSE(utf8::is_space(u.front()));
    CHECK_FALSE(utf8::is_space(u.back()));
  }
}

}  // namespace

TEST_CASE("remove_noise examples") {
  CleanConfig cfg;
  CHECK(cleanup_unicode(remove_noise("خبر پڑھیں http://example.com آج", cfg)) == "خبر پڑھیں آج");
  CHECK(remove_noise("", cfg) == "");
  cfg.remove_english = true;
  CHECK(remove_noise("abc اردو", cfg) == " اردو");
}

TEST_CASE("remove_noise patterns") {
  CleanConfig cfg;
  CleanReport r;
  const auto out = remove_noise("رابطہ info@example.org یا www.site.pk/page اور +92 300 1234567 پر", cfg, &r);
  CHECK(out.find('@') == std::string::npos);
  CHECK(out.find("www") == std::string::npos);
  CHECK(out.find("300") == std::string::npos);
  CHECK(r.emails == 1);
  CHECK(r.urls == 1);
  CHECK(r.phones == 1);
  // Short standalone numbers are kept for digit conversion.
  CHECK(remove_noise("سال 2024 میں", cfg) == "سال 2024 میں");
  // Without remove_english Latin words stay.
  CHECK(remove_noise("Pakistan پاکستان", cfg) == "Pakistan پاکستان");
}

TEST_CASE("convert_digits examples") {
  CHECK(convert_digits("2024") == "۲۰۲۴");
  CHECK(convert_digits("اردو") == "اردو");
  CHECK(convert_digits("5 کتابیں") == "۵ کتابیں");
  CHECK(convert_digits("٣٤") == "۳۴");
  CleanConfig off;
  off.map_arabic_indic_digits = false;
  CHECK(convert_digits("٣٤", off) == "٣٤");
}

TEST_CASE("normalize_characters examples") {
  const auto map = default_char_map();
  CHECK(normalize_characters("كتاب", map) == "کتاب");
  CHECK(normalize_characters("علي", map) == "علی");
  CHECK(normalize_characters("پاکستان", map) == "پاکستان");
  CHECK(map.size() >= 30);
  // Single pass: a produced codepoint is not mapped again.
  CharMap chain{{U'a', U"b"}, {U'b', U"c"}};
  CHECK(normalize_characters("ab", chain) == "bc");
}

TEST_CASE("fix_word_spacing examples") {
  const WordSpaceMap map{{U"K", U"A B"}};
  CHECK(fix_word_spacing("xKy", map) == "xA By");
  CHECK(fix_word_spacing("xyz", map) == "xyz");
  CHECK(fix_word_spacing("KxK", map) == "A BxA B");
  // Longest key wins over a shorter one starting at the same place.
  const WordSpaceMap overlap{{U"ab", U"a b"}, {U"abc", U"a b c"}};
  CHECK(fix_word_spacing("abcd", overlap) == "a b cd");
  CHECK(fix_word_spacing("وہ اسکے گھر گیا", default_word_space_map()) == "وہ اس کے گھر گیا");
}

TEST_CASE("cleanup_unicode examples") {
  CHECK(cleanup_unicode("سوال؟؟؟") == "سوال؟");
  CHECK(cleanup_unicode("الف​ب") == "الفب");
  CHECK(cleanup_unicode("متن ( ) ختم") == "متن ختم");
  CHECK(cleanup_unicode("متن () ختم") == "متن ختم");
  CHECK(cleanup_unicode("  a \t b  ") == "a b");
}

TEST_CASE("clean_document examples") {
  CleanConfig cfg;
  const auto url_only = clean_document({"https://example.com/x", "web", "news"}, cfg);
  CHECK(url_only.empty_after_clean());

  const RawDocument clean{"یہ ایک صاف جملہ ہے۔", "web", "news"};
  const auto same = clean_document(clean, cfg);
  REQUIRE(same.document);
  CHECK(same.document->text == clean.text);
  CHECK(same.report.rule_total() == 0);

  const auto traced = clean_document({"كتاب 2 پڑھیں!!", "s", "c"}, cfg);
  REQUIRE(traced.document);
  CHECK(traced.document->text == "کتاب ۲ پڑھیں!!");
  CHECK(traced.document->source == "s");
  CHECK(traced.document->category == "c");
  CHECK(traced.report.chars_mapped == 1);
  CHECK(traced.report.digits_converted == 1);
}

TEST_CASE("config validation") {
  CleanConfig cfg;
  cfg.digit_map[3] = cfg.digit_map[4];
  CHECK_THROWS_AS(validate(cfg), Error);
  CleanConfig dup;
  dup.word_space_map.push_back(dup.word_space_map.front());
  CHECK_THROWS_AS(validate(dup), Error);
  CHECK(parse_noise_pattern("stray-latin-digits") == NoisePattern::stray_latin_digits);
  CHECK_FALSE(parse_noise_pattern("nope").has_value());
}

TEST_CASE("property: idempotence and forbidden content") {
  testsupport::Rng rng(0xC1EA);
  CleanConfig plain;
  CleanConfig english;
  english.remove_english = true;
  for (int i = 0; i < 1500; ++i) {
    const std::string text = (i % 3 == 0) ? testsupport::random_mixed_utf8(rng, 60)
                                          : testsupport::random_noisy_text(rng);
    for (const CleanConfig* cfg : {&plain, &english}) {
      const auto once = clean_text(text, *cfg);
      const auto twice = clean_text(once, *cfg);
      CHECK(once == twice);
      CHECK(utf8::is_valid(once));
      check_forbidden_absent(once, cfg->remove_english);
      CHECK(clean_text(text, *cfg) == once);
    }
  }
}

TEST_CASE("property: convert_digits preserves codepoint count") {
  testsupport::Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    const auto s = testsupport::random_mixed_utf8(rng, 50);
    const auto out = convert_digits(s);
    CHECK(utf8::count_codepoints(out) == utf8::count_codepoints(s));
    for (char c = '0'; c <= '9'; ++c) CHECK(out.find(c) == std::string::npos);
  }
}

TEST_CASE("property: output shrinks with remove_english and no expanding maps") {
  testsupport::Rng rng(7);
  CleanConfig cfg;
  cfg.remove_english = true;
  cfg.word_space_map.clear();
  for (auto it = cfg.char_map.begin(); it != cfg.char_map.end();) {
    it = it->second.size() > 1 ? cfg.char_map.erase(it) : std::next(it);
  }
  for (int i = 0; i < 300; ++i) {
    CleanReport r;
    clean_text(testsupport::random_noisy_text(rng), cfg, &r);
    CHECK(r.output_codepoints <= r.input_codepoints);
  }
}

TEST_CASE("map files load and reject junk") {
  const auto dir = testsupport::temp_dir("normalize_maps");
  const auto good = dir + "/chars.tsv";
  {
    std::FILE* f = std::fopen(good.c_str(), "wb");
    std::fputs("# comment\nك\tک\n", f);
    std::fclose(f);
  }
  const auto map = load_char_map(good);
  CHECK(map.size() == 1);
  CHECK(map.at(0x0643) == U"ک");
  const auto bad = dir + "/bad.tsv";
  {
    std::FILE* f = std::fopen(bad.c_str(), "wb");
    std::fputs("no tab here\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_char_map(bad), Error);
  CHECK_THROWS_AS(load_word_space_map(dir + "/missing.tsv"), Error);
  CHECK(contains_cp("ک", 0x06A9));
}
