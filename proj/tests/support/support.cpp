#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <map>

#include <unistd.h>

#include "lrforge/pretokenize.hpp"
#include "lrforge/corpus.hpp"
#include "lrforge/utf8.hpp"

namespace testsupport {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = 0;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

Zipf::Zipf(std::size_t n, double s) {
  cdf_.resize(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += 1.0 / std::pow(static_cast<double>(i + 1), s);
    cdf_[i] = total;
  }
  for (auto& c : cdf_) c /= total;
}

std::size_t Zipf::draw(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

namespace {

const std::vector<std::string> kFunctionWords = {
    "کے", "میں", "کی", "ہے", "اور", "سے", "کا", "کو", "نے", "پر", "یہ", "ہیں", "کہ", "ایک",
    "بھی", "تھا", "وہ", "اس", "کر", "نہیں", "ہو", "تھی", "لیے", "ان", "گیا", "جو", "تھے", "گئی",
    "ساتھ", "بعد", "تک", "کیا", "رہا", "اپنے", "والے", "جس", "کچھ", "بہت", "اب", "یا", "تو",
    "ہم", "آپ", "گے", "دیا", "کرنے", "جا", "رہے", "ہوئے", "سکتا", "کسی", "جب", "پہلے", "صرف",
    "لیکن", "اگر", "کیونکہ", "مگر", "دوران", "طرف", "بارے", "علاوہ", "ذریعے"};

const std::vector<std::string> kContentWords = {
    "پاکستان", "حکومت", "عوام", "شہر", "ملک", "وزیر", "اعظم", "کتاب", "زبان", "اردو", "تعلیم",
    "صحت", "معیشت", "کھیل", "کرکٹ", "ٹیم", "خبر", "دنیا", "سال", "دن", "وقت", "لوگ", "بچے",
    "پانی", "بارش", "موسم", "علاقے", "سڑک", "عدالت", "فیصلہ", "اجلاس", "رپورٹ", "ادارے",
    "طلبہ", "اسکول", "یونیورسٹی", "لاہور", "کراچی", "اسلام", "آباد", "پنجاب", "سندھ", "صوبے",
    "قومی", "اسمبلی", "انتخابات", "سیاست", "جماعت", "رہنما", "بیان", "پولیس", "واقعہ", "ہسپتال",
    "مریض", "ڈاکٹر", "علاج", "بیماری", "کسان", "فصل", "گندم", "قیمت", "بازار", "روپے", "ڈالر",
    "بینک", "قرض", "منصوبہ", "ترقی", "بجلی", "گیس", "توانائی", "ٹیکنالوجی", "انٹرنیٹ", "موبائل",
    "فون", "کمپنی", "کاروبار", "مزدور", "تنخواہ", "گھر", "خاندان", "ماں", "باپ", "بھائی", "بہن",
    "دوست", "محبت", "زندگی", "موت", "خوشی", "غم", "دل", "آنکھ", "ہاتھ", "سر", "راستہ", "سفر",
    "ریل", "گاڑی", "جہاز", "دریا", "پہاڑ", "سمندر", "درخت", "پھول", "باغ", "کھانا", "روٹی",
    "چائے", "شاعر", "شاعری", "غزل", "نظم", "افسانہ", "ناول", "مصنف", "ادب", "تاریخ", "ثقافت",
    "مذہب", "نماز", "مسجد", "رمضان", "عید", "تہوار", "موسیقی", "فلم", "ڈرامہ", "اداکار",
    "میچ", "کھلاڑی", "کپتان", "جیت", "شکست", "اسکور", "وکٹ", "رنز", "سائنس", "تحقیق", "نتائج",
    "سوال", "جواب", "مسئلہ", "حل", "قانون", "آئین", "حقوق", "آزادی", "امن", "جنگ", "فوج",
    "سرحد", "ہمسایہ", "تعلقات", "معاہدہ", "ملاقات", "دورہ", "صدر", "وفاقی", "مقامی", "عالمی",
    "اہم", "بڑا", "چھوٹا", "نیا", "پرانا", "اچھا", "برا", "زیادہ", "کم", "مشکل", "آسان"};

const std::vector<std::string> kOnsets = {"ب", "پ", "ت", "ٹ", "ج", "چ", "د", "ڈ", "ر", "ز",
                                          "س", "ش", "ک", "گ", "ل", "م", "ن", "و", "ہ", "ف",
                                          "ق", "خ", "غ", "ح", "ص", "ع", "ط", "ظ", "ض", "ذ"};
const std::vector<std::string> kNuclei = {"ا", "ی", "و", "ے", "", "", "ی", "ا"};
const std::vector<std::string> kCodas = {"ن", "ر", "ل", "م", "ت", "ی", "ہ", "ں", "", "", "", "د"};

const std::vector<std::string> kCategories = {"news", "blogs", "books", "literature",
                                              "religion", "education", "sports"};
const std::vector<std::string> kSources = {"web", "ocr", "translation", "archive"};

const std::vector<std::string>& pseudo_words() {
  static const std::vector<std::string> words = [] {
    Rng rng(0xA11CE);
    std::vector<std::string> out;
    std::map<std::string, bool> seen;
    for (const auto& w : kFunctionWords) seen[w] = true;
    for (const auto& w : kContentWords) seen[w] = true;
    while (out.size() < 40000) {
      std::string w;
      const auto syllables = rng.between(2, 4);
      for (std::int64_t s = 0; s < syllables; ++s) {
        w += rng.pick(kOnsets);
        w += rng.pick(kNuclei);
        if (rng.chance(0.5)) w += rng.pick(kCodas);
      }
      if (!seen[w]) {
        seen[w] = true;
        out.push_back(w);
      }
    }
    return out;
  }();
  return words;
}

std::string urdu_number(Rng& rng) {
  std::string out;
  const auto digits = rng.between(1, 4);
  for (std::int64_t i = 0; i < digits; ++i) {
    lrforge::utf8::append(out, static_cast<char32_t>(0x06F0 + rng.below(10)));
  }
  return out;
}

struct WordSampler {
  Zipf function_zipf{kFunctionWords.size(), 1.0};
  Zipf content_zipf{kContentWords.size(), 1.0};
  Zipf pseudo_zipf{pseudo_words().size(), 1.05};

  std::string draw(Rng& rng) const {
    const double u = rng.uniform();
    if (u < 0.42) return kFunctionWords[function_zipf.draw(rng)];
    if (u < 0.72) return kContentWords[content_zipf.draw(rng)];
    return pseudo_words()[pseudo_zipf.draw(rng)];
  }
};

const WordSampler& sampler() {
  static const WordSampler s;
  return s;
}

std::string sentence(Rng& rng) {
  std::string out;
  const auto words = rng.between(5, 18);
  for (std::int64_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    if (rng.chance(0.03)) {
      out += urdu_number(rng);
    } else {
      out += sampler().draw(rng);
    }
    if (i + 1 < words && rng.chance(0.06)) out += "،";
  }
  const double end = rng.uniform();
  out += end < 0.85 ? "۔" : (end < 0.95 ? "؟" : "!");
  return out;
}

std::uint32_t random_codepoint(Rng& rng) {
  switch (rng.below(10)) {
    case 0:
    case 1:
    case 2: return static_cast<std::uint32_t>(0x0600 + rng.below(0x100));  // Arabic block
    case 3: return static_cast<std::uint32_t>(0x06F0 + rng.below(10));
    case 4: {
      static const char32_t punct[] = {0x06D4, 0x060C, 0x061F, 0x061B, 0x0660 + 3};
      return punct[rng.below(5)];
    }
    case 5: return static_cast<std::uint32_t>(0x20 + rng.below(0x5F));  // printable ASCII
    case 6: {
      static const char32_t spaces[] = {' ', ' ', '\t', '\n', '\r', 0x00A0, 0x2003, 0x3000, 0x200B};
      return spaces[rng.below(9)];
    }
    case 7: return static_cast<std::uint32_t>(rng.below(0x20));  // controls, including NUL
    case 8: {
      std::uint32_t cp = 0;
      do {
        cp = static_cast<std::uint32_t>(0x80 + rng.below(0x10000 - 0x80));
      } while (cp >= 0xD800 && cp <= 0xDFFF);
      return cp;
    }
    default: return static_cast<std::uint32_t>(0x10000 + rng.below(0x110000 - 0x10000));
  }
}

}  // namespace

std::string urdu_word(Rng& rng) { return sampler().draw(rng); }

std::vector<lrforge::corpus::CorpusRecord> urdu_corpus(std::uint64_t seed, std::size_t target_bytes) {
  Rng rng(seed);
  std::vector<lrforge::corpus::CorpusRecord> out;
  std::size_t bytes = 0;
  while (bytes < target_bytes) {
    std::string doc;
    const auto sentences = rng.between(2, 14);
    for (std::int64_t s = 0; s < sentences; ++s) {
      if (s) doc += ' ';
      doc += sentence(rng);
    }
    bytes += doc.size();
    out.push_back({std::move(doc), rng.pick(kSources), rng.pick(kCategories)});
  }
  return out;
}

std::vector<std::string> urdu_texts(std::uint64_t seed, std::size_t target_bytes) {
  std::vector<std::string> out;
  for (auto& r : urdu_corpus(seed, target_bytes)) out.push_back(std::move(r.data));
  return out;
}

std::string random_mixed_utf8(Rng& rng, std::size_t max_codepoints) {
  std::string out;
  const auto n = rng.below(max_codepoints + 1);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (rng.chance(0.15)) {
      out += urdu_word(rng);
      continue;
    }
    lrforge::utf8::append(out, random_codepoint(rng));
  }
  return out;
}

std::string random_noisy_text(Rng& rng) {
  static const std::vector<std::string> latin = {"the", "News", "update", "Lahore", "ABC", "xyz", "Pakistan"};
  static const std::vector<std::string> arabic_variants = {"كتاب", "علي", "هذا", "مدرسة", "ي", "ك", "ە"};
  static const std::vector<std::string> invisible = {"\u200B", "\uFEFF", "\u200E", "\u200F",
                                                     "\u202A", "\u2060", "\u00A0", "\u200C"};
  std::string out;
  const auto pieces = rng.between(0, 24);
  for (std::int64_t i = 0; i < pieces; ++i) {
    switch (rng.below(16)) {
      case 0: out += "https://example.com/path?q=" + std::to_string(rng.below(1000)); break;
      case 1: out += "user" + std::to_string(rng.below(99)) + "@mail.pk"; break;
      case 2: out += "+92 300 " + std::to_string(1000000 + rng.below(9000000)); break;
      case 3: out += std::to_string(rng.below(100000)); break;
      case 4: out += rng.pick(latin); break;
      case 5: out += rng.pick(arabic_variants); break;
      case 6: out += rng.pick(invisible); break;
      case 7: out += std::string(static_cast<std::size_t>(rng.between(1, 4)), ' '); break;
      case 8: out += rng.chance(0.5) ? "()" : "( )"; break;
      case 9: {
        const auto q = rng.between(1, 4);
        for (std::int64_t k = 0; k < q; ++k) out += "؟";
        break;
      }
      case 10: out += "\t\n"; break;
      case 11: out += rng.chance(0.5) ? "کےلیے" : "اسکے"; break;
      case 12: out += "٣٤"; break;
      case 13: out += rng.chance(0.5) ? "(" : ")"; break;
      default: out += urdu_word(rng); break;
    }
    if (rng.chance(0.6)) out += ' ';
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> oracle_bpe(const std::vector<std::string>& texts,
                                                            std::size_t merges) {
  std::vector<std::vector<std::string>> words;
  for (const auto& t : texts) {
    for (const auto& chunk : lrforge::pretokenize(t)) {
      std::vector<std::string> w;
      for (char c : chunk.text) w.emplace_back(1, c);
      words.push_back(std::move(w));
    }
  }
  std::vector<std::string> vocab;
  for (int b = 0; b < 256; ++b) vocab.emplace_back(1, static_cast<char>(b));
  std::vector<std::pair<std::string, std::string>> out;
  while (out.size() < merges) {
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    for (const auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.size(); ++i) ++counts[{w[i], w[i + 1]}];
    }
    const std::pair<std::string, std::string>* best = nullptr;
    std::size_t best_count = 0;
    // std::map iterates in ascending (left, right) order, so the first
    // maximum is the lexicographically smallest.
    for (const auto& [pair, count] : counts) {
      if (std::find(vocab.begin(), vocab.end(), pair.first + pair.second) != vocab.end()) continue;
      if (count > best_count) {
        best = &pair;
        best_count = count;
      }
    }
    if (best == nullptr) break;
    const auto chosen = *best;
    out.push_back(chosen);
    vocab.push_back(chosen.first + chosen.second);
    for (auto& w : words) {
      std::vector<std::string> merged;
      for (std::size_t i = 0; i < w.size();) {
        if (i + 1 < w.size() && w[i] == chosen.first && w[i + 1] == chosen.second) {
          merged.push_back(chosen.first + chosen.second);
          i += 2;
        } else {
          merged.push_back(w[i]);
          ++i;
        }
      }
      w = std::move(merged);
    }
  }
  return out;
}

std::vector<std::string> oracle_encode_chunk(const std::string& chunk,
                                             const std::vector<std::pair<std::string, std::string>>& merges) {
  std::vector<std::string> parts;
  for (char c : chunk) parts.emplace_back(1, c);
  while (true) {
    std::size_t best_rank = merges.size();
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      for (std::size_t r = 0; r < best_rank; ++r) {
        if (merges[r].first == parts[i] && merges[r].second == parts[i + 1]) {
          best_rank = r;
          break;
        }
      }
    }
    if (best_rank == merges.size()) return parts;
    std::vector<std::string> merged;
    for (std::size_t i = 0; i < parts.size();) {
      if (i + 1 < parts.size() && parts[i] == merges[best_rank].first &&
          parts[i + 1] == merges[best_rank].second) {
        merged.push_back(parts[i] + parts[i + 1]);
        i += 2;
      } else {
        merged.push_back(parts[i]);
        ++i;
      }
    }
    parts = std::move(merged);
  }
}

double oracle_bleu(const std::vector<std::vector<std::string>>& hyps,
                   const std::vector<std::vector<std::vector<std::string>>>& refs, int max_n) {
  const auto occurrences = [](const std::vector<std::string>& toks, const std::vector<std::string>& gram) {
    std::size_t n = 0;
    for (std::size_t i = 0; i + gram.size() <= toks.size(); ++i) {
      if (std::equal(gram.begin(), gram.end(), toks.begin() + static_cast<std::ptrdiff_t>(i))) ++n;
    }
    return n;
  };
  std::vector<double> match(static_cast<std::size_t>(max_n), 0), total(static_cast<std::size_t>(max_n), 0);
  double c = 0, r = 0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const auto& h = hyps[s];
    c += static_cast<double>(h.size());
    std::size_t best = refs[s][0].size();
    for (const auto& ref : refs[s]) {
      const auto dist = [&](std::size_t len) { return std::abs(static_cast<long>(len) - static_cast<long>(h.size())); };
      if (dist(ref.size()) < dist(best) || (dist(ref.size()) == dist(best) && ref.size() < best)) best = ref.size();
    }
    r += static_cast<double>(best);
    for (int n = 1; n <= max_n; ++n) {
      std::vector<std::vector<std::string>> seen;
      for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= h.size(); ++i) {
        std::vector<std::string> gram(h.begin() + static_cast<std::ptrdiff_t>(i),
                                      h.begin() + static_cast<std::ptrdiff_t>(i) + n);
        total[static_cast<std::size_t>(n - 1)] += 1;
        if (std::find(seen.begin(), seen.end(), gram) != seen.end()) continue;
        seen.push_back(gram);
        std::size_t max_ref = 0;
        for (const auto& ref : refs[s]) max_ref = std::max(max_ref, occurrences(ref, gram));
        match[static_cast<std::size_t>(n - 1)] += static_cast<double>(std::min(occurrences(h, gram), max_ref));
      }
    }
  }
  if (c == 0 || match[0] == 0) return 0.0;
  double logs = 0;
  int used = 0;
  for (int n = 0; n < max_n; ++n) {
    if (total[static_cast<std::size_t>(n)] == 0) continue;
    const double p = match[static_cast<std::size_t>(n)] == 0 ? 1e-9 : match[static_cast<std::size_t>(n)] / total[static_cast<std::size_t>(n)];
    logs += std::log(p);
    ++used;
  }
  const double bp = c < r ? std::exp(1 - r / c) : 1.0;
  return 100.0 * bp * std::exp(logs / used);
}

std::size_t oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size() || j == b.size()) return 0;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t v = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    memo[key] = v;
    return v;
  };
  return go(0, 0);
}

std::string temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("lrforge_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string write_pipeline_fixture(const std::string& dir, const std::string& output_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Rng rng(0x9A7E);
  auto base = urdu_corpus(4242, 400'000);
  base.resize(88);
  std::vector<lrforge::corpus::CorpusRecord> docs;
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto r = base[i];
    if (i % 7 == 0) r.data += " https://example.com/page" + std::to_string(i);
    if (i % 11 == 0) r.data = "Breaking news 2024: " + r.data;
    if (i % 13 == 0) r.data += " \u00a0()  ???";
    docs.push_back(std::move(r));
  }
  for (int k = 0; k < 6; ++k) docs.push_back(docs[static_cast<std::size_t>(rng.below(base.size()))]);
  for (int k = 0; k < 6; ++k) {
    auto r = docs[static_cast<std::size_t>(rng.below(base.size()))];
    r.data += " " + urdu_word(rng);
    docs.push_back(std::move(r));
  }
  lrforge::corpus::write_csv(dir + "/docs.csv", docs);

  const std::vector<std::string> labels{"positive", "negative"};
  {
    std::ofstream gold(dir + "/sc.csv", std::ios::binary);
    gold << "text,label\n";
    for (int i = 0; i < 20; ++i) gold << base[static_cast<std::size_t>(i)].data.substr(0, 60) << ',' << labels[i % 2] << '\n';
  }
  std::string predictions;
  for (int run = 1; run <= 5; ++run) {
    const std::string name = "pred" + std::to_string(run) + ".txt";
    std::ofstream out(dir + "/" + name, std::ios::binary);
    for (int i = 0; i < 20; ++i) out << labels[(i + (i < run * 3 ? 1 : 0)) % 2] << '\n';
    predictions += (run > 1 ? ", " : "") + name;
  }

  const std::string config = dir + "/pipeline.cfg";
  std::ofstream cfg(config, std::ios::binary);
  cfg << "[pipeline]\n"
         "input = docs.csv\n"
         "output_dir = " << output_dir << "\n"
         "threads = 2\n"
         "stages = clean, dedup, train-tokenizer, eval-tokenizer, pack, stats, schedule, budget, eval-metrics\n"
         "\n"
         "[clean]\n"
         "remove_english = true\n"
         "\n"
         "[dedup]\n"
         "threshold = 0.9\n"
         "\n"
         "[train-tokenizer]\n"
         "vocab_size = 800\n"
         "\n"
         "[eval-tokenizer]\n"
         "repetitions = 3\n"
         "\n"
         "[pack]\n"
         "shard_tokens = 4096\n"
         "val_fraction = 0.2\n"
         "\n"
         "[schedule]\n"
         "plan = pretrain\n"
         "points = 50\n"
         "\n"
         "[budget]\n"
         "shape = urdulm-100m-32k\n"
         "plan = pretrain\n"
         "hardware = table3\n"
         "\n"
         "[eval-metrics]\n"
         "task = sc\n"
         "gold = sc.csv\n"
         "predictions = " << predictions << "\n"
         "runs = 5\n";
  return config;
}

std::vector<lrforge::corpus::CorpusRecord> golden_shard_records() {
  return {{"اردو زبان۔", "web", "news"},
          {"سال ۲۰۲۴ میں کتاب، \"نئی\" تھی؟", "books", "books"},
          {"mixed ASCII text 42", "web", "blogs"}};
}

std::string expected_shard_bytes(const lrforge::Vocabulary& vocab,
                                 const std::vector<lrforge::corpus::CorpusRecord>& records) {
  std::vector<std::pair<std::string, std::string>> merges;
  for (const auto& m : vocab.merges()) merges.emplace_back(vocab.bytes_of(m.left), vocab.bytes_of(m.right));
  std::vector<std::uint32_t> ids;
  for (const auto& r : records) {
    for (const auto& chunk : lrforge::pretokenize(r.data)) {
      for (const auto& piece : oracle_encode_chunk(std::string(chunk.text), merges)) {
        if (piece.size() == 1) {
          ids.push_back(static_cast<unsigned char>(piece[0]));
          continue;
        }
        const auto it = std::find_if(merges.begin(), merges.end(),
                                     [&](const auto& m) { return m.first + m.second == piece; });
        ids.push_back(static_cast<std::uint32_t>(256 + (it - merges.begin())));
      }
    }
    ids.push_back(static_cast<std::uint32_t>(vocab.size() - 1));
  }
  const std::uint32_t width = vocab.size() <= 65536 ? 2 : 4;
  std::string out = "LRFG";
  auto put = [&out](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put(1, 4);
  put(vocab.size(), 4);
  put(width, 4);
  put(ids.size(), 8);
  for (auto id : ids) put(id, static_cast<int>(width));
  return out;
}

}  // namespace testsupport
