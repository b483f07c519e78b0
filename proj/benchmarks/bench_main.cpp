#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "lrforge/dedup.hpp"
#include "lrforge/normalize.hpp"
#include "lrforge/tokenizer.hpp"

namespace {

// Pseudo-Urdu prose from a fixed word list.
std::vector<std::string> make_texts(std::size_t docs, std::size_t words_per_doc) {
  static const std::vector<std::string> words = {
      "اور", "کے", "میں", "کی", "ہے", "پاکستان", "زبان", "اردو", "کتاب", "حکومت",
      "لوگ", "شہر", "سال", "دن", "بات", "کام", "وقت", "پانی", "علم", "خبر",
      "۲۰۲۴", "۔", "،", "کیا", "تھا", "ہیں", "نے", "سے", "پر", "تک"};
  std::mt19937_64 rng(7);
  std::vector<std::string> out(docs);
  for (auto& d : out) {
    for (std::size_t i = 0; i < words_per_doc; ++i) {
      if (i) d += ' ';
      d += words[rng() % words.size()];
      d += std::to_string(rng() % 50);
    }
  }
  return out;
}

const std::vector<std::string>& corpus() {
  static const auto texts = make_texts(400, 200);
  return texts;
}

void BM_TrainBpe(benchmark::State& state) {
  const auto& texts = corpus();
  for (auto _ : state) {
    benchmark::DoNotOptimize(lrforge::train_bpe(texts, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_TrainBpe)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_Encode(benchmark::State& state) {
  const auto& texts = corpus();
  const lrforge::Tokenizer tok(lrforge::train_bpe(texts, 4000));
  std::size_t bytes = 0;
  for (auto _ : state) {
    for (const auto& t : texts) {
      benchmark::DoNotOptimize(tok.encode(t));
      bytes += t.size();
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_Encode)->Unit(benchmark::kMillisecond);

void BM_MinHash(benchmark::State& state) {
  const auto& texts = corpus();
  const auto seeds = lrforge::dedup::make_seeds(128);
  for (auto _ : state) {
    for (const auto& t : texts) {
      benchmark::DoNotOptimize(lrforge::dedup::minhash(lrforge::dedup::shingles(t, 5), seeds));
    }
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * texts.size()));
}
BENCHMARK(BM_MinHash)->Unit(benchmark::kMillisecond);

void BM_Clean(benchmark::State& state) {
  auto texts = corpus();
  for (auto& t : texts) t += " https://example.com/x  ؟؟ ( ) 0300-1234567";
  const lrforge::normalize::CleanConfig cfg;
  std::size_t bytes = 0;
  for (auto _ : state) {
    for (const auto& t : texts) {
      benchmark::DoNotOptimize(lrforge::normalize::clean_text(t, cfg));
      bytes += t.size();
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_Clean)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
