#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lrforge/corpus.hpp"

namespace testsupport {

// Engine output is specified by the standard; the draws below avoid the
// implementation-defined distribution classes so fixtures are identical on
// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);
  // Uniform in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  bool chance(double p) { return uniform() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  std::mt19937_64 engine_;
};

// Zipf(s) over ranks 0..n-1.
class Zipf {
 public:
  Zipf(std::size_t n, double s);
  std::size_t draw(Rng& rng) const;

 private:
  std::vector<double> cdf_;
};

// Synthetic Urdu prose: real function and content words, syllable-built
// pseudo-words with a Zipfian frequency profile, Urdu digits and punctuation.
std::vector<lrforge::corpus::CorpusRecord> urdu_corpus(std::uint64_t seed, std::size_t target_bytes);
std::vector<std::string> urdu_texts(std::uint64_t seed, std::size_t target_bytes);

inline constexpr std::uint64_t kTrainSeed = 20240917;
inline constexpr std::uint64_t kHeldoutSeed = 77031;
inline constexpr std::size_t kFixtureBytes = 5'000'000;
inline constexpr std::size_t kHeldoutBytes = 400'000;

// A word that `urdu_corpus` can produce.
std::string urdu_word(Rng& rng);

// Valid UTF-8 mixing Urdu letters, digits and punctuation, ASCII, other
// planes, whitespace and control characters.
std::string random_mixed_utf8(Rng& rng, std::size_t max_codepoints);

// Urdu text salted with URLs, emails, phone numbers, Latin words and
// digits, invisible characters, NBSP, repeated question marks and empty
// parentheses.
std::string random_noisy_text(Rng& rng);

// Brute-force BPE: chunks every text, keeps each chunk occurrence as a list
// of byte strings, and per step counts every adjacent pair by scanning.
// Returns merges as (left bytes, right bytes) in rank order.
std::vector<std::pair<std::string, std::string>> oracle_bpe(const std::vector<std::string>& texts,
                                                            std::size_t merges);

// Brute-force encoding of one chunk given merges as byte-string pairs.
std::vector<std::string> oracle_encode_chunk(const std::string& chunk,
                                             const std::vector<std::pair<std::string, std::string>>& merges);

// Corpus BLEU by direct enumeration, same smoothing rules as the library.
double oracle_bleu(const std::vector<std::vector<std::string>>& hyps,
                   const std::vector<std::vector<std::vector<std::string>>>& refs, int max_n = 4);

// Recursive memoized LCS.
std::size_t oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Path of a fresh empty directory under the system temp dir.
std::string temp_dir(const std::string& tag);

}  // namespace testsupport

namespace testsupport {

// Writes a 100-document corpus CSV (noise, exact and near duplicates
// included), an SC task with five prediction runs and a config enabling
// every stage into `dir`. Returns the config path; outputs go to
// `dir`/`output_dir`.
std::string write_pipeline_fixture(const std::string& dir, const std::string& output_dir = "out");

// Records packed into the committed golden shard.
std::vector<lrforge::corpus::CorpusRecord> golden_shard_records();

// Shard bytes built from the oracle encoder and a hand-written header, one
// EOT after each record.
std::string expected_shard_bytes(const lrforge::Vocabulary& vocab,
                                 const std::vector<lrforge::corpus::CorpusRecord>& records);

}  // namespace testsupport
