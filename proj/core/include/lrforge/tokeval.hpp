#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrforge/tokenizer.hpp"

namespace lrforge::tokeval {

struct TokenizerStats {
  std::string name;
  double fertility = 0;          // tokens per whitespace word
  double avg_token_count = 0;    // mean tokens per document
  double tokens_per_second = 0;  // median over timed repetitions
  double coverage = 0;           // fraction of word types that are one token
  std::size_t total_tokens = 0;
  std::size_t total_words = 0;
  std::size_t documents = 0;
};

std::size_t count_words(std::string_view text);

// tokens / words. Throws Errc::empty_corpus when words == 0.
double fertility_ratio(std::size_t tokens, std::size_t words);

// Relative token-count reduction of `a` against `b`: 1 - a/b.
double reduction(std::size_t count_a, std::size_t count_b);

double fertility(std::span<const std::string> corpus, const Tokenizer& tok);
double avg_token_count(std::span<const std::string> corpus, const Tokenizer& tok);

// A word type counts as covered when either its bare form or its
// space-prefixed form (the way it appears mid-sentence) is a single token.
double coverage(std::span<const std::string> corpus, const Tokenizer& tok);

// Encodes the whole corpus `repetitions` times (at least 3) on the calling
// thread and returns the median throughput.
double tokens_per_second(std::span<const std::string> corpus, const Tokenizer& tok,
                         int repetitions = 3);

TokenizerStats evaluate(std::string name, std::span<const std::string> corpus,
                        const Tokenizer& tok, int repetitions = 3);

struct NamedTokenizer {
  std::string name;
  const Tokenizer* tokenizer;
};

struct ComparisonReport {
  std::vector<TokenizerStats> stats;
  // reductions[i][j] = 1 - tokens_i / tokens_j
  std::vector<std::vector<double>> reductions;

  std::string report_csv() const;
  // Fig. 1 style bars: one row per tokenizer, reduction against `baseline`.
  std::string plot_csv(std::size_t baseline) const;
};

// Throws Errc::config for fewer than two tokenizers.
ComparisonReport compare(std::span<const NamedTokenizer> tokenizers,
                         std::span<const std::string> corpus, int repetitions = 3);

}  // namespace lrforge::tokeval
