#include "lrforge/tokeval.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

#include "lrforge/csv.hpp"
#include "lrforge/error.hpp"
#include "lrforge/parallel.hpp"
#include "lrforge/utf8.hpp"

namespace lrforge::tokeval {

namespace {

template <typename Fn>
void for_each_word(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  char32_t cp = 0;
  while (pos < text.size()) {
    const std::size_t at = pos;
    const bool space = utf8::next(text, pos, cp) && utf8::is_space(cp);
    if (space) {
      if (start != std::string_view::npos) fn(text.substr(start, at - start));
      start = std::string_view::npos;
    } else if (start == std::string_view::npos) {
      start = at;
    }
  }
  if (start != std::string_view::npos) fn(text.substr(start));
}

std::vector<std::size_t> per_doc_tokens(std::span<const std::string> corpus, const Tokenizer& tok) {
  std::vector<std::size_t> counts(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) { counts[i] = tok.count_tokens(corpus[i]); });
  return counts;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

}  // namespace

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  for_each_word(text, [&](std::string_view) { ++n; });
  return n;
}

double fertility_ratio(std::size_t tokens, std::size_t words) {
  if (words == 0) throw Error(Errc::empty_corpus, "no whitespace-delimited words");
  return static_cast<double>(tokens) / static_cast<double>(words);
}

double reduction(std::size_t count_a, std::size_t count_b) {
  if (count_b == 0) throw Error(Errc::empty_corpus, "reference token count is zero");
  return 1.0 - static_cast<double>(count_a) / static_cast<double>(count_b);
}

double fertility(std::span<const std::string> corpus, const Tokenizer& tok) {
  std::size_t words = 0;
  for (const auto& doc : corpus) words += count_words(doc);
  if (words == 0) throw Error(Errc::empty_corpus, "no whitespace-delimited words");
  std::size_t tokens = 0;
  for (std::size_t n : per_doc_tokens(corpus, tok)) tokens += n;
  return fertility_ratio(tokens, words);
}

double avg_token_count(std::span<const std::string> corpus, const Tokenizer& tok) {
  if (corpus.empty()) throw Error(Errc::empty_corpus, "no documents");
  std::size_t tokens = 0;
  for (std::size_t n : per_doc_tokens(corpus, tok)) tokens += n;
  return static_cast<double>(tokens) / static_cast<double>(corpus.size());
}

double coverage(std::span<const std::string> corpus, const Tokenizer& tok) {
  std::set<std::string_view> types;
  for (const auto& doc : corpus) for_each_word(doc, [&](std::string_view w) { types.insert(w); });
  if (types.empty()) throw Error(Errc::empty_corpus, "no word types");
  std::size_t single = 0;
  std::vector<TokenId> scratch;
  for (std::string_view w : types) {
    scratch.clear();
    tok.encode_append(w, scratch);
    bool covered = scratch.size() == 1;
    if (!covered) {
      scratch.clear();
      tok.encode_append(" " + std::string(w), scratch);
      covered = scratch.size() == 1;
    }
    single += covered;
  }
  return static_cast<double>(single) / static_cast<double>(types.size());
}

double tokens_per_second(std::span<const std::string> corpus, const Tokenizer& tok,
                         int repetitions) {
  repetitions = std::max(repetitions, 3);
  std::vector<double> rates;
  std::vector<TokenId> scratch;
  for (int r = 0; r < repetitions; ++r) {
    std::size_t tokens = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& doc : corpus) {
      scratch.clear();
      tok.encode_append(doc, scratch);
      tokens += scratch.size();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rates.push_back(static_cast<double>(tokens) / std::max(secs, 1e-9));
  }
  std::sort(rates.begin(), rates.end());
  return rates[rates.size() / 2];
}

TokenizerStats evaluate(std::string name, std::span<const std::string> corpus,
                        const Tokenizer& tok, int repetitions) {
  if (corpus.empty()) throw Error(Errc::empty_corpus, "no documents");
  TokenizerStats s;
  s.name = std::move(name);
  s.documents = corpus.size();
  for (const auto& doc : corpus) s.total_words += count_words(doc);
  for (std::size_t n : per_doc_tokens(corpus, tok)) s.total_tokens += n;
  s.fertility = fertility_ratio(s.total_tokens, s.total_words);
  s.avg_token_count = static_cast<double>(s.total_tokens) / static_cast<double>(s.documents);
  s.coverage = coverage(corpus, tok);
  s.tokens_per_second = tokens_per_second(corpus, tok, repetitions);
  return s;
}

ComparisonReport compare(std::span<const NamedTokenizer> tokenizers,
                         std::span<const std::string> corpus, int repetitions) {
  if (tokenizers.size() < 2) throw Error(Errc::config, "compare needs at least two tokenizers");
  ComparisonReport report;
  for (const auto& t : tokenizers) {
    report.stats.push_back(evaluate(t.name, corpus, *t.tokenizer, repetitions));
  }
  const std::size_t n = report.stats.size();
  report.reductions.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      report.reductions[i][j] = reduction(report.stats[i].total_tokens, report.stats[j].total_tokens);
    }
  }
  return report;
}

std::string ComparisonReport::report_csv() const {
  std::ostringstream out;
  CsvWriter w(out);
  w.write_row({"name", "fertility", "avg_token_count", "tokens_per_second", "coverage"});
  for (const auto& s : stats) {
    w.write_row({s.name, fmt(s.fertility), fmt(s.avg_token_count), fmt(s.tokens_per_second),
                 fmt(s.coverage)});
  }
  return out.str();
}

std::string ComparisonReport::plot_csv(std::size_t baseline) const {
  std::ostringstream out;
  CsvWriter w(out);
  w.write_row({"tokenizer", "avg_token_count", "total_tokens", "baseline", "reduction_pct"});
  for (std::size_t i = 0; i < stats.size(); ++i) {
    w.write_row({stats[i].name, fmt(stats[i].avg_token_count),
                 std::to_string(stats[i].total_tokens), stats[baseline].name,
                 fmt(100.0 * reductions[i][baseline])});
  }
  return out.str();
}

}  // namespace lrforge::tokeval
