#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lrforge::evalmetrics {

enum class TaskKind { sc, gec, qa_c, qa_nc };

// Accepts sc, gec, qa-c, qa-nc (case-insensitive, '_' for '-').
// Throws Errc::config.
TaskKind parse_task_kind(std::string_view name);
std::string_view task_kind_name(TaskKind kind);
// accuracy for SC, bleu for GEC, rouge_l for QA.
std::string_view task_metric(TaskKind kind);

struct Example {
  std::string context;  // QA-C only
  std::string input;
  std::string output;
};

struct FewShotTask {
  TaskKind kind = TaskKind::sc;
  std::vector<Example> shots;
  Example query;                    // output is ignored
  std::vector<std::string> labels;  // SC label set; empty means unchecked
};

// `example` must hold {input} and {output} once each, and {context} exactly
// when the task is QA-C. Shots are joined by `separator`; the query is the
// example text cut at its {output} slot.
struct PromptTemplate {
  std::string header;
  std::string example;
  std::string separator = "\n\n";
};

PromptTemplate default_template(TaskKind kind);
// Flat key = value file with keys header, example, separator. Values accept
// \n and \t escapes.
PromptTemplate load_template(const std::string& path);

// Throws Errc::template_slot_mismatch, or Errc::data for an SC shot whose
// label is outside the label set.
std::string build_prompt(const FewShotTask& task, const PromptTemplate& tmpl);

// First non-empty line, trimmed, ASCII lower-cased.
std::string normalize_label(std::string_view text);

// Percent in [0, 100]. Throws Errc::length_mismatch.
double accuracy(std::span<const std::string> predictions, std::span<const std::string> golds);

using Tokens = std::vector<std::string>;

// Whitespace tokens of the cleaned text.
Tokens metric_tokens(std::string_view text);

// Corpus BLEU in [0, 100] over pre-tokenized text. Each hypothesis has one or
// more references. Orders with no n-grams anywhere in the hypotheses are left
// out of the geometric mean; zero matches at an order use precision 1e-9; no
// unigram match scores 0. Throws Errc::empty_reference and
// Errc::length_mismatch.
double corpus_bleu(std::span<const Tokens> hypotheses, std::span<const std::vector<Tokens>> references,
                   int max_n = 4);
double bleu(const Tokens& hypothesis, const std::vector<Tokens>& references, int max_n = 4);
double bleu(std::string_view hypothesis, std::string_view reference, int max_n = 4);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);
// LCS F-measure with beta 1; 0 when either side is empty.
double rouge_l(std::span<const std::string> hypothesis, std::span<const std::string> reference);
double rouge_l(std::string_view hypothesis, std::string_view reference);

struct MetricScore {
  std::string metric;
  double value = 0;
  std::vector<double> per_example;  // empty for BLEU, which is corpus-level
  int runs = 1;
};

// Scores one run: accuracy for SC, corpus BLEU for GEC, mean ROUGE-L for QA.
MetricScore score(TaskKind kind, std::span<const Example> gold,
                  std::span<const std::string> predictions);

struct RunTable {
  TaskKind kind = TaskKind::sc;
  std::vector<MetricScore> per_run;
  MetricScore mean;

  std::string to_csv() const;
  // Column header and value in the style of a results table, e.g.
  // "SC Acc. (%)" and "66.60".
  std::string column_label() const;
  std::string formatted_mean() const;
};

// Reads one predictions file per run. Throws Errc::missing_run naming every
// absent file, including the count shortfall when fewer than `runs` paths
// are given.
RunTable evaluate_run(TaskKind kind, std::span<const Example> gold,
                      std::span<const std::string> prediction_paths, int runs = 5);

// Task CSV columns: SC text,label; GEC source,target; QA-C
// context,question,answer; QA-NC question,answer. Throws Errc::bad_header.
std::vector<Example> load_examples(const std::string& path, TaskKind kind);

// One prediction per line; a trailing newline does not add an empty line.
std::vector<std::string> load_predictions(const std::string& path);

}  // namespace lrforge::evalmetrics
