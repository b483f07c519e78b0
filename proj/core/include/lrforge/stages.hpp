#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lrforge/budget.hpp"
#include "lrforge/corpus.hpp"
#include "lrforge/dedup.hpp"
#include "lrforge/evalmetrics.hpp"
#include "lrforge/normalize.hpp"

// File-to-file steps shared by the command-line subcommands and the pipeline
// runner. Every step reads its inputs fully and writes its outputs through a
// temporary file that is renamed into place.
namespace lrforge::stages {

struct OutputFile {
  std::string path;
  // False for outputs that carry timings.
  bool deterministic = true;
};

struct StageOutcome {
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  std::vector<std::pair<std::string, double>> values;
  std::vector<OutputFile> files;
};

// Writes `bytes` to `path` via `path.tmp` and a rename. Throws Errc::io.
void write_file_atomic(const std::string& path, std::string_view bytes);
std::string read_file(const std::string& path);

StageOutcome clean(const std::string& in_csv, const std::string& out_csv,
                   const normalize::CleanConfig& config, const std::string& report_json = {});

// Writes kept rows to `out_csv`, kept original row indices (0-based, one per
// line) to `kept_path` and the removal decisions next to it.
StageOutcome dedup(const std::string& in_csv, const std::string& out_csv,
                   const std::string& kept_path, const std::string& decisions_csv,
                   const std::string& review_csv, const dedup::DedupParams& params);

StageOutcome train_tokenizer(const std::vector<std::string>& in_csvs, std::size_t vocab_size,
                             const std::string& vocab_out);

struct NamedVocab {
  std::string name;
  std::string path;  // empty for the byte-level baseline
};

// Compares tokenizers on the held-out CSV. `baseline` indexes the reduction
// column of the plot table.
StageOutcome eval_tokenizer(const std::vector<NamedVocab>& vocabs, const std::string& heldout_csv,
                            const std::string& report_csv, const std::string& plot_csv,
                            std::size_t baseline, int repetitions);

StageOutcome pack(const std::string& in_csv, const std::string& vocab_path,
                  const std::string& out_dir, std::size_t shard_tokens);

StageOutcome split(const std::string& shard_dir, const corpus::SplitSpec& spec,
                   const std::string& out_csv);

StageOutcome stats(const std::string& in_csv, const std::string& vocab_path,
                   const std::string& out_csv);

StageOutcome schedule(const budget::TrainPlan& plan, int points, const std::string& out_csv);

// Training summary table followed by the inference figures.
std::string budget_report(const budget::ModelShape& shape, const budget::TrainPlan& plan,
                          const budget::HardwareProfile& hw, double prompt_tokens);

StageOutcome estimate_budget(const budget::ModelShape& shape, const budget::TrainPlan& plan,
                             const budget::HardwareProfile& hw, double prompt_tokens,
                             const std::string& out_txt);

StageOutcome eval_metrics(evalmetrics::TaskKind kind, const std::string& gold_csv,
                          const std::vector<std::string>& predictions, int runs,
                          const std::string& out_csv);

// Shard files in `dir`, sorted by name.
std::vector<std::string> list_shards(const std::string& dir);

}  // namespace lrforge::stages
