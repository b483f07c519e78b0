#include "lrforge/stages.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lrforge/csv.hpp"
#include "lrforge/error.hpp"
#include "lrforge/parallel.hpp"
#include "lrforge/tokenizer.hpp"
#include "lrforge/tokeval.hpp"

namespace lrforge::stages {

namespace fs = std::filesystem;

namespace {

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string records_csv(std::span<const corpus::CorpusRecord> records) {
  std::ostringstream out;
  CsvWriter w(out);
  w.write_row({"data", "source", "category"});
  for (const auto& r : records) w.write_row({r.data, r.source, r.category});
  return out.str();
}

std::vector<std::string> texts_of(const std::vector<corpus::CorpusRecord>& records) {
  std::vector<std::string> texts;
  texts.reserve(records.size());
  for (const auto& r : records) texts.push_back(r.data);
  return texts;
}

}  // namespace

void write_file_atomic(const std::string& path, std::string_view bytes) {
  ensure_parent(path);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io, "write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io, "cannot rename " + tmp + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

StageOutcome clean(const std::string& in_csv, const std::string& out_csv,
                   const normalize::CleanConfig& config, const std::string& report_json) {
  normalize::validate(config);
  const auto records = corpus::read_csv(in_csv);
  std::vector<normalize::CleanOutcome> outcomes(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    outcomes[i] = normalize::clean_document({records[i].data, records[i].source, records[i].category},
                                            config);
  });
  normalize::CleanReport total;
  std::vector<corpus::CorpusRecord> kept;
  for (auto& o : outcomes) {
    total += o.report;
    if (o.document) kept.push_back({std::move(o.document->text), std::move(o.document->source),
                                    std::move(o.document->category)});
  }
  write_file_atomic(out_csv, records_csv(kept));
  StageOutcome out;
  out.counts = {{"documents_in", records.size()},
                {"documents_out", kept.size()},
                {"documents_emptied", total.documents_emptied},
                {"input_codepoints", total.input_codepoints},
                {"output_codepoints", total.output_codepoints}};
  out.files.push_back({out_csv});
  if (!report_json.empty()) {
    write_file_atomic(report_json, normalize::report_to_json(total) + "\n");
    out.files.push_back({report_json});
  }
  return out;
}

StageOutcome dedup(const std::string& in_csv, const std::string& out_csv,
                   const std::string& kept_path, const std::string& decisions_csv,
                   const std::string& review_csv, const dedup::DedupParams& params) {
  const auto records = corpus::read_csv(in_csv);
  const auto texts = texts_of(records);
  const auto result = dedup::dedup_corpus(texts, params);

  std::vector<corpus::CorpusRecord> kept;
  std::string kept_list;
  for (auto id : result.kept) {
    kept.push_back(records[id]);
    kept_list += std::to_string(id) + "\n";
  }
  write_file_atomic(out_csv, records_csv(kept));
  StageOutcome out;
  out.files.push_back({out_csv});
  if (!kept_path.empty()) {
    write_file_atomic(kept_path, kept_list);
    out.files.push_back({kept_path});
  }
  char buf[32];
  if (!decisions_csv.empty()) {
    std::ostringstream s;
    CsvWriter w(s);
    w.write_row({"kept_id", "removed_id", "est_jaccard", "exact"});
    for (const auto& d : result.decisions) {
      std::snprintf(buf, sizeof buf, "%.6f", d.est_jaccard);
      w.write_row({std::to_string(d.kept), std::to_string(d.removed), buf, d.exact ? "1" : "0"});
    }
    write_file_atomic(decisions_csv, s.str());
    out.files.push_back({decisions_csv});
  }
  if (!review_csv.empty()) {
    std::ostringstream s;
    CsvWriter w(s);
    w.write_row({"a", "b", "est_jaccard"});
    for (const auto& r : result.review) {
      std::snprintf(buf, sizeof buf, "%.6f", r.est_jaccard);
      w.write_row({std::to_string(r.a), std::to_string(r.b), buf});
    }
    write_file_atomic(review_csv, s.str());
    out.files.push_back({review_csv});
  }
  out.counts = {{"documents_in", records.size()},
                {"documents_out", kept.size()},
                {"exact_duplicates", result.exact_duplicates},
                {"near_duplicates", result.decisions.size() - result.exact_duplicates},
                {"candidate_pairs", result.candidate_pairs},
                {"review_pairs", result.review.size()}};
  return out;
}

StageOutcome train_tokenizer(const std::vector<std::string>& in_csvs, std::size_t vocab_size,
                             const std::string& vocab_out) {
  BpeTrainer trainer;
  std::size_t documents = 0;
  for (const auto& path : in_csvs) {
    const auto texts = texts_of(corpus::read_csv(path));
    documents += texts.size();
    trainer.add_texts(texts);
  }
  const Vocabulary vocab = trainer.train(vocab_size);
  write_file_atomic(vocab_out, serialize_vocab(vocab));
  StageOutcome out;
  out.counts = {{"documents", documents},
                {"distinct_chunks", trainer.distinct_chunks()},
                {"vocab_size", vocab.size()},
                {"merges", vocab.num_merges()}};
  out.files.push_back({vocab_out});
  return out;
}

StageOutcome eval_tokenizer(const std::vector<NamedVocab>& vocabs, const std::string& heldout_csv,
                            const std::string& report_csv, const std::string& plot_csv,
                            std::size_t baseline, int repetitions) {
  if (baseline >= vocabs.size()) throw Error(Errc::config, "baseline index out of range");
  std::vector<Tokenizer> toks;
  toks.reserve(vocabs.size());
  for (const auto& v : vocabs) toks.emplace_back(v.path.empty() ? Vocabulary{} : load_vocab(v.path));
  std::vector<tokeval::NamedTokenizer> named;
  for (std::size_t i = 0; i < vocabs.size(); ++i) named.push_back({vocabs[i].name, &toks[i]});
  const auto texts = texts_of(corpus::read_csv(heldout_csv));
  const auto report = tokeval::compare(named, texts, repetitions);

  // Timings vary between runs, so the summary table is flagged; the plot
  // table carries only counts.
  write_file_atomic(report_csv, report.report_csv());
  write_file_atomic(plot_csv, report.plot_csv(baseline));
  StageOutcome out;
  out.counts = {{"documents", texts.size()}, {"words", report.stats.front().total_words}};
  for (const auto& s : report.stats) {
    out.counts.emplace_back("tokens." + s.name, s.total_tokens);
    out.values.emplace_back("fertility." + s.name, s.fertility);
  }
  out.files.push_back({report_csv, false});
  out.files.push_back({plot_csv});
  return out;
}

std::vector<std::string> list_shards(const std::string& dir) {
  std::vector<std::string> paths;
  if (!fs::is_directory(dir)) throw Error(Errc::io, "not a directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("shard_") && name.ends_with(".bin")) {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

StageOutcome pack(const std::string& in_csv, const std::string& vocab_path,
                  const std::string& out_dir, std::size_t shard_tokens) {
  const Tokenizer tok(load_vocab(vocab_path));
  const auto records = corpus::read_csv(in_csv);
  if (fs::is_directory(out_dir)) {
    for (const auto& stale : list_shards(out_dir)) fs::remove(stale);
  }
  const auto summary = corpus::pack_to_dir(records, tok, out_dir, shard_tokens);
  StageOutcome out;
  out.counts = {{"documents", summary.documents},
                {"tokens", summary.tokens},
                {"shards", summary.shard_paths.size()}};
  for (const auto& p : summary.shard_paths) out.files.push_back({p});
  return out;
}

StageOutcome split(const std::string& shard_dir, const corpus::SplitSpec& spec,
                   const std::string& out_csv) {
  const auto shards = list_shards(shard_dir);
  const auto result = corpus::split(shards.size(), spec);
  std::vector<std::string> role(shards.size(), "train");
  for (auto v : result.val) role[v] = "val";
  std::ostringstream s;
  CsvWriter w(s);
  w.write_row({"shard", "split"});
  for (std::size_t i = 0; i < shards.size(); ++i) {
    w.write_row({fs::path(shards[i]).filename().string(), role[i]});
  }
  write_file_atomic(out_csv, s.str());
  StageOutcome out;
  out.counts = {{"train", result.train.size()}, {"val", result.val.size()}};
  out.files.push_back({out_csv});
  return out;
}

StageOutcome stats(const std::string& in_csv, const std::string& vocab_path,
                   const std::string& out_csv) {
  const auto records = corpus::read_csv(in_csv);
  corpus::CorpusStats st;
  if (vocab_path.empty()) {
    st = corpus::corpus_stats(records);
  } else {
    const Tokenizer tok(load_vocab(vocab_path));
    st = corpus::corpus_stats(records, &tok);
  }
  write_file_atomic(out_csv, st.to_csv());
  StageOutcome out;
  out.counts = {{"rows", st.rows}, {"bytes", st.bytes}};
  if (st.tokens) out.counts.emplace_back("tokens", *st.tokens);
  if (auto bpt = st.bytes_per_token()) out.values.emplace_back("bytes_per_token", *bpt);
  out.files.push_back({out_csv});
  return out;
}

StageOutcome schedule(const budget::TrainPlan& plan, int points, const std::string& out_csv) {
  budget::validate(plan);
  write_file_atomic(out_csv, budget::schedule_csv(plan, points));
  StageOutcome out;
  out.counts = {{"points", static_cast<std::uint64_t>(points)}};
  out.values = {{"peak_lr", plan.peak_lr}, {"final_lr", budget::lr_at(plan.total_tokens, plan)}};
  out.files.push_back({out_csv});
  return out;
}

std::string budget_report(const budget::ModelShape& shape, const budget::TrainPlan& plan,
                          const budget::HardwareProfile& hw, double prompt_tokens) {
  budget::validate(shape);
  budget::validate(plan);
  budget::validate(hw);
  const auto est = budget::estimate_training(shape, plan, hw);
  const auto inf = budget::estimate_inference(shape, prompt_tokens, hw);
  std::string text = budget::format_estimates(shape, plan, hw, est);
  const auto row = [&text](std::string label, const char* fmt, double v) {
    label.resize(std::max<std::size_t>(label.size(), 34), ' ');
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    text += label + buf + "\n";
  };
  char label[64];
  std::snprintf(label, sizeof label, "Inference prefill (%g tokens)", prompt_tokens);
  row(label, "%.6g TFLOPs", inf.flops / 1e12);
  row("Memory-bound latency", "%.6g ms", inf.latency_ms);
  row("Inference energy", "%.6g J", inf.energy_j);
  return text;
}

StageOutcome estimate_budget(const budget::ModelShape& shape, const budget::TrainPlan& plan,
                             const budget::HardwareProfile& hw, double prompt_tokens,
                             const std::string& out_txt) {
  write_file_atomic(out_txt, budget_report(shape, plan, hw, prompt_tokens));
  const auto est = budget::estimate_training(shape, plan, hw);
  const auto inf = budget::estimate_inference(shape, prompt_tokens, hw);
  StageOutcome out;
  out.values = {{"training_pflops", est.flops / 1e15},
                {"wall_hours", est.wall_hours},
                {"energy_kwh", est.energy_kwh},
                {"co2_kg", est.co2_kg},
                {"prefill_tflops", inf.flops / 1e12},
                {"latency_ms", inf.latency_ms}};
  out.files.push_back({out_txt});
  return out;
}

StageOutcome eval_metrics(evalmetrics::TaskKind kind, const std::string& gold_csv,
                          const std::vector<std::string>& predictions, int runs,
                          const std::string& out_csv) {
  const auto gold = evalmetrics::load_examples(gold_csv, kind);
  const auto table = evalmetrics::evaluate_run(kind, gold, predictions, runs);
  write_file_atomic(out_csv, table.to_csv());
  StageOutcome out;
  out.counts = {{"examples", gold.size()}, {"runs", static_cast<std::uint64_t>(runs)}};
  out.values = {{table.mean.metric, table.mean.value}};
  out.files.push_back({out_csv});
  return out;
}

}  // namespace lrforge::stages
