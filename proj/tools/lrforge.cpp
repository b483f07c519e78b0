// Command-line front-end for the lrforge corpus and tokenizer toolkit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrforge/budget.hpp"
#include "lrforge/error.hpp"
#include "lrforge/evalmetrics.hpp"
#include "lrforge/parallel.hpp"
#include "lrforge/pipeline.hpp"
#include "lrforge/stages.hpp"
#include "lrforge/tokenizer.hpp"
#include "lrforge/version.hpp"

namespace {

using namespace lrforge;

void log_outcome(std::string_view stage, const stages::StageOutcome& out) {
  std::cerr << stage << ":";
  for (const auto& [k, v] : out.counts) std::cerr << ' ' << k << '=' << v;
  for (const auto& [k, v] : out.values) std::cerr << ' ' << k << '=' << v;
  std::cerr << '\n';
  for (const auto& f : out.files) std::cerr << "  wrote " << f.path << '\n';
}

// Writes to `path`, or standard output when it is empty or "-".
void emit(const std::string& path, std::string_view text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    stages::write_file_atomic(path, text);
  }
}

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return stages::read_file(path);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

struct Common {
  int threads = 0;
};

CLI::App* subcommand(CLI::App& app, const std::string& name, const std::string& help,
                     Common& common) {
  auto* sub = app.add_subcommand(name, help);
  sub->set_version_flag("--version", std::string(kVersion));
  sub->add_option("--threads", common.threads, "Worker thread cap (0 = hardware)")
      ->check(CLI::NonNegativeNumber);
  return sub;
}

int run(int argc, char** argv) {
  CLI::App app{"Urdu-focused corpus cleaning, deduplication, BPE tokenizer and budget toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "Worker thread cap (0 = hardware)")
      ->check(CLI::NonNegativeNumber);

  // clean
  std::string in, out, report, vocab, kept, decisions, review;
  bool remove_english = false;
  bool no_arabic_indic = false;
  std::vector<std::string> noise;
  std::string char_map, word_space_map;
  auto* clean = subcommand(app, "clean", "Normalize and clean a data,source,category CSV", common);
  clean->add_option("--in", in, "Input CSV")->required();
  clean->add_option("--out", out, "Cleaned CSV")->required();
  clean->add_option("--report", report, "Per-rule counters as JSON");
  clean->add_flag("--remove-english", remove_english, "Also strip Latin-script text and digits");
  clean->add_option("--noise", noise, "Noise patterns to remove (default: all)");
  clean->add_option("--char-map", char_map, "Character map file (from<TAB>to)");
  clean->add_option("--word-space-map,--space-map", word_space_map, "Word spacing map file (from<TAB>to)");
  clean->add_flag("--keep-arabic-indic", no_arabic_indic, "Leave U+0660..U+0669 digits alone");

  // dedup
  dedup::DedupParams dp;
  auto* dd = subcommand(app, "dedup", "Remove exact and near-duplicate documents", common);
  dd->add_option("--in", in, "Input CSV")->required();
  dd->add_option("--out", out, "Deduplicated CSV")->required();
  dd->add_option("--kept", kept, "Kept original row indices, one per line");
  dd->add_option("--decisions,--report", decisions, "Decisions CSV: kept_id, removed_id, est_jaccard");
  dd->add_option("--review", review, "Borderline pairs CSV");
  dd->add_option("--threshold", dp.threshold, "Jaccard threshold")->capture_default_str();
  dd->add_option("--num-perm,--perms", dp.num_perms, "MinHash permutations")->capture_default_str();
  dd->add_option("--bands", dp.bands, "LSH bands")->capture_default_str();
  dd->add_option("--rows", dp.rows, "LSH rows per band")->capture_default_str();
  dd->add_option("--shingle-k,--shingle", dp.shingle_k, "Words per shingle")->capture_default_str();
  dd->add_option("--seed", dp.hash_seed, "Hash seed");
  dd->add_flag("--exact-verify", dp.exact_verify, "Confirm candidates with exact Jaccard");

  // train-tokenizer
  std::vector<std::string> inputs;
  std::size_t vocab_size = 32000;
  auto* train = subcommand(app, "train-tokenizer", "Train a byte-level BPE vocabulary", common);
  train->add_option("--in", inputs, "Input CSV(s)")->required();
  train->add_option("--vocab-size", vocab_size, "Target vocabulary size including EOT")
      ->capture_default_str();
  train->add_option("--out", out, "Vocabulary file")->required();

  // encode / decode
  auto* enc = subcommand(app, "encode", "Encode text, one document per line, to token ids", common);
  enc->add_option("--vocab", vocab, "Vocabulary file")->required();
  enc->add_option("--in", in, "Text file (default: stdin)");
  enc->add_option("--out", out, "Id file (default: stdout)");
  auto* dec = subcommand(app, "decode", "Decode token ids, one document per line, to text", common);
  dec->add_option("--vocab", vocab, "Vocabulary file")->required();
  dec->add_option("--in", in, "Id file (default: stdin)");
  dec->add_option("--out", out, "Text file (default: stdout)");

  // eval-tokenizer
  std::vector<std::string> named_vocabs, baselines;
  std::string heldout, plot, reference;
  int repetitions = 3;
  auto* evt = subcommand(app, "eval-tokenizer", "Compare tokenizers on held-out text", common);
  evt->add_option("--vocab", named_vocabs, "Tokenizer to evaluate, as path or name=path")->required();
  evt->add_option("--baseline", baselines, "Baseline tokenizer, as path or name=path");
  evt->add_option("--corpus,--heldout", heldout, "Held-out CSV")->required();
  evt->add_option("--out,--report", report, "Summary CSV")->required();
  evt->add_option("--plot-data,--plot", plot, "Token-count comparison CSV")->required();
  evt->add_option("--reference", reference,
                  "Name the reduction column is relative to (default: first baseline, else bytes)");
  evt->add_option("--repetitions", repetitions, "Timing repetitions (median)")->capture_default_str();

  // pack
  std::size_t shard_tokens = corpus::kDefaultShardTokens;
  auto* pk = subcommand(app, "pack", "Pack documents into binary token shards", common);
  pk->add_option("--in", in, "Input CSV")->required();
  pk->add_option("--vocab", vocab, "Vocabulary file")->required();
  pk->add_option("--out-dir", out, "Shard directory")->required();
  pk->add_option("--shard-tokens", shard_tokens, "Tokens per shard")->capture_default_str();

  // stats
  auto* st = subcommand(app, "stats", "Per-category row, byte and token counts", common);
  st->add_option("--in", in, "Input CSV")->required();
  st->add_option("--vocab", vocab, "Vocabulary file for token counts");
  st->add_option("--out", out, "Stats CSV (default: stdout)");

  // split
  corpus::SplitSpec split_spec;
  auto* sp = subcommand(app, "split", "Assign shards to train and validation", common);
  sp->add_option("--shards", in, "Shard directory")->required();
  sp->add_option("--val-fraction", split_spec.val_fraction, "Validation fraction")
      ->check(CLI::Range(0.0, 0.999999));
  sp->add_option("--seed", split_spec.seed, "Shuffle seed")->capture_default_str();
  sp->add_option("--out", out, "Assignment CSV (default: stdout)");

  // schedule
  std::string plan_name = "pretrain";
  int points = 101;
  std::optional<double> at;
  auto* sch = subcommand(app, "schedule", "Learning-rate schedule table", common);
  sch->add_option("--plan", plan_name, "Plan preset or file")->capture_default_str();
  sch->add_option("--points", points, "Rows in the table")->capture_default_str();
  sch->add_option("--at,--at-tokens", at, "Print the rate at this many tokens instead");
  std::string dump = "csv";
  sch->add_option("--dump", dump, "Curve format")->check(CLI::IsMember({"csv"}));
  sch->add_option("--out", out, "CSV (default: stdout)");

  // budget
  std::string shape_name = "urdulm-100m-32k", hw_name = "table3";
  double prompt_tokens = 12;
  auto* bud = subcommand(app, "budget", "Compute, time, energy and carbon estimates", common);
  bud->add_option("--shape", shape_name, "Model shape preset or file")->capture_default_str();
  bud->add_option("--plan", plan_name, "Plan preset or file")->capture_default_str();
  bud->add_option("--hardware,--hw", hw_name, "Hardware preset or file")->capture_default_str();
  bud->add_option("--prompt-tokens", prompt_tokens, "Prompt length for inference figures")
      ->capture_default_str();
  bud->add_option("--out", out, "Report (default: stdout)");

  // eval-metrics
  std::string task_name, gold, shots, template_path, prompts_out;
  std::vector<std::string> preds;
  int runs = 5;
  int k = 5;
  auto* em = subcommand(app, "eval-metrics", "Score model predictions or build few-shot prompts",
                        common);
  em->add_option("--task", task_name, "sc, gec, qa-c or qa-nc")->required();
  em->add_option("--gold", gold, "Task CSV")->required();
  em->add_option("--pred", preds, "Predictions file, one per run");
  em->add_option("--runs", runs, "Expected number of runs")->capture_default_str();
  em->add_option("--out", out, "Scores CSV (default: stdout)");
  em->add_option("--shots", shots, "CSV of solved examples for prompts");
  em->add_option("--k", k, "Shots per prompt")->capture_default_str();
  em->add_option("--template", template_path, "Prompt template file");
  em->add_option("--prompts-out", prompts_out, "Write one JSON prompt per gold row");

  // pipeline / validate-config
  std::string config;
  auto* pl = subcommand(app, "pipeline", "Run all configured stages", common);
  pl->add_option("--config", config, "Pipeline config")->required();
  auto* vc = subcommand(app, "validate-config", "Check a pipeline config", common);
  vc->add_option("config", config, "Pipeline config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  set_max_threads(static_cast<unsigned>(common.threads));

  if (clean->parsed()) {
    normalize::CleanConfig cfg;
    cfg.remove_english = remove_english;
    cfg.map_arabic_indic_digits = !no_arabic_indic;
    if (!noise.empty()) {
      cfg.noise_patterns.clear();
      for (const auto& n : noise) {
        const auto p = normalize::parse_noise_pattern(n);
        if (!p) throw Error(Errc::config, "unknown noise pattern `" + n + "`");
        cfg.noise_patterns.push_back(*p);
      }
    }
    if (!char_map.empty()) cfg.char_map = normalize::load_char_map(char_map);
    if (!word_space_map.empty()) cfg.word_space_map = normalize::load_word_space_map(word_space_map);
    log_outcome("clean", stages::clean(in, out, cfg, report));
  } else if (dd->parsed()) {
    log_outcome("dedup", stages::dedup(in, out, kept, decisions, review, dp));
  } else if (train->parsed()) {
    log_outcome("train-tokenizer", stages::train_tokenizer(inputs, vocab_size, out));
  } else if (enc->parsed()) {
    const Tokenizer tok(load_vocab(vocab));
    std::string result;
    for (const auto& line : split_lines(read_input(in))) {
      const auto ids = tok.encode(line);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) result.push_back(' ');
        result += std::to_string(ids[i]);
      }
      result.push_back('\n');
    }
    emit(out, result);
  } else if (dec->parsed()) {
    const Tokenizer tok(load_vocab(vocab), "<|endoftext|>");
    std::string result;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(read_input(in))) {
      ++line_no;
      std::vector<TokenId> ids;
      std::istringstream ls(line);
      std::string field;
      while (ls >> field) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
          v = std::stoul(field, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != field.size()) {
          throw Error(Errc::data, "line " + std::to_string(line_no) + ": bad id `" + field + "`");
        }
        ids.push_back(static_cast<TokenId>(v));
      }
      result += tok.decode(ids);
      result.push_back('\n');
    }
    emit(out, result);
  } else if (evt->parsed()) {
    const auto named = [](const std::string& spec) -> stages::NamedVocab {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) return {std::filesystem::path(spec).stem().string(), spec};
      return {spec.substr(0, eq), spec.substr(eq + 1)};
    };
    std::vector<stages::NamedVocab> vocabs;
    for (const auto& v : named_vocabs) vocabs.push_back(named(v));
    for (const auto& b : baselines) vocabs.push_back(named(b));
    vocabs.push_back({"bytes", ""});
    if (reference.empty()) reference = baselines.empty() ? "bytes" : named(baselines.front()).name;
    std::size_t base = vocabs.size();
    for (std::size_t i = 0; i < vocabs.size(); ++i) {
      if (vocabs[i].name == reference) base = i;
    }
    if (base == vocabs.size()) throw Error(Errc::config, "unknown reference `" + reference + "`");
    log_outcome("eval-tokenizer",
                stages::eval_tokenizer(vocabs, heldout, report, plot, base, repetitions));
  } else if (pk->parsed()) {
    log_outcome("pack", stages::pack(in, vocab, out, shard_tokens));
  } else if (st->parsed()) {
    const auto records = corpus::read_csv(in);
    if (vocab.empty()) {
      emit(out, corpus::corpus_stats(records).to_csv());
    } else {
      const Tokenizer tok(load_vocab(vocab));
      const auto stats = corpus::corpus_stats(records, &tok);
      emit(out, stats.to_csv());
      if (auto bpt = stats.bytes_per_token()) std::cerr << "stats: bytes_per_token=" << *bpt << '\n';
    }
  } else if (sp->parsed()) {
    const auto shard_paths = stages::list_shards(in);
    const auto result = corpus::split(shard_paths.size(), split_spec);
    std::vector<std::string> role(shard_paths.size(), "train");
    for (auto v : result.val) role[v] = "val";
    std::string csv = "shard,split\n";
    for (std::size_t i = 0; i < shard_paths.size(); ++i) {
      csv += std::filesystem::path(shard_paths[i]).filename().string() + "," + role[i] + "\n";
    }
    emit(out, csv);
  } else if (sch->parsed()) {
    const auto plan = budget::load_plan(plan_name);
    budget::validate(plan);
    if (at) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g\n", budget::lr_at(*at, plan));
      emit(out, buf);
    } else {
      emit(out, budget::schedule_csv(plan, points));
    }
  } else if (bud->parsed()) {
    const auto shape = budget::load_shape(shape_name);
    const auto plan = budget::load_plan(plan_name);
    const auto hw = budget::load_hardware(hw_name);
    if (out.empty() || out == "-") {
      std::cout << stages::budget_report(shape, plan, hw, prompt_tokens);
    } else {
      log_outcome("budget", stages::estimate_budget(shape, plan, hw, prompt_tokens, out));
    }
  } else if (em->parsed()) {
    const auto kind = evalmetrics::parse_task_kind(task_name);
    if (!prompts_out.empty()) {
      if (shots.empty()) throw Error(Errc::config, "--prompts-out needs --shots");
      const auto pool = evalmetrics::load_examples(shots, kind);
      if (k < 0 || static_cast<std::size_t>(k) > pool.size()) {
        throw Error(Errc::config, "--k " + std::to_string(k) + " exceeds the " +
                                      std::to_string(pool.size()) + " available shots");
      }
      const auto tmpl = template_path.empty() ? evalmetrics::default_template(kind)
                                              : evalmetrics::load_template(template_path);
      std::string jsonl;
      const auto queries = evalmetrics::load_examples(gold, kind);
      for (std::size_t i = 0; i < queries.size(); ++i) {
        evalmetrics::FewShotTask task;
        task.kind = kind;
        task.shots.assign(pool.begin(), pool.begin() + k);
        task.query = queries[i];
        nlohmann::ordered_json j;
        j["id"] = i;
        j["prompt"] = evalmetrics::build_prompt(task, tmpl);
        jsonl += j.dump() + "\n";
      }
      stages::write_file_atomic(prompts_out, jsonl);
      std::cerr << "eval-metrics: wrote " << queries.size() << " prompts to " << prompts_out << '\n';
      if (preds.empty()) return 0;
    }
    const auto examples = evalmetrics::load_examples(gold, kind);
    const auto table = evalmetrics::evaluate_run(kind, examples, preds, runs);
    emit(out, table.to_csv());
    std::cerr << table.column_label() << ": " << table.formatted_mean() << '\n';
  } else if (pl->parsed()) {
    pipeline::RunOptions opts;
    if (common.threads > 0) opts.threads = common.threads;
    const auto manifest = pipeline::run_pipeline(config, opts);
    for (const auto& s : manifest.stages) log_outcome(s.name, s.outcome);
  } else if (vc->parsed()) {
    const auto diags = pipeline::validate_config(config);
    if (diags.empty()) {
      std::cerr << config << ": ok\n";
      return 0;
    }
    std::cout << format_diagnostics(diags, config);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const lrforge::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
