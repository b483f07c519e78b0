#include "lrforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "lrforge/error.hpp"
#include "lrforge/hash.hpp"
#include "lrforge/parallel.hpp"
#include "lrforge/version.hpp"

namespace lrforge::pipeline {

namespace fs = std::filesystem;

namespace {

int line_of(const KvFile& file, std::string_view section, std::string_view key) {
  for (const auto& e : file.entries) {
    if (e.section == section && e.key == key) return e.line;
  }
  return 0;
}

bool has_section(const KvFile& file, std::string_view section) {
  return std::find(file.sections.begin(), file.sections.end(), section) != file.sections.end();
}

std::optional<std::uint64_t> parse_seed(std::string_view text) {
  std::string s(text);
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used, 0);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<std::string> enabled_stages(const KvSection& p) {
  if (!p.has("stages")) return {kStageOrder.begin(), kStageOrder.end()};
  const auto listed = p.get_list("stages");
  std::vector<std::string> out;
  for (auto name : kStageOrder) {
    if (std::find(listed.begin(), listed.end(), name) != listed.end()) out.emplace_back(name);
  }
  return out;
}

bool is_preset_or(std::string_view kind, const std::string& value) {
  if (kind == "shape") return budget::shape_preset(value).has_value();
  if (kind == "plan") return budget::plan_preset(value).has_value();
  return budget::hardware_preset(value).has_value();
}

// Resolved view of a validated config.
struct Plan {
  fs::path base;
  fs::path out;
  std::vector<std::string> stages;
  KvFile file;

  KvSection section(std::string_view name) const { return KvSection(file, name); }
  bool enabled(std::string_view name) const {
    return std::find(stages.begin(), stages.end(), name) != stages.end();
  }
  std::string resolve(const std::string& p) const {
    if (p.empty()) return p;
    const fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal().string();
  }
  std::string output(const std::string& name) const { return (out / name).string(); }
};

std::string relative_to(const std::string& path, const fs::path& root) {
  const auto rel = fs::path(path).lexically_relative(root);
  if (rel.empty() || *rel.begin() == "..") return path;
  return rel.generic_string();
}

}  // namespace

KvSchema config_schema() {
  KvSchema s;
  s.sections["pipeline"] = {{"input", KvType::string, true},
                            {"output_dir", KvType::string, true},
                            {"threads", KvType::integer},
                            {"stages", KvType::list},
                            {"vocab", KvType::string}};
  s.sections["clean"] = {{"remove_english", KvType::boolean},
                         {"noise_patterns", KvType::list},
                         {"char_map", KvType::string},
                         {"word_space_map", KvType::string},
                         {"map_arabic_indic_digits", KvType::boolean}};
  s.sections["dedup"] = {{"threshold", KvType::number},   {"num_perm", KvType::integer},
                         {"bands", KvType::integer},      {"rows", KvType::integer},
                         {"shingle_k", KvType::integer},  {"hash_seed", KvType::string},
                         {"exact_verify", KvType::boolean}, {"review_low", KvType::number},
                         {"review_high", KvType::number}};
  s.sections["train-tokenizer"] = {{"vocab_size", KvType::integer}};
  s.sections["eval-tokenizer"] = {{"heldout", KvType::string},
                                  {"compare", KvType::list},
                                  {"baseline", KvType::string},
                                  {"repetitions", KvType::integer}};
  s.sections["pack"] = {{"shard_tokens", KvType::integer},
                        {"val_fraction", KvType::number},
                        {"split_seed", KvType::string}};
  s.sections["stats"] = {{"with_tokens", KvType::boolean}};
  s.sections["schedule"] = {{"plan", KvType::string}, {"points", KvType::integer}};
  s.sections["budget"] = {{"shape", KvType::string},
                          {"plan", KvType::string},
                          {"hardware", KvType::string},
                          {"prompt_tokens", KvType::number}};
  s.sections["eval-metrics"] = {{"task", KvType::string, true},
                                {"gold", KvType::string, true},
                                {"predictions", KvType::list, true},
                                {"runs", KvType::integer}};
  return s;
}

namespace {

std::vector<Diagnostic> semantic_checks(const KvFile& file, const fs::path& base) {
  std::vector<Diagnostic> d;
  const auto add = [&](std::string_view section, std::string_view key, std::string msg) {
    d.push_back({line_of(file, section, key), std::move(msg)});
  };
  const KvSection p(file, "pipeline");
  if (!has_section(file, "pipeline")) d.push_back({0, "missing [pipeline] section"});

  if (p.has("stages")) {
    for (const auto& name : p.get_list("stages")) {
      if (std::find(kStageOrder.begin(), kStageOrder.end(), name) == kStageOrder.end()) {
        add("pipeline", "stages", "unknown stage `" + name + "`");
      }
    }
  }
  if (p.has("threads") && p.get_integer("threads", 1) < 0) {
    add("pipeline", "threads", "threads must be >= 0");
  }
  const auto stages = enabled_stages(p);
  const auto on = [&](std::string_view s) {
    return std::find(stages.begin(), stages.end(), s) != stages.end();
  };
  const bool has_vocab = on("train-tokenizer") || p.has("vocab");
  for (std::string_view s : {"eval-tokenizer", "pack"}) {
    if (on(s) && !has_vocab) {
      add("pipeline", "stages",
          "stage " + std::string(s) + " needs train-tokenizer or [pipeline] vocab");
    }
  }

  const KvSection clean(file, "clean");
  for (const auto& name : clean.get_list("noise_patterns")) {
    if (!normalize::parse_noise_pattern(name)) {
      add("clean", "noise_patterns", "unknown noise pattern `" + name + "`");
    }
  }

  const KvSection dd(file, "dedup");
  const double threshold = dd.get_number("threshold", 0.9);
  if (!(threshold > 0 && threshold <= 1)) add("dedup", "threshold", "threshold must be in (0, 1]");
  const auto bands = dd.get_integer("bands", 16);
  const auto rows = dd.get_integer("rows", 8);
  const auto perms = dd.get_integer("num_perm", 128);
  if (bands < 1 || rows < 1 || bands * rows != perms) {
    add("dedup", "bands", "bands * rows must equal num_perm");
  }
  if (dd.get_integer("shingle_k", 5) < 1) add("dedup", "shingle_k", "shingle_k must be >= 1");
  if (dd.has("hash_seed") && !parse_seed(dd.get_string("hash_seed"))) {
    add("dedup", "hash_seed", "hash_seed must be an unsigned integer");
  }

  const KvSection tt(file, "train-tokenizer");
  if (tt.get_integer("vocab_size", 32000) < 258) {
    add("train-tokenizer", "vocab_size", "vocab_size must be >= 258");
  }

  const KvSection ev(file, "eval-tokenizer");
  if (ev.get_integer("repetitions", 3) < 1) add("eval-tokenizer", "repetitions", "repetitions must be >= 1");

  const KvSection pk(file, "pack");
  if (pk.get_integer("shard_tokens", static_cast<long long>(corpus::kDefaultShardTokens)) < 1) {
    add("pack", "shard_tokens", "shard_tokens must be >= 1");
  }
  const double vf = pk.get_number("val_fraction", 0.0);
  if (!(vf >= 0 && vf < 1)) add("pack", "val_fraction", "val_fraction must be in [0, 1)");
  if (pk.has("split_seed") && !parse_seed(pk.get_string("split_seed"))) {
    add("pack", "split_seed", "split_seed must be an unsigned integer");
  }

  if (KvSection(file, "schedule").get_integer("points", 101) < 2) {
    add("schedule", "points", "points must be >= 2");
  }
  const auto check_ref = [&](std::string_view section, std::string_view key, std::string_view kind,
                             const std::string& fallback) {
    const std::string v = KvSection(file, section).get_string(key, fallback);
    if (is_preset_or(kind, v)) return;
    const fs::path path(v);
    if (path.has_extension() || path.has_parent_path()) return;  // a file, checked before running
    add(section, key, "unknown " + std::string(kind) + " preset `" + v + "`");
  };
  check_ref("schedule", "plan", "plan", "pretrain");
  check_ref("budget", "shape", "shape", "urdulm-100m-32k");
  check_ref("budget", "plan", "plan", "pretrain");
  check_ref("budget", "hardware", "hardware", "table3");

  if (on("eval-metrics")) {
    if (!has_section(file, "eval-metrics")) {
      d.push_back({0, "stage eval-metrics needs an [eval-metrics] section"});
    } else {
      const KvSection em(file, "eval-metrics");
      try {
        evalmetrics::parse_task_kind(em.get_string("task"));
      } catch (const Error&) {
        add("eval-metrics", "task", "unknown task `" + em.get_string("task") + "`");
      }
      const auto runs = em.get_integer("runs", 5);
      if (runs < 1) add("eval-metrics", "runs", "runs must be >= 1");
    }
  }
  (void)base;
  return d;
}

}  // namespace

std::vector<Diagnostic> validate_config(const std::string& path) {
  const KvFile file = read_kv_file(path);
  auto diags = validate(file, config_schema());
  if (!diags.empty()) return diags;
  return semantic_checks(file, fs::path(path).parent_path());
}

const StageRecord* RunManifest::stage(std::string_view name) const {
  for (const auto& s : stages) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "lrforge";
  j["version"] = tool_version;
  j["config"] = config_path;
  j["config_fnv1a64"] = config_hash;
  j["threads"] = threads;
  j["status"] = ok ? "ok" : "failed";
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : stages) {
    nlohmann::ordered_json e;
    e["name"] = s.name;
    e["status"] = s.status;
    e["seconds"] = s.seconds;
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.outcome.counts) counts[k] = v;
    e["counts"] = counts;
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.outcome.values) values[k] = v;
    e["values"] = values;
    auto files = nlohmann::ordered_json::array();
    for (const auto& f : s.files) {
      files.push_back({{"path", f.path}, {"fnv1a64", f.fnv1a64}, {"deterministic", f.deterministic}});
    }
    e["outputs"] = files;
    if (!s.error.empty()) e["error"] = s.error;
    arr.push_back(std::move(e));
  }
  j["stages"] = arr;
  // Fields outside the byte-identical rerun guarantee.
  j["nondeterministic"] = {"seconds", "eval-tokenizer/tokenizer_report.csv:tokens_per_second"};
  return j.dump(2) + "\n";
}

RunManifest run_pipeline(const std::string& config_path, const RunOptions& options) {
  const KvFile file = read_kv_file(config_path);
  {
    auto diags = validate(file, config_schema());
    if (diags.empty()) diags = semantic_checks(file, fs::path(config_path).parent_path());
    if (!diags.empty()) throw Error(Errc::config, format_diagnostics(diags, config_path));
  }

  Plan plan;
  plan.file = file;
  plan.base = fs::path(config_path).parent_path();
  const KvSection p = plan.section("pipeline");
  plan.out = plan.resolve(p.get_string("output_dir"));
  plan.stages = enabled_stages(p);

  // Every referenced input must exist before anything runs.
  std::vector<std::string> inputs = {plan.resolve(p.get_string("input"))};
  if (p.has("vocab")) inputs.push_back(plan.resolve(p.get_string("vocab")));
  const KvSection clean_kv = plan.section("clean");
  for (const char* k : {"char_map", "word_space_map"}) {
    if (clean_kv.has(k)) inputs.push_back(plan.resolve(clean_kv.get_string(k)));
  }
  const KvSection ev_kv = plan.section("eval-tokenizer");
  if (plan.enabled("eval-tokenizer")) {
    if (ev_kv.has("heldout")) inputs.push_back(plan.resolve(ev_kv.get_string("heldout")));
    for (const auto& v : ev_kv.get_list("compare")) inputs.push_back(plan.resolve(v));
  }
  const auto preset_or_file = [&](std::string_view section, std::string_view key,
                                  std::string_view kind, const std::string& fallback) {
    const std::string v = plan.section(section).get_string(key, fallback);
    if (is_preset_or(kind, v)) return v;
    const std::string resolved = plan.resolve(v);
    inputs.push_back(resolved);
    return resolved;
  };
  const std::string schedule_plan = preset_or_file("schedule", "plan", "plan", "pretrain");
  const std::string budget_shape = preset_or_file("budget", "shape", "shape", "urdulm-100m-32k");
  const std::string budget_plan = preset_or_file("budget", "plan", "plan", "pretrain");
  const std::string budget_hw = preset_or_file("budget", "hardware", "hardware", "table3");
  const KvSection em_kv = plan.section("eval-metrics");
  std::vector<std::string> predictions;
  if (plan.enabled("eval-metrics")) {
    inputs.push_back(plan.resolve(em_kv.get_string("gold")));
    for (const auto& pth : em_kv.get_list("predictions")) predictions.push_back(plan.resolve(pth));
    inputs.insert(inputs.end(), predictions.begin(), predictions.end());
  }
  std::vector<std::string> missing;
  for (const auto& in : inputs) {
    if (!fs::exists(in)) missing.push_back(in);
  }
  if (!missing.empty()) {
    std::string msg = "missing input";
    for (const auto& m : missing) msg += " " + m;
    throw Error(Errc::io, msg);
  }

  const int threads = options.threads.value_or(static_cast<int>(p.get_integer("threads", 0)));
  set_max_threads(static_cast<unsigned>(std::max(threads, 0)));

  RunManifest manifest;
  manifest.tool_version = std::string(kVersion);
  manifest.config_path = config_path;
  manifest.config_hash = file_digest(config_path);
  manifest.threads = static_cast<int>(max_threads());
  fs::create_directories(plan.out);

  std::string corpus_path = inputs.front();
  std::string vocab_path = p.has("vocab") ? plan.resolve(p.get_string("vocab")) : std::string{};

  const auto run_stage = [&](std::string_view name, auto&& body) {
    StageRecord rec;
    rec.name = std::string(name);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      rec.outcome = body();
      rec.status = "ok";
    } catch (const Error& e) {
      rec.status = "failed";
      rec.error = e.what();
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      manifest.stages.push_back(std::move(rec));
      manifest.ok = false;
      stages::write_file_atomic(plan.output("manifest.json"), manifest.to_json());
      throw Error(e.code(), "stage " + std::string(name) + ": " + e.detail());
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.error = e.what();
      manifest.stages.push_back(std::move(rec));
      manifest.ok = false;
      stages::write_file_atomic(plan.output("manifest.json"), manifest.to_json());
      throw Error(Errc::data, "stage " + std::string(name) + ": " + e.what());
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& f : rec.outcome.files) {
      rec.files.push_back({relative_to(f.path, plan.out), file_digest(f.path), f.deterministic});
    }
    manifest.stages.push_back(std::move(rec));
  };

  for (const auto& name : plan.stages) {
    if (name == "clean") {
      run_stage(name, [&] {
        normalize::CleanConfig cfg;
        cfg.remove_english = clean_kv.get_bool("remove_english", cfg.remove_english);
        cfg.map_arabic_indic_digits =
            clean_kv.get_bool("map_arabic_indic_digits", cfg.map_arabic_indic_digits);
        if (clean_kv.has("noise_patterns")) {
          cfg.noise_patterns.clear();
          for (const auto& n : clean_kv.get_list("noise_patterns")) {
            cfg.noise_patterns.push_back(*normalize::parse_noise_pattern(n));
          }
        }
        if (clean_kv.has("char_map")) {
          cfg.char_map = normalize::load_char_map(plan.resolve(clean_kv.get_string("char_map")));
        }
        if (clean_kv.has("word_space_map")) {
          cfg.word_space_map =
              normalize::load_word_space_map(plan.resolve(clean_kv.get_string("word_space_map")));
        }
        auto out = stages::clean(corpus_path, plan.output("cleaned.csv"), cfg,
                                 plan.output("clean_report.json"));
        corpus_path = plan.output("cleaned.csv");
        return out;
      });
    } else if (name == "dedup") {
      run_stage(name, [&] {
        const KvSection kv = plan.section("dedup");
        dedup::DedupParams params;
        params.threshold = kv.get_number("threshold", params.threshold);
        params.num_perms = static_cast<std::size_t>(kv.get_integer("num_perm", 128));
        params.bands = static_cast<std::size_t>(kv.get_integer("bands", 16));
        params.rows = static_cast<std::size_t>(kv.get_integer("rows", 8));
        params.shingle_k = static_cast<std::size_t>(kv.get_integer("shingle_k", 5));
        if (kv.has("hash_seed")) params.hash_seed = *parse_seed(kv.get_string("hash_seed"));
        params.exact_verify = kv.get_bool("exact_verify", params.exact_verify);
        params.review_low = kv.get_number("review_low", params.review_low);
        params.review_high = kv.get_number("review_high", params.review_high);
        auto out = stages::dedup(corpus_path, plan.output("deduped.csv"), plan.output("kept.txt"),
                                 plan.output("dedup_decisions.csv"), plan.output("dedup_review.csv"),
                                 params);
        corpus_path = plan.output("deduped.csv");
        return out;
      });
    } else if (name == "train-tokenizer") {
      run_stage(name, [&] {
        const auto size = plan.section("train-tokenizer").get_integer("vocab_size", 32000);
        auto out = stages::train_tokenizer({corpus_path}, static_cast<std::size_t>(size),
                                           plan.output("vocab.txt"));
        vocab_path = plan.output("vocab.txt");
        return out;
      });
    } else if (name == "eval-tokenizer") {
      run_stage(name, [&] {
        std::vector<stages::NamedVocab> vocabs = {{"bytes", ""}, {"trained", vocab_path}};
        for (const auto& v : ev_kv.get_list("compare")) {
          vocabs.push_back({fs::path(v).stem().string(), plan.resolve(v)});
        }
        const std::string baseline = ev_kv.get_string("baseline", "bytes");
        std::size_t base_index = vocabs.size();
        for (std::size_t i = 0; i < vocabs.size(); ++i) {
          if (vocabs[i].name == baseline) base_index = i;
        }
        if (base_index == vocabs.size()) {
          throw Error(Errc::config, "baseline `" + baseline + "` is not among the compared tokenizers");
        }
        const std::string heldout =
            ev_kv.has("heldout") ? plan.resolve(ev_kv.get_string("heldout")) : corpus_path;
        return stages::eval_tokenizer(vocabs, heldout, plan.output("tokenizer_report.csv"),
                                      plan.output("tokenizer_plot.csv"), base_index,
                                      static_cast<int>(ev_kv.get_integer("repetitions", 3)));
      });
    } else if (name == "pack") {
      run_stage(name, [&] {
        const KvSection kv = plan.section("pack");
        auto out = stages::pack(
            corpus_path, vocab_path, plan.output("shards"),
            static_cast<std::size_t>(kv.get_integer(
                "shard_tokens", static_cast<long long>(corpus::kDefaultShardTokens))));
        corpus::SplitSpec spec;
        spec.val_fraction = kv.get_number("val_fraction", 0.0);
        if (kv.has("split_seed")) spec.seed = *parse_seed(kv.get_string("split_seed"));
        const auto sp = stages::split(plan.output("shards"), spec, plan.output("split.csv"));
        out.counts.insert(out.counts.end(), sp.counts.begin(), sp.counts.end());
        out.files.insert(out.files.end(), sp.files.begin(), sp.files.end());
        return out;
      });
    } else if (name == "stats") {
      run_stage(name, [&] {
        const bool with_tokens = plan.section("stats").get_bool("with_tokens", true);
        return stages::stats(corpus_path, with_tokens ? vocab_path : std::string{},
                             plan.output("stats.csv"));
      });
    } else if (name == "schedule") {
      run_stage(name, [&] {
        return stages::schedule(budget::load_plan(schedule_plan),
                                static_cast<int>(plan.section("schedule").get_integer("points", 101)),
                                plan.output("schedule.csv"));
      });
    } else if (name == "budget") {
      run_stage(name, [&] {
        return stages::estimate_budget(
            budget::load_shape(budget_shape), budget::load_plan(budget_plan),
            budget::load_hardware(budget_hw),
            plan.section("budget").get_number("prompt_tokens", 12.0), plan.output("budget.txt"));
      });
    } else if (name == "eval-metrics") {
      run_stage(name, [&] {
        return stages::eval_metrics(evalmetrics::parse_task_kind(em_kv.get_string("task")),
                                    plan.resolve(em_kv.get_string("gold")), predictions,
                                    static_cast<int>(em_kv.get_integer("runs", 5)),
                                    plan.output("scores.csv"));
      });
    }
  }

  stages::write_file_atomic(plan.output("manifest.json"), manifest.to_json());
  return manifest;
}

}  // namespace lrforge::pipeline
