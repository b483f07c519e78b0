#include "lrforge/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "lrforge/csv.hpp"
#include "lrforge/error.hpp"
#include "lrforge/kv_config.hpp"
#include "lrforge/normalize.hpp"
#include "lrforge/utf8.hpp"

namespace lrforge::evalmetrics {

namespace {

constexpr double kZeroPrecision = 1e-9;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string_view trim(std::string_view s) {
  std::size_t begin = std::string_view::npos;
  std::size_t end = 0;
  std::size_t pos = 0;
  char32_t cp = 0;
  while (pos < s.size()) {
    const std::size_t at = pos;
    if (utf8::next(s, pos, cp) && utf8::is_space(cp)) continue;
    if (begin == std::string_view::npos) begin = at;
    end = pos;
  }
  return begin == std::string_view::npos ? std::string_view{} : s.substr(begin, end - begin);
}

struct Slots {
  int input = 0;
  int output = 0;
  int context = 0;
  std::vector<std::string> unknown;
};

Slots scan_slots(std::string_view text) {
  Slots s;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    const std::size_t close = text.find('}', i + 1);
    if (close == std::string_view::npos) break;
    const std::string_view name = text.substr(i + 1, close - i - 1);
    const bool ident = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
      return (c >= 'a' && c <= 'z') || c == '_';
    });
    if (!ident) continue;
    if (name == "input") ++s.input;
    else if (name == "output") ++s.output;
    else if (name == "context") ++s.context;
    else s.unknown.emplace_back(name);
    i = close;
  }
  return s;
}

std::string fill(std::string_view text, const Example& ex, bool stop_at_output) {
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '{') {
      const auto rest = text.substr(i);
      if (rest.starts_with("{input}")) {
        out += ex.input;
        i += 7;
        continue;
      }
      if (rest.starts_with("{context}")) {
        out += ex.context;
        i += 9;
        continue;
      }
      if (rest.starts_with("{output}")) {
        if (stop_at_output) return out;
        out += ex.output;
        i += 8;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string ngram_key(const Tokens& toks, std::size_t at, int n) {
  std::string key;
  for (int k = 0; k < n; ++k) {
    if (k) key.push_back('\x1f');
    key += toks[at + static_cast<std::size_t>(k)];
  }
  return key;
}

std::unordered_map<std::string, int> ngram_counts(const Tokens& toks, int n) {
  std::unordered_map<std::string, int> counts;
  const auto un = static_cast<std::size_t>(n);
  if (toks.size() < un) return counts;
  for (std::size_t i = 0; i + un <= toks.size(); ++i) ++counts[ngram_key(toks, i, n)];
  return counts;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TaskKind parse_task_kind(std::string_view name) {
  std::string n(name);
  for (auto& c : n) {
    if (c == '_') c = '-';
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  if (n == "sc") return TaskKind::sc;
  if (n == "gec") return TaskKind::gec;
  if (n == "qa-c") return TaskKind::qa_c;
  if (n == "qa-nc") return TaskKind::qa_nc;
  throw Error(Errc::config, "unknown task `" + std::string(name) + "` (sc, gec, qa-c, qa-nc)");
}

std::string_view task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::sc: return "SC";
    case TaskKind::gec: return "GEC";
    case TaskKind::qa_c: return "QA-C";
    case TaskKind::qa_nc: return "QA-NC";
  }
  return "?";
}

std::string_view task_metric(TaskKind kind) {
  switch (kind) {
    case TaskKind::sc: return "accuracy";
    case TaskKind::gec: return "bleu";
    default: return "rouge_l";
  }
}

PromptTemplate default_template(TaskKind kind) {
  PromptTemplate t;
  switch (kind) {
    case TaskKind::sc: t.example = "Text: {input}\nSentiment: {output}"; break;
    case TaskKind::gec: t.example = "Incorrect: {input}\nCorrect: {output}"; break;
    case TaskKind::qa_c: t.example = "Context: {context}\nQuestion: {input}\nAnswer: {output}"; break;
    case TaskKind::qa_nc: t.example = "Question: {input}\nAnswer: {output}"; break;
  }
  return t;
}

PromptTemplate load_template(const std::string& path) {
  KvSchema schema;
  schema.sections[""] = {{"header", KvType::string},
                         {"example", KvType::string, true},
                         {"separator", KvType::string}};
  const KvFile file = read_kv_file(path);
  const auto diags = validate(file, schema);
  if (!diags.empty()) throw Error(Errc::config, format_diagnostics(diags, path));
  const KvSection kv(file, "");
  PromptTemplate t;
  t.header = kv.get_text("header");
  t.example = kv.get_text("example");
  t.separator = kv.get_text("separator", t.separator);
  return t;
}

std::string build_prompt(const FewShotTask& task, const PromptTemplate& tmpl) {
  const Slots slots = scan_slots(tmpl.example);
  const bool want_context = task.kind == TaskKind::qa_c;
  std::string problem;
  if (slots.input != 1) problem = "example needs exactly one {input} slot";
  else if (slots.output != 1) problem = "example needs exactly one {output} slot";
  else if (want_context && slots.context != 1) problem = "QA-C example needs one {context} slot";
  else if (!want_context && slots.context != 0) problem = "only QA-C examples take a {context} slot";
  else if (!slots.unknown.empty()) problem = "unknown slot {" + slots.unknown.front() + "}";
  else if (!scan_slots(tmpl.header).unknown.empty() || scan_slots(tmpl.header).input ||
           scan_slots(tmpl.header).output || scan_slots(tmpl.header).context)
    problem = "header must not contain slots";
  if (!problem.empty()) throw Error(Errc::template_slot_mismatch, problem);

  if (task.kind == TaskKind::sc && !task.labels.empty()) {
    for (const auto& shot : task.shots) {
      if (std::find(task.labels.begin(), task.labels.end(), shot.output) == task.labels.end()) {
        throw Error(Errc::data, "shot label `" + shot.output + "` is not in the label set");
      }
    }
  }

  std::string out = tmpl.header;
  for (const auto& shot : task.shots) {
    out += fill(tmpl.example, shot, false);
    out += tmpl.separator;
  }
  out += fill(tmpl.example, task.query, true);
  return out;
}

std::string normalize_label(std::string_view text) {
  std::string_view line;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    line = trim(text.substr(start, nl - start));
    if (!line.empty()) break;
    start = nl + 1;
  }
  std::string out(line);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

double accuracy(std::span<const std::string> predictions, std::span<const std::string> golds) {
  if (predictions.size() != golds.size()) {
    throw Error(Errc::length_mismatch, std::to_string(predictions.size()) + " predictions for " +
                                           std::to_string(golds.size()) + " golds");
  }
  if (golds.empty()) throw Error(Errc::length_mismatch, "no examples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    hits += normalize_label(predictions[i]) == normalize_label(golds[i]);
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(golds.size());
}

Tokens metric_tokens(std::string_view text) {
  static const normalize::CleanConfig config;
  const std::string cleaned = normalize::clean_text(text, config);
  Tokens out;
  std::size_t pos = 0;
  std::size_t start = std::string::npos;
  char32_t cp = 0;
  while (pos < cleaned.size()) {
    const std::size_t at = pos;
    const bool space = utf8::next(cleaned, pos, cp) && utf8::is_space(cp);
    if (space) {
      if (start != std::string::npos) out.push_back(cleaned.substr(start, at - start));
      start = std::string::npos;
    } else if (start == std::string::npos) {
      start = at;
    }
  }
  if (start != std::string::npos) out.push_back(cleaned.substr(start));
  return out;
}

double corpus_bleu(std::span<const Tokens> hypotheses,
                   std::span<const std::vector<Tokens>> references, int max_n) {
  if (hypotheses.size() != references.size()) {
    throw Error(Errc::length_mismatch, std::to_string(hypotheses.size()) + " hypotheses for " +
                                           std::to_string(references.size()) + " reference sets");
  }
  if (max_n < 1) throw Error(Errc::config, "max_n must be >= 1");
  std::vector<double> matches(static_cast<std::size_t>(max_n), 0.0);
  std::vector<double> totals(static_cast<std::size_t>(max_n), 0.0);
  double hyp_len = 0;
  double ref_len = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto& hyp = hypotheses[i];
    const auto& refs = references[i];
    if (refs.empty()) throw Error(Errc::empty_reference, "example " + std::to_string(i));
    std::size_t closest = refs.front().size();
    for (const auto& r : refs) {
      if (r.empty()) throw Error(Errc::empty_reference, "example " + std::to_string(i));
      const auto d = [&](std::size_t len) {
        return len > hyp.size() ? len - hyp.size() : hyp.size() - len;
      };
      if (d(r.size()) < d(closest) || (d(r.size()) == d(closest) && r.size() < closest)) {
        closest = r.size();
      }
    }
    hyp_len += static_cast<double>(hyp.size());
    ref_len += static_cast<double>(closest);
    for (int n = 1; n <= max_n; ++n) {
      const auto hyp_counts = ngram_counts(hyp, n);
      std::unordered_map<std::string, int> max_ref;
      for (const auto& r : refs) {
        for (const auto& [gram, c] : ngram_counts(r, n)) {
          auto& m = max_ref[gram];
          m = std::max(m, c);
        }
      }
      const auto slot = static_cast<std::size_t>(n - 1);
      for (const auto& [gram, c] : hyp_counts) {
        const auto it = max_ref.find(gram);
        if (it != max_ref.end()) matches[slot] += std::min(c, it->second);
        totals[slot] += c;
      }
    }
  }
  if (hyp_len == 0 || matches[0] == 0) return 0.0;
  double log_sum = 0;
  int orders = 0;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    if (totals[k] == 0) continue;
    const double p = matches[k] > 0 ? matches[k] / totals[k] : kZeroPrecision;
    log_sum += std::log(p);
    ++orders;
  }
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_sum / orders);
}

double bleu(const Tokens& hypothesis, const std::vector<Tokens>& references, int max_n) {
  return corpus_bleu(std::span(&hypothesis, 1), std::span(&references, 1), max_n);
}

double bleu(std::string_view hypothesis, std::string_view reference, int max_n) {
  return bleu(metric_tokens(hypothesis), std::vector<Tokens>{metric_tokens(reference)}, max_n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const std::string> hypothesis, std::span<const std::string> reference) {
  if (hypothesis.empty() || reference.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(hypothesis, reference));
  if (lcs == 0) return 0.0;
  const double p = lcs / static_cast<double>(hypothesis.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2 * p * r / (p + r);
}

double rouge_l(std::string_view hypothesis, std::string_view reference) {
  const auto h = metric_tokens(hypothesis);
  const auto r = metric_tokens(reference);
  return rouge_l(std::span<const std::string>(h), std::span<const std::string>(r));
}

MetricScore score(TaskKind kind, std::span<const Example> gold,
                  std::span<const std::string> predictions) {
  if (gold.size() != predictions.size()) {
    throw Error(Errc::length_mismatch, std::to_string(predictions.size()) + " predictions for " +
                                           std::to_string(gold.size()) + " examples");
  }
  MetricScore s;
  s.metric = std::string(task_metric(kind));
  if (kind == TaskKind::sc) {
    std::vector<std::string> golds;
    for (const auto& g : gold) golds.push_back(g.output);
    s.value = accuracy(predictions, golds);
    for (std::size_t i = 0; i < gold.size(); ++i) {
      s.per_example.push_back(normalize_label(predictions[i]) == normalize_label(golds[i]) ? 1.0 : 0.0);
    }
  } else if (kind == TaskKind::gec) {
    std::vector<Tokens> hyps;
    std::vector<std::vector<Tokens>> refs;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      hyps.push_back(metric_tokens(predictions[i]));
      refs.push_back({metric_tokens(gold[i].output)});
    }
    s.value = corpus_bleu(hyps, refs);
  } else {
    for (std::size_t i = 0; i < gold.size(); ++i) {
      s.per_example.push_back(rouge_l(predictions[i], gold[i].output));
    }
    s.value = mean_of(s.per_example);
  }
  return s;
}

std::string RunTable::to_csv() const {
  std::ostringstream out;
  CsvWriter w(out);
  w.write_row({"task", "metric", "run", "score"});
  const std::string task(task_kind_name(kind));
  for (std::size_t i = 0; i < per_run.size(); ++i) {
    w.write_row({task, per_run[i].metric, std::to_string(i + 1), fixed(per_run[i].value, 6)});
  }
  w.write_row({task, mean.metric, "mean", fixed(mean.value, 6)});
  return out.str();
}

std::string RunTable::column_label() const {
  switch (kind) {
    case TaskKind::sc: return "SC Acc. (%)";
    case TaskKind::gec: return "GEC BLEU";
    case TaskKind::qa_c: return "QA-C ROUGE-L";
    case TaskKind::qa_nc: return "QA-NC ROUGE-L";
  }
  return {};
}

std::string RunTable::formatted_mean() const {
  return fixed(mean.value, kind == TaskKind::sc ? 1 : 2);
}

RunTable evaluate_run(TaskKind kind, std::span<const Example> gold,
                      std::span<const std::string> prediction_paths, int runs) {
  if (runs < 1) throw Error(Errc::config, "runs must be >= 1");
  std::vector<std::string> absent;
  for (const auto& p : prediction_paths) {
    if (!std::filesystem::is_regular_file(p)) absent.push_back(p);
  }
  const auto expected = static_cast<std::size_t>(runs);
  if (prediction_paths.size() != expected || !absent.empty()) {
    std::string msg = std::to_string(prediction_paths.size()) + " prediction file(s) for " +
                      std::to_string(runs) + " runs";
    for (std::size_t i = prediction_paths.size(); i < expected; ++i) {
      msg += "; run " + std::to_string(i + 1) + " has no file";
    }
    for (const auto& a : absent) msg += "; missing " + a;
    throw Error(Errc::missing_run, msg);
  }
  RunTable table;
  table.kind = kind;
  for (const auto& p : prediction_paths) {
    table.per_run.push_back(score(kind, gold, load_predictions(p)));
  }
  table.mean.metric = table.per_run.front().metric;
  table.mean.runs = runs;
  std::vector<double> values;
  for (const auto& r : table.per_run) values.push_back(r.value);
  table.mean.value = mean_of(values);
  if (!table.per_run.front().per_example.empty()) {
    table.mean.per_example.assign(gold.size(), 0.0);
    for (const auto& r : table.per_run) {
      for (std::size_t i = 0; i < gold.size(); ++i) table.mean.per_example[i] += r.per_example[i];
    }
    for (auto& v : table.mean.per_example) v /= runs;
  }
  return table;
}

std::vector<Example> load_examples(const std::string& path, TaskKind kind) {
  std::vector<std::string> columns;
  switch (kind) {
    case TaskKind::sc: columns = {"text", "label"}; break;
    case TaskKind::gec: columns = {"source", "target"}; break;
    case TaskKind::qa_c: columns = {"context", "question", "answer"}; break;
    case TaskKind::qa_nc: columns = {"question", "answer"}; break;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw Error(Errc::bad_header, path + ": empty file");
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < fields.size(); ++i) index[fields[i]] = i;
  bool ok = fields.size() == columns.size() && index.size() == columns.size();
  for (const auto& c : columns) ok = ok && index.count(c);
  if (!ok) {
    std::string want;
    for (const auto& c : columns) want += (want.empty() ? "" : ",") + c;
    throw Error(Errc::bad_header, path + ": expected columns " + want);
  }
  const auto col = [&](const std::string& name) { return fields[index.at(name)]; };
  std::vector<Example> out;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != columns.size()) {
      throw Error(Errc::malformed_row, path + ": row " + std::to_string(reader.record_number()) +
                                           " (line " + std::to_string(reader.start_line()) +
                                           ") has " + std::to_string(fields.size()) + " fields");
    }
    Example ex;
    switch (kind) {
      case TaskKind::sc: ex.input = col("text"); ex.output = col("label"); break;
      case TaskKind::gec: ex.input = col("source"); ex.output = col("target"); break;
      case TaskKind::qa_c:
        ex.context = col("context");
        ex.input = col("question");
        ex.output = col("answer");
        break;
      case TaskKind::qa_nc: ex.input = col("question"); ex.output = col("answer"); break;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::string> load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace lrforge::evalmetrics
