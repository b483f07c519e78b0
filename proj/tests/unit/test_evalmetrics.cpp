#include <doctest.h>

#include <cmath>
#include <fstream>

#include "lrforge/error.hpp"
#include "lrforge/evalmetrics.hpp"
#include "support.hpp"

using namespace lrforge;
using namespace lrforge::evalmetrics;

namespace {

Tokens toks(std::initializer_list<const char*> words) { return Tokens(words.begin(), words.end()); }

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& l : lines) out << l << '\n';
}

Tokens random_tokens(testsupport::Rng& rng, std::size_t max_len, std::size_t alphabet) {
  Tokens t(rng.below(max_len + 1));
  for (auto& w : t) w = std::string(1, static_cast<char>('a' + rng.below(alphabet)));
  return t;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("task names") {
  CHECK(parse_task_kind("QA_C") == TaskKind::qa_c);
  CHECK(parse_task_kind("qa-nc") == TaskKind::qa_nc);
  CHECK(task_kind_name(TaskKind::gec) == "GEC");
  CHECK(task_metric(TaskKind::sc) == "accuracy");
  CHECK(task_metric(TaskKind::qa_nc) == "rouge_l");
  CHECK_THROWS_AS(parse_task_kind("mt"), Error);
}

TEST_CASE("build_prompt examples") {
  FewShotTask sc{TaskKind::sc, {}, {"", "بہت اچھی فلم", ""}, {"positive", "negative"}};
  const auto tmpl = default_template(TaskKind::sc);
  const auto zero = build_prompt(sc, tmpl);
  CHECK(zero.find("بہت اچھی فلم") != std::string::npos);
  CHECK(zero.find("positive") == std::string::npos);

  for (int i = 0; i < 5; ++i) sc.shots.push_back({"", "مثال " + std::to_string(i), i % 2 ? "negative" : "positive"});
  const auto five = build_prompt(sc, tmpl);
  CHECK(count_of(five, "positive") + count_of(five, "negative") == 5);
  CHECK(build_prompt(sc, tmpl) == five);
  CHECK(five.substr(five.size() - std::string("Sentiment: ").size()) == "Sentiment: ");

  FewShotTask qa{TaskKind::qa_c, {{"سیاق", "سوال", "جواب"}}, {"متن", "کیا؟", ""}, {}};
  const auto with_ctx = build_prompt(qa, default_template(TaskKind::qa_c));
  CHECK(with_ctx.find("سیاق") != std::string::npos);
  CHECK(with_ctx.find("متن") != std::string::npos);
  FewShotTask qnc{TaskKind::qa_nc, {{"", "سوال", "جواب"}}, {"", "کیا؟", ""}, {}};
  CHECK(build_prompt(qnc, default_template(TaskKind::qa_nc)).find("{context}") == std::string::npos);
}

TEST_CASE("build_prompt slot errors") {
  FewShotTask task{TaskKind::gec, {}, {"", "x", ""}, {}};
  auto expect_mismatch = [&](const PromptTemplate& t, TaskKind kind) {
    task.kind = kind;
    try {
      (void)build_prompt(task, t);
      FAIL("expected TemplateSlotMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::template_slot_mismatch);
    }
  };
  expect_mismatch({"", "In: {input}", "\n"}, TaskKind::gec);
  expect_mismatch({"", "{input} {input} {output}", "\n"}, TaskKind::gec);
  expect_mismatch({"", "{context} {input} {output}", "\n"}, TaskKind::qa_nc);
  expect_mismatch({"", "{input} {output}", "\n"}, TaskKind::qa_c);
  expect_mismatch({"", "{input} {answer} {output}", "\n"}, TaskKind::gec);
  expect_mismatch({"{input}", "{input} {output}", "\n"}, TaskKind::gec);

  FewShotTask bad_label{TaskKind::sc, {{"", "t", "neutral"}}, {"", "q", ""}, {"positive", "negative"}};
  CHECK_THROWS_AS(build_prompt(bad_label, default_template(TaskKind::sc)), Error);
}

TEST_CASE("accuracy examples") {
  const std::vector<std::string> gold{"positive", "negative", "positive"};
  CHECK(accuracy(gold, gold) == 100.0);
  const std::vector<std::string> wrong{"negative", "positive", "negative"};
  CHECK(accuracy(wrong, gold) == 0.0);
  const std::vector<std::string> messy{"\n  Positive  \nand more", "NEGATIVE", " positive\r"};
  CHECK(accuracy(messy, gold) == 100.0);

  std::vector<std::string> g(500, "positive"), p(500, "negative");
  for (int i = 0; i < 333; ++i) p[i] = "positive";
  CHECK(accuracy(p, g) == 66.6);

  const std::vector<std::string> two{"a", "b"};
  try {
    (void)accuracy(two, gold);
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::length_mismatch);
  }
}

TEST_CASE("bleu examples") {
  CHECK(bleu(toks({"a", "b", "c", "d", "e"}), {toks({"a", "b", "c", "d", "e"})}) == doctest::Approx(100.0));
  CHECK(bleu(toks({"x", "y"}), {toks({"a", "b", "c"})}) == 0.0);
  const double expected = 100.0 * std::exp(1.0 - 5.0 / 4.0);
  CHECK(bleu(toks({"a", "b", "c", "d"}), {toks({"a", "b", "c", "d", "e"})}) == doctest::Approx(expected));
  CHECK(std::fabs(bleu(toks({"a", "b", "c", "d"}), {toks({"a", "b", "c", "d", "e"})}) - 77.88) <= 0.01);
  CHECK(bleu("a b c d", "a b c d e") == doctest::Approx(expected));
  try {
    (void)bleu(toks({"a"}), {});
    FAIL("expected EmptyReference");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_reference);
  }
  // Trailing whitespace does not matter after tokenization.
  CHECK(bleu("a b c d  \n", "a b c d e") == bleu("a b c d", "a b c d e"));
}

TEST_CASE("rouge_l examples") {
  const auto abc = toks({"a", "b", "c"});
  CHECK(rouge_l(abc, abc) == 1.0);
  CHECK(rouge_l(abc, toks({"x", "y"})) == 0.0);
  CHECK(rouge_l(abc, toks({"a", "c", "d"})) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(rouge_l(Tokens{}, abc) == 0.0);
  CHECK(rouge_l("a b c  ", "a c d") == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("property: metrics agree with oracles") {
  testsupport::Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_tokens(rng, 20, 5);
    const auto b = random_tokens(rng, 20, 5);
    CHECK(lcs_length(a, b) == testsupport::oracle_lcs(a, b));
    const double lcs = double(testsupport::oracle_lcs(a, b));
    const double expected = (a.empty() || b.empty() || lcs == 0)
                                ? 0.0
                                : 2 * (lcs / a.size()) * (lcs / b.size()) / (lcs / a.size() + lcs / b.size());
    CHECK(std::fabs(rouge_l(a, b) - expected) <= 1e-12);
  }
  for (int i = 0; i < 100; ++i) {
    std::vector<Tokens> hyps;
    std::vector<std::vector<Tokens>> refs;
    const auto n = 1 + rng.below(4);
    for (std::uint64_t k = 0; k < n; ++k) {
      hyps.push_back(random_tokens(rng, 12, 4));
      std::vector<Tokens> r;
      const auto nr = 1 + rng.below(3);
      for (std::uint64_t m = 0; m < nr; ++m) {
        auto ref = random_tokens(rng, 12, 4);
        if (ref.empty()) ref.push_back("a");
        r.push_back(ref);
      }
      refs.push_back(r);
    }
    CHECK(std::fabs(corpus_bleu(hyps, refs) - testsupport::oracle_bleu(hyps, refs)) <= 1e-9);
  }
}

TEST_CASE("property: identical inputs score maximal") {
  testsupport::Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    auto t = random_tokens(rng, 15, 6);
    if (t.empty()) t.push_back("z");
    CHECK(rouge_l(t, t) == 1.0);
    CHECK(bleu(t, {t}) == doctest::Approx(100.0));
    const std::vector<std::string> labels(t.begin(), t.end());
    CHECK(accuracy(labels, labels) == 100.0);
  }
}

TEST_CASE("evaluate_run examples") {
  const auto dir = testsupport::temp_dir("evalrun");
  std::vector<Example> gold;
  for (int i = 0; i < 100; ++i) gold.push_back({"", "t" + std::to_string(i), "positive"});
  std::vector<std::string> paths;
  for (int r = 0; r < 5; ++r) {
    std::vector<std::string> lines(100, "negative");
    for (int i = 0; i < 60 + 2 * r; ++i) lines[i] = "positive";
    paths.push_back(dir + "/run" + std::to_string(r) + ".txt");
    write_lines(paths.back(), lines);
  }
  const auto table = evaluate_run(TaskKind::sc, gold, paths);
  REQUIRE(table.per_run.size() == 5);
  CHECK(table.per_run[0].value == 60.0);
  CHECK(table.mean.value == doctest::Approx(64.0));
  CHECK(table.formatted_mean() == "64.0");
  CHECK(table.column_label() == "SC Acc. (%)");
  CHECK(table.to_csv().find("mean") != std::string::npos);

  const std::vector<std::string> same(5, paths[2]);
  CHECK(evaluate_run(TaskKind::sc, gold, same).mean.value == doctest::Approx(64.0));

  const std::vector<std::string> four(paths.begin(), paths.begin() + 4);
  try {
    (void)evaluate_run(TaskKind::sc, gold, four);
    FAIL("expected MissingRun");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_run);
  }
  auto absent = paths;
  absent[3] = dir + "/nope.txt";
  try {
    (void)evaluate_run(TaskKind::sc, gold, absent);
    FAIL("expected MissingRun");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_run);
    CHECK(std::string(e.what()).find("nope.txt") != std::string::npos);
  }
}

TEST_CASE("task and prediction files") {
  const auto dir = testsupport::temp_dir("evalfiles");
  {
    std::ofstream(dir + "/qa.csv") << "context,question,answer\n\"پس منظر، متن\",سوال؟,جواب\n";
  }
  const auto qa = load_examples(dir + "/qa.csv", TaskKind::qa_c);
  REQUIRE(qa.size() == 1);
  CHECK(qa[0].context == "پس منظر، متن");
  CHECK(qa[0].output == "جواب");
  CHECK_THROWS_AS(load_examples(dir + "/qa.csv", TaskKind::sc), Error);
  {
    std::ofstream(dir + "/p.txt") << "one\r\ntwo\n";
  }
  CHECK(load_predictions(dir + "/p.txt") == std::vector<std::string>{"one", "two"});
  const std::vector<std::string> preds{"جواب"};
  CHECK(score(TaskKind::qa_c, qa, preds).value == 1.0);
}
