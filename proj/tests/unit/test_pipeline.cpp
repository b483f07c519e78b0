#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>
#include <sys/wait.h>

#include "lrforge/corpus.hpp"
#include "lrforge/error.hpp"
#include "lrforge/hash.hpp"
#include "lrforge/pipeline.hpp"
#include "lrforge/stages.hpp"
#include "lrforge/tokenizer.hpp"
#include "support.hpp"

using namespace lrforge;
namespace fs = std::filesystem;

namespace {

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

// Exit status of the command-line tool with the given arguments.
int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + LRFORGE_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> digests(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = file_digest(e.path().string());
  }
  return out;
}

}  // namespace

TEST_CASE("validate_config diagnostics") {
  const auto dir = testsupport::temp_dir("validate");
  const auto good = testsupport::write_pipeline_fixture(dir);
  CHECK(pipeline::validate_config(good).empty());

  write_text(dir + "/typo.cfg", "[pipeline]\ninput = docs.csv\noutput_dir = out\n\n[dedup]\nthreshhold = 0.9\n");
  const auto typo = pipeline::validate_config(dir + "/typo.cfg");
  REQUIRE(typo.size() == 1);
  CHECK(typo[0].line == 6);
  CHECK(typo[0].message.find("threshhold") != std::string::npos);

  write_text(dir + "/type.cfg", "[pipeline]\ninput = docs.csv\noutput_dir = out\n[pack]\nshard_tokens = lots\n");
  const auto type = pipeline::validate_config(dir + "/type.cfg");
  REQUIRE(type.size() == 1);
  CHECK(type[0].line == 5);

  write_text(dir + "/missing.cfg", "[pipeline]\noutput_dir = out\n");
  CHECK(pipeline::validate_config(dir + "/missing.cfg").size() == 1);

  write_text(dir + "/semantic.cfg",
             "[pipeline]\ninput = docs.csv\noutput_dir = out\nstages = clean, tokenize\n"
             "[dedup]\nthreshold = 1.5\n");
  CHECK(pipeline::validate_config(dir + "/semantic.cfg").size() == 2);

  try {
    (void)pipeline::validate_config(dir + "/absent.cfg");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}

TEST_CASE("missing input fails before any stage runs") {
  const auto dir = testsupport::temp_dir("missing_input");
  const auto config = testsupport::write_pipeline_fixture(dir);
  fs::remove(dir + "/sc.csv");
  try {
    (void)pipeline::run_pipeline(config);
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
    CHECK(e.exit_code() == 2);
  }
  CHECK_FALSE(fs::exists(dir + "/out/cleaned.csv"));
  CHECK(cli("pipeline --config \"" + config + "\"") == 2);
}

TEST_CASE("full pipeline on the 100-document fixture") {
  const auto dir = testsupport::temp_dir("pipeline");
  const auto config = testsupport::write_pipeline_fixture(dir);
  REQUIRE(corpus::read_csv(dir + "/docs.csv").size() == 100);
  const auto manifest = pipeline::run_pipeline(config);
  CHECK(manifest.ok);
  REQUIRE(manifest.stages.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(manifest.stages[i].name == pipeline::kStageOrder[i]);
    CHECK(manifest.stages[i].status == "ok");
  }
  const auto json = nlohmann::json::parse(read_all(dir + "/out/manifest.json"));
  CHECK(json["stages"].size() == 9);
  CHECK(json["config_fnv1a64"] == file_digest(config));

  // Dedup removed the planted copies.
  const auto deduped = corpus::read_csv(dir + "/out/deduped.csv");
  CHECK(deduped.size() <= 88);

  // Manifest token count equals the conservation identity.
  const auto tok = Tokenizer(load_vocab(dir + "/out/vocab.txt"));
  std::size_t expected = deduped.size();
  for (const auto& r : deduped) expected += tok.count_tokens(r.data);
  std::size_t packed = 0;
  for (const auto& path : stages::list_shards(dir + "/out/shards")) packed += corpus::read_shard(path).tokens.size();
  CHECK(packed == expected);
  bool found = false;
  for (const auto& [k, v] : manifest.stage("pack")->outcome.counts) {
    if (k == "tokens") {
      CHECK(v == expected);
      found = true;
    }
  }
  CHECK(found);

  // A second run into a fresh directory produces identical artifacts.
  const auto dir2 = testsupport::temp_dir("pipeline_rerun");
  const auto config2 = testsupport::write_pipeline_fixture(dir2);
  (void)pipeline::run_pipeline(config2);
  auto a = digests(dir + "/out");
  auto b = digests(dir2 + "/out");
  for (const auto& stage : json["stages"]) {
    for (const auto& f : stage["outputs"]) {
      if (f["deterministic"].get<bool>()) continue;
      a.erase(f["path"].get<std::string>());
      b.erase(f["path"].get<std::string>());
    }
  }
  a.erase("manifest.json");
  b.erase("manifest.json");
  CHECK(a.size() >= 15);
  CHECK(a == b);
}

TEST_CASE("stage failure names the stage and writes a partial manifest") {
  const auto dir = testsupport::temp_dir("pipeline_fail");
  const auto config = testsupport::write_pipeline_fixture(dir);
  write_text(dir + "/sc.csv", "wrong,header\nx,y\n");
  try {
    (void)pipeline::run_pipeline(config);
    FAIL("expected BadHeader");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_header);
    CHECK(std::string(e.what()).find("eval-metrics") != std::string::npos);
  }
  const auto json = nlohmann::json::parse(read_all(dir + "/out/manifest.json"));
  CHECK(json["status"] == "failed");
  CHECK(json["stages"].back()["status"] == "failed");
}

TEST_CASE("command-line exit codes") {
  const auto dir = testsupport::temp_dir("cli");
  const auto config = testsupport::write_pipeline_fixture(dir);
  CHECK(cli("--version") == 0);
  CHECK(cli("clean --help") == 0);
  CHECK(cli("no-such-command") == 1);
  CHECK(cli("validate-config \"" + config + "\"") == 0);
  write_text(dir + "/bad.cfg", "[pipeline]\ninput = x\n");
  CHECK(cli("validate-config \"" + dir + "/bad.cfg\"") == 1);
  CHECK(cli("clean --in \"" + dir + "/nope.csv\" --out \"" + dir + "/o.csv\"") == 2);
  write_text(dir + "/broken.csv", "data,source,category\n\"unterminated,a,b\n");
  CHECK(cli("clean --in \"" + dir + "/broken.csv\" --out \"" + dir + "/o.csv\"") == 3);
  CHECK(cli("schedule --at-tokens 6e9") == 3);
  CHECK(cli("budget --hw table3 --plan pretrain") == 0);
  CHECK(cli("budget --hw nowhere") == 1);

  CHECK(cli("train-tokenizer --in \"" + dir + "/docs.csv\" --vocab-size 300 --out \"" + dir + "/v.txt\"") == 0);
  write_text(dir + "/text.txt", "اردو زبان۔\nسال ۲۰۲۴\n");
  CHECK(cli("encode --vocab \"" + dir + "/v.txt\" --in \"" + dir + "/text.txt\" --out \"" + dir + "/ids.txt\"") == 0);
  CHECK(cli("decode --vocab \"" + dir + "/v.txt\" --in \"" + dir + "/ids.txt\" --out \"" + dir + "/back.txt\"") == 0);
  CHECK(read_all(dir + "/back.txt") == read_all(dir + "/text.txt"));
  write_text(dir + "/bad_ids.txt", "1 2 999999\n");
  CHECK(cli("decode --vocab \"" + dir + "/v.txt\" --in \"" + dir + "/bad_ids.txt\"") == 3);
  CHECK(cli("eval-metrics --task sc --gold \"" + dir + "/sc.csv\" --pred \"" + dir + "/pred1.txt\"") == 2);
}
