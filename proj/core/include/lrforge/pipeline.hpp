#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrforge/kv_config.hpp"
#include "lrforge/stages.hpp"

namespace lrforge::pipeline {

// Fixed execution order.
inline constexpr std::array<std::string_view, 9> kStageOrder = {
    "clean", "dedup", "train-tokenizer", "eval-tokenizer", "pack",
    "stats", "schedule", "budget", "eval-metrics"};

KvSchema config_schema();

// Schema problems plus semantic ones (unknown stage or task names, bad
// presets, out-of-range values). Empty iff the file is valid. Throws
// Errc::io only.
std::vector<Diagnostic> validate_config(const std::string& path);

struct FileRecord {
  std::string path;  // relative to the output directory when inside it
  std::string fnv1a64;
  bool deterministic = true;
};

struct StageRecord {
  std::string name;
  std::string status;  // ok | failed
  double seconds = 0;
  stages::StageOutcome outcome;
  std::vector<FileRecord> files;
  std::string error;
};

struct RunManifest {
  std::string tool_version;
  std::string config_path;
  std::string config_hash;
  int threads = 0;
  std::vector<StageRecord> stages;
  bool ok = true;

  std::string to_json() const;
  const StageRecord* stage(std::string_view name) const;
};

struct RunOptions {
  std::optional<int> threads;  // overrides [pipeline] threads
};

// Validates the config and every referenced input path, then runs the
// enabled stages in order. The manifest is written to the output directory
// at the end, or after the failing stage. Throws lrforge::Error; a stage
// failure keeps the stage's error code and names the stage.
RunManifest run_pipeline(const std::string& config_path, const RunOptions& options = {});

}  // namespace lrforge::pipeline
