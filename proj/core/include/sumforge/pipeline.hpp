#pragma once

#include "sumforge/gsg.hpp"
#include "sumforge/hft.hpp"
#include "sumforge/jsonl.hpp"
#include "sumforge/llm.hpp"
#include "sumforge/pyramid.hpp"
#include "sumforge/resample.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sumforge {

// Everything the one-shot pipeline needs. Relative paths in the JSON form
// are resolved against the config file's directory.
struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path hd;
  std::optional<std::filesystem::path> vocabulary;  // word tokenizer when unset
  std::uint64_t seed = 1;
  PyramidConfig pyramid;
  GsgOptions gsg;
  PromptSpec prompt;
  bool word_num_from_hd = true;  // word_num = round(HD mean) unless set
  BackendConfig llm;
  bool resample_ed = true;
  bool resample_ad = true;
  std::optional<std::size_t> hd_k;
  PlanOverrides plan;
  unsigned jobs = 0;
};

PipelineConfig pipeline_config_from_json(const ordered_json& obj, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Snapshot written next to the outputs: the effective settings with input
// files named by base name and SHA-256 instead of absolute paths.
ordered_json config_snapshot(const PipelineConfig& config);

Tokenizer make_tokenizer(const std::optional<std::filesystem::path>& vocabulary);

struct PipelineResult {
  std::filesystem::path run_dir;
  std::string config_digest;
  // Relative path -> SHA-256 for every artifact except caches and logs.
  std::map<std::string, std::string> digests;
  PyramidStats stats;
  LengthModel length_model;
};

using PhaseLogger = std::function<void(std::string_view phase, std::string_view message)>;

// split -> ED extract -> AD generate -> fit -> resample -> assemble -> stats
// -> plan, all under run_dir. On the first failing phase a FAILED marker
// naming the phase is written and the error is rethrown; earlier outputs
// stay in place.
PipelineResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& run_dir,
                            const PhaseLogger& log = nullptr);

// Digests of all files under run_dir except cache/, *.log, FAILED and
// digests.json itself, keyed by generic relative path.
std::map<std::string, std::string> digest_tree(const std::filesystem::path& run_dir);

}  // namespace sumforge
