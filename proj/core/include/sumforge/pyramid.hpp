#pragma once

#include "sumforge/jsonl.hpp"
#include "sumforge/record.hpp"
#include "sumforge/textcore.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sumforge {

// How source documents are divided between the extractive and abstractive
// generators.
//   kSplit:          disjoint ed_ratio : ad_ratio partition (default 8:2)
//   kFixedPool:      disjoint partition with a fraction tau going to AD
//   kIncreasingPool: every document feeds ED; a fraction sigma also feeds AD
enum class PoolMode { kSplit, kFixedPool, kIncreasingPool };

struct PyramidConfig {
  PoolMode mode = PoolMode::kSplit;
  double ed_ratio = 0.8;
  double ad_ratio = 0.2;
  double ad_fraction_tau = 0.2;
  double ad_fraction_sigma = 1.0;
  std::uint64_t seed = 1;

  // kInvalidConfig when ratios are out of range or do not sum to 1.
  void validate() const;
};

ordered_json to_json(const PyramidConfig& config);
PyramidConfig pyramid_config_from_json(const ordered_json& obj);

struct SplitResult {
  std::vector<DocInput> ed_source;
  std::vector<DocInput> ad_source;
  std::size_t duplicates_removed = 0;
};

// Deduplicates by id (first occurrence wins), shuffles with a seeded
// Fisher-Yates pass and partitions. Each side keeps the input order.
// kEmptyCorpus when nothing remains.
SplitResult split_corpus(const std::vector<DocInput>& corpus, const PyramidConfig& config);

struct TierFile {
  std::string file;
  std::size_t count = 0;
  std::string sha256;
};

struct PyramidManifest {
  std::uint64_t seed = 0;
  std::string tokenizer_id;
  std::string config_digest;
  TierFile ed;
  TierFile ad;
  TierFile hd;

  const TierFile& tier(Tier t) const;
};

ordered_json to_json(const PyramidManifest& manifest);
PyramidManifest pyramid_manifest_from_json(const ordered_json& obj);

struct AssembleOptions {
  Tokenizer tokenizer;
  std::uint64_t seed = 1;
  std::string config_digest;
};

struct AssembleResult {
  PyramidManifest manifest;
  // SHA-256 of the manifest.json bytes.
  std::string manifest_digest;
};

// Validates every record (tier tag matches its slot, token_len equals the
// tokenizer's count, tokenizer ids agree) then writes {ED,AD,HD}.jsonl,
// manifest.json and stats.json under out_dir. Validation happens before any
// file is written.
AssembleResult assemble(const std::vector<SummaryRecord>& ed, const std::vector<SummaryRecord>& ad,
                        const std::vector<SummaryRecord>& hd, const std::filesystem::path& out_dir,
                        const AssembleOptions& options);

std::string tier_file_name(Tier tier);

struct PyramidData {
  PyramidManifest manifest;
  std::vector<SummaryRecord> ed;
  std::vector<SummaryRecord> ad;
  std::vector<SummaryRecord> hd;

  const std::vector<SummaryRecord>& tier(Tier t) const;
};

// Reads manifest.json and the tier files; kCorpusReadError when a recorded
// count or digest does not match the file on disk.
PyramidData load_pyramid(const std::filesystem::path& dir);

struct TierStats {
  std::size_t sample_count = 0;
  std::optional<double> length_mean;
  std::optional<double> length_std;  // sample std; absent below 2 records
};

struct PyramidStats {
  TierStats ed;
  TierStats ad;
  TierStats hd;

  const TierStats& tier(Tier t) const;
};

TierStats tier_stats(const std::vector<SummaryRecord>& records);
PyramidStats stats(const PyramidData& pyramid);
PyramidStats stats(const std::filesystem::path& dir);

ordered_json to_json(const PyramidStats& stats);
// "Tier | Sample Number / Length Mean±std" table, one row per tier.
std::string to_table(const PyramidStats& stats);

// Seeded uniform sample without replacement, input order preserved.
// kInvalidK unless 1 <= k <= hd.size().
std::vector<SummaryRecord> subsample_hd(const std::vector<SummaryRecord>& hd, std::size_t k, std::uint64_t seed);

}  // namespace sumforge
