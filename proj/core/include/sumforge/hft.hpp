#pragma once

#include "sumforge/jsonl.hpp"
#include "sumforge/pyramid.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sumforge {

enum class StageKind { kGeneric, kPersonalized, kHybrid };
enum class InitFrom { kPretrained, kPreviousStageCheckpoint };

std::string_view to_string(StageKind kind) noexcept;
std::string_view to_string(InitFrom init) noexcept;

// One fine-tuning stage as consumed by an external trainer. Invariants:
//   generic:      tiers within {ED, AD}, init from pretrained
//   personalized: tiers == {HD}
//   hybrid:       tiers == {ED, AD, HD} mixed, init from pretrained
// A personalized stage that follows a generic stage initialises from its
// checkpoint.
struct StageManifest {
  StageKind stage = StageKind::kGeneric;
  std::vector<Tier> data_tiers;
  // Tier files relative to the directory holding the manifest.
  std::vector<std::string> data_files;
  int epochs = 3;
  double learning_rate = 5e-5;
  // Global effective batch; trainers reach it with gradient accumulation.
  int batch_size = 128;
  InitFrom init_from = InitFrom::kPretrained;
  int doc_trunc = 1024;
  int summary_trunc = 128;
  std::uint64_t seed = 1;
  std::string pyramid_manifest_digest;

  // kInvalidConfig when an invariant above does not hold.
  void validate() const;
};

ordered_json to_json(const StageManifest& manifest);
StageManifest stage_manifest_from_json(const ordered_json& obj);
// Canonical serialization; parse(serialize(m)) re-serializes identically.
std::string serialize(const StageManifest& manifest);
std::string manifest_digest(const StageManifest& manifest);

enum class PlanMode { kHierarchical, kHdOnly, kHybrid };

struct PlanOverrides {
  PlanMode mode = PlanMode::kHierarchical;
  std::optional<int> generic_epochs;
  std::optional<int> personalized_epochs;
  std::optional<double> learning_rate;
  std::optional<int> batch_size;
  std::optional<int> doc_trunc;
  std::optional<int> summary_trunc;
  std::optional<std::uint64_t> seed;
};

// Stage manifests in execution order: two for kHierarchical, one for the
// other modes. `data_root` is the directory the manifests will be written
// to; tier file paths are made relative to it. kMissingTier when HD is
// empty or when generic data is required and both ED and AD are empty.
std::vector<StageManifest> plan(const PyramidManifest& pyramid, const std::filesystem::path& pyramid_dir,
                                const std::filesystem::path& data_root, const PlanOverrides& overrides = {});

// Writes stage_<i>_<kind>.json files and plan.json (ordered file list).
std::vector<std::filesystem::path> write_plan(const std::vector<StageManifest>& manifests,
                                              const std::filesystem::path& out_dir);
std::vector<StageManifest> read_plan(const std::filesystem::path& plan_dir);
std::vector<std::filesystem::path> plan_files(const std::filesystem::path& plan_dir);

// Cross-stage checks: a previous_stage_checkpoint init needs a predecessor,
// and a pretrained personalized stage is only allowed as the sole stage.
void validate_plan(const std::vector<StageManifest>& manifests);

struct LedgerEntry {
  std::size_t stage_index = 0;
  StageKind stage = StageKind::kGeneric;
  std::string manifest_digest;
  std::string init;  // "pretrained" or the predecessor's checkpoint id
  std::string checkpoint_id;
  std::string checkpoint_dir;  // relative to the run directory
  double wall_time_s = 0.0;
  int exit_status = 0;
  bool completed = false;
};

struct RunLedger {
  std::vector<LedgerEntry> entries;

  // Latest completed entry for a stage, if any.
  const LedgerEntry* completed_entry(std::size_t stage_index) const;
};

ordered_json to_json(const RunLedger& ledger);
RunLedger run_ledger_from_json(const ordered_json& obj);

struct TrainerCommand {
  // Program and leading arguments; execute() appends
  // --manifest <path> --init <ckpt|pretrained> --out <dir>.
  std::vector<std::string> argv;

  // Whitespace-separated command line (no shell quoting).
  static TrainerCommand parse(std::string_view command_line);
};

struct ExecuteOptions {
  bool resume = false;
};

// Runs the stages listed in plan_dir/plan.json strictly in order, passing
// each manifest's on-disk path to the trainer and persisting ledger.json
// under run_dir after every stage. Raises kTrainerFailure (after recording the failed
// entry) on a nonzero exit and kCheckpointMissing when a successful stage
// leaves no checkpoint.digest. With resume, a stage whose completed ledger
// entry matches the manifest digest and the checkpoint digest on disk is
// skipped.
RunLedger execute(const std::filesystem::path& plan_dir, const TrainerCommand& trainer,
                  const std::filesystem::path& run_dir, const ExecuteOptions& options = {});

}  // namespace sumforge
