#include "sumforge/hft.hpp"

#include "sumforge/digest.hpp"
#include "sumforge/errors.hpp"

#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>

extern char** environ;

namespace sumforge {

namespace fs = std::filesystem;

std::string_view to_string(StageKind kind) noexcept {
  switch (kind) {
    case StageKind::kGeneric:
      return "generic";
    case StageKind::kPersonalized:
      return "personalized";
    case StageKind::kHybrid:
      return "hybrid";
  }
  return "generic";
}

std::string_view to_string(InitFrom init) noexcept {
  return init == InitFrom::kPretrained ? "pretrained" : "previous_stage_checkpoint";
}

namespace {

StageKind parse_stage_kind(const std::string& name) {
  if (name == "generic") return StageKind::kGeneric;
  if (name == "personalized") return StageKind::kPersonalized;
  if (name == "hybrid") return StageKind::kHybrid;
  throw Error(ErrorCode::kInvalidConfig, "unknown stage '" + name + "'");
}

InitFrom parse_init(const std::string& name) {
  if (name == "pretrained") return InitFrom::kPretrained;
  if (name == "previous_stage_checkpoint") return InitFrom::kPreviousStageCheckpoint;
  throw Error(ErrorCode::kInvalidConfig, "unknown init_from '" + name + "'");
}

bool has_tier(const std::vector<Tier>& tiers, Tier t) { return std::find(tiers.begin(), tiers.end(), t) != tiers.end(); }

std::string stage_label(const StageManifest& m) { return std::string(to_string(m.stage)); }

}  // namespace

void StageManifest::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidConfig, stage_label(*this) + " stage: " + why);
  };
  if (epochs <= 0) fail("epochs must be positive");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (batch_size <= 0) fail("batch_size must be positive");
  if (doc_trunc <= 0 || summary_trunc <= 0) fail("truncation lengths must be positive");
  if (data_tiers.empty()) fail("no data tiers");
  if (data_files.size() != data_tiers.size()) fail("data_files and data_tiers differ in length");
  switch (stage) {
    case StageKind::kGeneric:
      if (has_tier(data_tiers, Tier::kHD)) fail("HD data is not allowed");
      if (init_from != InitFrom::kPretrained) fail("must start from the pretrained model");
      break;
    case StageKind::kPersonalized:
      if (data_tiers.size() != 1 || data_tiers[0] != Tier::kHD) fail("data must be exactly HD");
      break;
    case StageKind::kHybrid:
      if (!has_tier(data_tiers, Tier::kHD)) fail("HD data is required");
      if (init_from != InitFrom::kPretrained) fail("must start from the pretrained model");
      break;
  }
}

ordered_json to_json(const StageManifest& m) {
  ordered_json tiers = ordered_json::array();
  for (Tier t : m.data_tiers) tiers.push_back(std::string(to_string(t)));
  return ordered_json{
      {"stage", std::string(to_string(m.stage))},
      {"data_tiers", tiers},
      {"data_files", m.data_files},
      {"epochs", m.epochs},
      {"learning_rate", m.learning_rate},
      {"batch_size", m.batch_size},
      {"init_from", std::string(to_string(m.init_from))},
      {"doc_trunc", m.doc_trunc},
      {"summary_trunc", m.summary_trunc},
      {"seed", m.seed},
      {"pyramid_manifest_digest", m.pyramid_manifest_digest},
  };
}

StageManifest stage_manifest_from_json(const ordered_json& obj) {
  try {
    StageManifest m;
    m.stage = parse_stage_kind(obj.at("stage").get<std::string>());
    for (const auto& t : obj.at("data_tiers")) {
      auto tier = parse_tier(t.get<std::string>());
      if (!tier) throw Error(ErrorCode::kInvalidConfig, "unknown tier " + t.dump());
      m.data_tiers.push_back(*tier);
    }
    m.data_files = obj.at("data_files").get<std::vector<std::string>>();
    m.epochs = obj.at("epochs").get<int>();
    m.learning_rate = obj.at("learning_rate").get<double>();
    m.batch_size = obj.at("batch_size").get<int>();
    m.init_from = parse_init(obj.at("init_from").get<std::string>());
    m.doc_trunc = obj.at("doc_trunc").get<int>();
    m.summary_trunc = obj.at("summary_trunc").get<int>();
    m.seed = obj.at("seed").get<std::uint64_t>();
    m.pyramid_manifest_digest = obj.value("pyramid_manifest_digest", "");
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("stage manifest: ") + e.what());
  }
}

std::string serialize(const StageManifest& manifest) { return dump_pretty(to_json(manifest)); }

std::string manifest_digest(const StageManifest& manifest) { return sha256_hex(serialize(manifest)); }

std::vector<StageManifest> plan(const PyramidManifest& pyramid, const fs::path& pyramid_dir, const fs::path& data_root,
                                const PlanOverrides& overrides) {
  if (pyramid.hd.count == 0) throw Error(ErrorCode::kMissingTier, "HD tier is empty");

  const fs::path root = fs::weakly_canonical(fs::absolute(data_root));
  auto rel = [&](Tier t) {
    const fs::path file = fs::weakly_canonical(fs::absolute(pyramid_dir / pyramid.tier(t).file));
    return file.lexically_relative(root).generic_string();
  };

  StageManifest base;
  base.learning_rate = overrides.learning_rate.value_or(5e-5);
  base.batch_size = overrides.batch_size.value_or(128);
  base.doc_trunc = overrides.doc_trunc.value_or(1024);
  base.summary_trunc = overrides.summary_trunc.value_or(128);
  base.seed = overrides.seed.value_or(pyramid.seed);
  base.pyramid_manifest_digest = sha256_hex(dump_pretty(to_json(pyramid)));

  auto with_tiers = [&](StageManifest m, std::initializer_list<Tier> tiers) {
    for (Tier t : tiers) {
      if (pyramid.tier(t).count == 0) continue;
      m.data_tiers.push_back(t);
      m.data_files.push_back(rel(t));
    }
    return m;
  };

  const bool generic_data = pyramid.ed.count > 0 || pyramid.ad.count > 0;
  const int generic_epochs = overrides.generic_epochs.value_or(3);
  const int personalized_epochs = overrides.personalized_epochs.value_or(20);

  std::vector<StageManifest> out;
  switch (overrides.mode) {
    case PlanMode::kHierarchical: {
      if (!generic_data) throw Error(ErrorCode::kMissingTier, "ED and AD tiers are both empty");
      StageManifest generic = base;
      generic.stage = StageKind::kGeneric;
      generic.epochs = generic_epochs;
      generic.init_from = InitFrom::kPretrained;
      out.push_back(with_tiers(generic, {Tier::kED, Tier::kAD}));
      StageManifest personalized = base;
      personalized.stage = StageKind::kPersonalized;
      personalized.epochs = personalized_epochs;
      personalized.init_from = InitFrom::kPreviousStageCheckpoint;
      out.push_back(with_tiers(personalized, {Tier::kHD}));
      break;
    }
    case PlanMode::kHdOnly: {
      StageManifest personalized = base;
      personalized.stage = StageKind::kPersonalized;
      personalized.epochs = personalized_epochs;
      personalized.init_from = InitFrom::kPretrained;
      out.push_back(with_tiers(personalized, {Tier::kHD}));
      break;
    }
    case PlanMode::kHybrid: {
      if (!generic_data) throw Error(ErrorCode::kMissingTier, "ED and AD tiers are both empty");
      StageManifest hybrid = base;
      hybrid.stage = StageKind::kHybrid;
      hybrid.epochs = generic_epochs;
      hybrid.init_from = InitFrom::kPretrained;
      out.push_back(with_tiers(hybrid, {Tier::kED, Tier::kAD, Tier::kHD}));
      break;
    }
  }
  validate_plan(out);
  return out;
}

void validate_plan(const std::vector<StageManifest>& manifests) {
  if (manifests.empty()) throw Error(ErrorCode::kInvalidConfig, "plan has no stages");
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const auto& m = manifests[i];
    m.validate();
    if (m.init_from == InitFrom::kPreviousStageCheckpoint && i == 0) {
      throw Error(ErrorCode::kInvalidConfig, "first stage cannot start from a previous checkpoint");
    }
    if (m.stage == StageKind::kPersonalized && m.init_from == InitFrom::kPretrained && manifests.size() != 1) {
      throw Error(ErrorCode::kInvalidConfig, "personalized stage after another stage must use its checkpoint");
    }
    if (m.stage == StageKind::kGeneric && i > 0 && manifests[i - 1].stage == StageKind::kPersonalized) {
      throw Error(ErrorCode::kInvalidConfig, "generic stage cannot follow the personalized stage");
    }
  }
}

std::vector<fs::path> write_plan(const std::vector<StageManifest>& manifests, const fs::path& out_dir) {
  validate_plan(manifests);
  fs::create_directories(out_dir);
  std::vector<fs::path> paths;
  ordered_json listing = ordered_json::array();
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const std::string name = "stage_" + std::to_string(i + 1) + "_" + stage_label(manifests[i]) + ".json";
    write_file_atomic(out_dir / name, serialize(manifests[i]));
    listing.push_back(name);
    paths.push_back(out_dir / name);
  }
  write_file_atomic(out_dir / "plan.json", dump_pretty(ordered_json{{"stages", listing}}));
  return paths;
}

std::vector<fs::path> plan_files(const fs::path& plan_dir) {
  const auto listing = read_json(plan_dir / "plan.json");
  std::vector<fs::path> out;
  try {
    for (const auto& name : listing.at("stages")) out.push_back(plan_dir / name.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, (plan_dir / "plan.json").string() + ": " + e.what());
  }
  return out;
}

std::vector<StageManifest> read_plan(const fs::path& plan_dir) {
  std::vector<StageManifest> out;
  for (const auto& file : plan_files(plan_dir)) out.push_back(stage_manifest_from_json(read_json(file)));
  validate_plan(out);
  return out;
}

const LedgerEntry* RunLedger::completed_entry(std::size_t stage_index) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->stage_index == stage_index && it->completed) return &*it;
  }
  return nullptr;
}

ordered_json to_json(const RunLedger& ledger) {
  ordered_json entries = ordered_json::array();
  for (const auto& e : ledger.entries) {
    entries.push_back(ordered_json{
        {"stage_index", e.stage_index},
        {"stage", std::string(to_string(e.stage))},
        {"manifest_digest", e.manifest_digest},
        {"init", e.init},
        {"checkpoint_id", e.checkpoint_id},
        {"checkpoint_dir", e.checkpoint_dir},
        {"wall_time_s", e.wall_time_s},
        {"exit_status", e.exit_status},
        {"completed", e.completed},
    });
  }
  return ordered_json{{"format", "sumforge.ledger/1"}, {"entries", entries}};
}

RunLedger run_ledger_from_json(const ordered_json& obj) {
  RunLedger ledger;
  try {
    for (const auto& row : obj.at("entries")) {
      LedgerEntry e;
      e.stage_index = row.at("stage_index").get<std::size_t>();
      e.stage = parse_stage_kind(row.at("stage").get<std::string>());
      e.manifest_digest = row.at("manifest_digest").get<std::string>();
      e.init = row.at("init").get<std::string>();
      e.checkpoint_id = row.at("checkpoint_id").get<std::string>();
      e.checkpoint_dir = row.at("checkpoint_dir").get<std::string>();
      e.wall_time_s = row.at("wall_time_s").get<double>();
      e.exit_status = row.at("exit_status").get<int>();
      e.completed = row.at("completed").get<bool>();
      ledger.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorpusReadError, std::string("ledger: ") + e.what());
  }
  return ledger;
}

TrainerCommand TrainerCommand::parse(std::string_view command_line) {
  TrainerCommand cmd;
  std::istringstream in{std::string(command_line)};
  std::string word;
  while (in >> word) cmd.argv.push_back(word);
  if (cmd.argv.empty()) throw Error(ErrorCode::kInvalidConfig, "empty trainer command");
  return cmd;
}

namespace {

// Returns the exit status, 128+signal for a signalled child and 127 when the
// program cannot be spawned.
int run_process(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ);
  if (rc != 0) return 127;
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return 127;
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return 1;
}

std::string read_checkpoint_digest(const fs::path& dir) {
  const fs::path file = dir / "checkpoint.digest";
  std::error_code ec;
  if (!fs::is_regular_file(file, ec)) return {};
  std::string text = read_text_file(file);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

void persist(const RunLedger& ledger, const fs::path& run_dir) {
  write_file_atomic(run_dir / "ledger.json", dump_pretty(to_json(ledger)));
}

}  // namespace

RunLedger execute(const fs::path& plan_dir, const TrainerCommand& trainer, const fs::path& run_dir,
                  const ExecuteOptions& options) {
  const auto files = plan_files(plan_dir);
  std::vector<StageManifest> manifests;
  for (const auto& f : files) manifests.push_back(stage_manifest_from_json(read_json(f)));
  validate_plan(manifests);
  if (trainer.argv.empty()) throw Error(ErrorCode::kInvalidConfig, "empty trainer command");

  fs::create_directories(run_dir);
  RunLedger ledger;
  if (options.resume && fs::exists(run_dir / "ledger.json")) {
    ledger = run_ledger_from_json(read_json(run_dir / "ledger.json"));
  }

  std::string previous_checkpoint_id;
  fs::path previous_checkpoint_dir;
  bool upstream_rerun = false;

  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const auto& m = manifests[i];
    const std::string digest = manifest_digest(m);
    const std::string dir_name = "stage_" + std::to_string(i + 1) + "_" + stage_label(m);
    const fs::path out_dir = run_dir / dir_name;

    if (options.resume && !upstream_rerun) {
      if (const LedgerEntry* done = ledger.completed_entry(i);
          done != nullptr && done->manifest_digest == digest &&
          read_checkpoint_digest(run_dir / done->checkpoint_dir) == done->checkpoint_id) {
        previous_checkpoint_id = done->checkpoint_id;
        previous_checkpoint_dir = run_dir / done->checkpoint_dir;
        continue;
      }
    }
    upstream_rerun = true;

    std::string init_arg = "pretrained";
    std::string init_label = "pretrained";
    if (m.init_from == InitFrom::kPreviousStageCheckpoint) {
      init_arg = previous_checkpoint_dir.string();
      init_label = previous_checkpoint_id;
    }

    fs::create_directories(out_dir);
    fs::remove(out_dir / "checkpoint.digest");

    std::vector<std::string> args = trainer.argv;
    args.insert(args.end(), {"--manifest", fs::absolute(files[i]).string(), "--init", init_arg, "--out",
                             fs::absolute(out_dir).string()});

    const auto start = std::chrono::steady_clock::now();
    const int status = run_process(args);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    LedgerEntry entry;
    entry.stage_index = i;
    entry.stage = m.stage;
    entry.manifest_digest = digest;
    entry.init = init_label;
    entry.checkpoint_dir = dir_name;
    entry.wall_time_s = elapsed.count();
    entry.exit_status = status;

    if (status != 0) {
      ledger.entries.push_back(entry);
      persist(ledger, run_dir);
      throw Error(ErrorCode::kTrainerFailure,
                  "stage " + std::to_string(i + 1) + " (" + stage_label(m) + ") exited with status " +
                      std::to_string(status));
    }
    entry.checkpoint_id = read_checkpoint_digest(out_dir);
    if (entry.checkpoint_id.empty()) {
      ledger.entries.push_back(entry);
      persist(ledger, run_dir);
      throw Error(ErrorCode::kCheckpointMissing,
                  "stage " + std::to_string(i + 1) + " (" + stage_label(m) + ") wrote no checkpoint.digest in " +
                      out_dir.string());
    }
    entry.completed = true;
    ledger.entries.push_back(entry);
    persist(ledger, run_dir);
    previous_checkpoint_id = entry.checkpoint_id;
    previous_checkpoint_dir = out_dir;
  }
  return ledger;
}

}  // namespace sumforge
