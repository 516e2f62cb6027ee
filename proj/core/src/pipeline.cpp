#include "sumforge/pipeline.hpp"

#include "sumforge/digest.hpp"
#include "sumforge/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace sumforge {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& value) {
  const fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

RougeVariant parse_variant(const std::string& name) {
  if (name == "f1") return RougeVariant::kF1;
  if (name == "recall") return RougeVariant::kRecall;
  throw Error(ErrorCode::kInvalidConfig, "unknown gsg variant '" + name + "'");
}

PlanMode parse_plan_mode(const std::string& name) {
  if (name == "hierarchical") return PlanMode::kHierarchical;
  if (name == "hd_only") return PlanMode::kHdOnly;
  if (name == "hybrid") return PlanMode::kHybrid;
  throw Error(ErrorCode::kInvalidConfig, "unknown plan mode '" + name + "'");
}

std::string_view plan_mode_name(PlanMode mode) {
  switch (mode) {
    case PlanMode::kHierarchical:
      return "hierarchical";
    case PlanMode::kHdOnly:
      return "hd_only";
    case PlanMode::kHybrid:
      return "hybrid";
  }
  return "hierarchical";
}

template <typename T>
void read_optional(const ordered_json& obj, const char* key, std::optional<T>& slot) {
  if (const auto it = obj.find(key); it != obj.end() && !it->is_null()) slot = it->get<T>();
}

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

PipelineConfig pipeline_config_from_json(const ordered_json& obj, const fs::path& base_dir) {
  PipelineConfig c;
  try {
    c.corpus = resolve(base_dir, obj.at("corpus").get<std::string>());
    c.hd = resolve(base_dir, obj.at("hd").get<std::string>());
    if (const auto it = obj.find("vocabulary"); it != obj.end() && it->is_string()) {
      c.vocabulary = resolve(base_dir, it->get<std::string>());
    }
    c.seed = obj.value("seed", c.seed);

    ordered_json pyramid = obj.value("pyramid", ordered_json::object());
    if (!pyramid.contains("seed")) pyramid["seed"] = c.seed;
    c.pyramid = pyramid_config_from_json(pyramid);

    const ordered_json gsg = obj.value("gsg", ordered_json::object());
    c.gsg.variant = parse_variant(gsg.value("variant", std::string("f1")));
    c.gsg.doc_token_limit = gsg.value("doc_token_limit", c.gsg.doc_token_limit);
    c.gsg.rouge.keep_punctuation = gsg.value("keep_punctuation", false);
    c.gsg.rouge.stem = gsg.value("stem", false);
    c.gsg.rouge.remove_stopwords = gsg.value("remove_stopwords", false);

    const ordered_json prompt = obj.value("prompt", ordered_json::object());
    c.prompt.system_prompt = prompt.value("system_prompt", c.prompt.system_prompt);
    c.prompt.user_template = prompt.value("user_template", c.prompt.user_template);
    c.prompt.sent_num = prompt.value("sent_num", c.prompt.sent_num);
    if (const auto it = prompt.find("word_num"); it != prompt.end() && !it->is_null()) {
      c.prompt.word_num = it->get<int>();
      c.word_num_from_hd = false;
    }

    c.llm = backend_config_from_json(obj.value("llm", ordered_json::object()));

    const ordered_json rs = obj.value("resample", ordered_json::object());
    c.resample_ed = rs.value("ED", true);
    c.resample_ad = rs.value("AD", true);

    read_optional(obj, "hd_k", c.hd_k);

    const ordered_json plan = obj.value("plan", ordered_json::object());
    c.plan.mode = parse_plan_mode(plan.value("mode", std::string("hierarchical")));
    read_optional(plan, "generic_epochs", c.plan.generic_epochs);
    read_optional(plan, "personalized_epochs", c.plan.personalized_epochs);
    read_optional(plan, "learning_rate", c.plan.learning_rate);
    read_optional(plan, "batch_size", c.plan.batch_size);
    read_optional(plan, "doc_trunc", c.plan.doc_trunc);
    read_optional(plan, "summary_trunc", c.plan.summary_trunc);
    read_optional(plan, "seed", c.plan.seed);

    c.jobs = obj.value("jobs", c.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("pipeline config: ") + e.what());
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::kInvalidConfig, "config not found: " + path.string());
  return pipeline_config_from_json(read_json(path), path.parent_path());
}

Tokenizer make_tokenizer(const std::optional<fs::path>& vocabulary) {
  if (!vocabulary) return Tokenizer::word();
  return Tokenizer::with_vocabulary(Vocabulary::load(*vocabulary));
}

namespace {

ordered_json input_entry(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) return ordered_json{{"file", p.filename().string()}, {"sha256", nullptr}};
  return ordered_json{{"file", p.filename().string()}, {"sha256", sha256_file(p)}};
}

}  // namespace

ordered_json config_snapshot(const PipelineConfig& c) {
  ordered_json llm = to_json(c.llm);
  ordered_json inputs{{"corpus", input_entry(c.corpus)}, {"hd", input_entry(c.hd)}};
  if (c.vocabulary) inputs["vocabulary"] = input_entry(*c.vocabulary);
  return ordered_json{
      {"format", "sumforge.pipeline/1"},
      {"inputs", inputs},
      {"tokenizer", c.vocabulary ? "vocab" : "word"},
      {"seed", c.seed},
      {"pyramid", to_json(c.pyramid)},
      {"gsg",
       {{"variant", c.gsg.variant == RougeVariant::kF1 ? "f1" : "recall"},
        {"doc_token_limit", c.gsg.doc_token_limit},
        {"keep_punctuation", c.gsg.rouge.keep_punctuation},
        {"stem", c.gsg.rouge.stem},
        {"remove_stopwords", c.gsg.rouge.remove_stopwords}}},
      {"prompt",
       {{"system_prompt", c.prompt.system_prompt},
        {"user_template", c.prompt.user_template},
        {"sent_num", c.prompt.sent_num},
        {"word_num", c.word_num_from_hd ? ordered_json("hd_mean") : ordered_json(c.prompt.word_num)}}},
      {"llm", llm},
      {"resample", {{"ED", c.resample_ed}, {"AD", c.resample_ad}}},
      {"hd_k", optional_json(c.hd_k)},
      {"plan",
       {{"mode", std::string(plan_mode_name(c.plan.mode))},
        {"generic_epochs", optional_json(c.plan.generic_epochs)},
        {"personalized_epochs", optional_json(c.plan.personalized_epochs)},
        {"learning_rate", optional_json(c.plan.learning_rate)},
        {"batch_size", optional_json(c.plan.batch_size)},
        {"doc_trunc", optional_json(c.plan.doc_trunc)},
        {"summary_trunc", optional_json(c.plan.summary_trunc)},
        {"seed", optional_json(c.plan.seed)}}},
  };
}

std::map<std::string, std::string> digest_tree(const fs::path& run_dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = entry.path().lexically_relative(run_dir).generic_string();
    if (rel == "digests.json" || rel == "FAILED" || rel.starts_with("cache/") || entry.path().extension() == ".log") {
      continue;
    }
    if (entry.path().filename().string().find(".tmp") != std::string::npos) continue;
    out.emplace(rel, sha256_file(entry.path()));
  }
  return out;
}

namespace {

void write_skips(const fs::path& path, const std::vector<SkipEntry>& skips) {
  std::vector<ordered_json> rows;
  for (const auto& s : skips) rows.push_back({{"id", s.id}, {"reason", s.reason}});
  write_jsonl(path, rows);
}

void write_rejects(const fs::path& path, const std::vector<RejectEntry>& rejects) {
  std::vector<ordered_json> rows;
  for (const auto& r : rejects) rows.push_back({{"id", r.id}, {"error", r.error}});
  write_jsonl(path, rows);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const fs::path& run_dir, const PhaseLogger& log) {
  auto note = [&](std::string_view phase, std::string_view message) {
    if (log) log(phase, message);
  };
  fs::create_directories(run_dir);
  fs::remove(run_dir / "FAILED");

  PipelineResult result;
  result.run_dir = run_dir;
  std::string phase = "config";
  try {
    const std::string snapshot = dump_pretty(config_snapshot(config));
    write_file_atomic(run_dir / "config.snapshot.json", snapshot);
    result.config_digest = sha256_hex(snapshot);

    phase = "load";
    std::error_code ec;
    if (!fs::is_regular_file(config.hd, ec)) {
      throw Error(ErrorCode::kMissingTier, "HD tier file not found: " + config.hd.string());
    }
    if (!fs::is_regular_file(config.corpus, ec)) {
      throw Error(ErrorCode::kCorpusReadError, "corpus file not found: " + config.corpus.string());
    }
    const Tokenizer tokenizer = make_tokenizer(config.vocabulary);
    const auto corpus = read_corpus(config.corpus);
    auto hd = read_records(config.hd, Tier::kHD, tokenizer);
    if (hd.empty()) throw Error(ErrorCode::kMissingTier, "HD tier is empty: " + config.hd.string());
    for (auto& r : hd) {
      r.tier = Tier::kHD;
      r.token_len = tokenizer.count(r.summary);
      r.tokenizer_id = tokenizer.id();
    }
    if (config.hd_k) hd = subsample_hd(hd, *config.hd_k, config.seed);
    note(phase, std::to_string(corpus.size()) + " documents, " + std::to_string(hd.size()) + " HD records");

    phase = "fit";
    result.length_model = fit_records(hd);
    write_file_atomic(run_dir / "length_model.json", dump_pretty(to_json(result.length_model)));
    note(phase, "HD length mu " + std::to_string(result.length_model.mu) + " sigma " +
                    std::to_string(result.length_model.sigma));

    phase = "split";
    const SplitResult split = split_corpus(corpus, config.pyramid);
    write_corpus(run_dir / "split" / "ed_source.jsonl", split.ed_source);
    write_corpus(run_dir / "split" / "ad_source.jsonl", split.ad_source);
    note(phase, std::to_string(split.ed_source.size()) + " ED / " + std::to_string(split.ad_source.size()) + " AD sources");

    phase = "build-ed";
    const auto ed = extract_corpus(split.ed_source, tokenizer, config.gsg, config.jobs);
    write_records(run_dir / "ed" / "records.jsonl", ed.records);
    write_skips(run_dir / "ed" / "skipped.jsonl", ed.skipped);
    note(phase, std::to_string(ed.records.size()) + " extractive summaries");

    phase = "build-ad";
    PromptSpec prompt = config.prompt;
    if (config.word_num_from_hd) {
      prompt.word_num = std::max(1, static_cast<int>(std::llround(result.length_model.mu)));
    }
    BackendConfig llm = config.llm;
    if (llm.cache_dir && llm.cache_dir->is_relative()) llm.cache_dir = run_dir / *llm.cache_dir;
    AbstractiveGenerator generator(llm, make_backend(llm), tokenizer);
    const unsigned in_flight = config.jobs != 0 ? std::min(config.jobs, llm.max_in_flight) : llm.max_in_flight;
    const auto ad = generator.generate_corpus(split.ad_source, prompt, std::max(1u, in_flight));
    write_records(run_dir / "ad" / "records.jsonl", ad.records);
    write_rejects(run_dir / "ad" / "rejects.jsonl", ad.rejects);
    note(phase, std::to_string(ad.records.size()) + " abstractive summaries, " + std::to_string(ad.rejects.size()) +
                    " rejected");

    phase = "resample";
    std::vector<SummaryRecord> ed_final = ed.records;
    std::vector<SummaryRecord> ad_final = ad.records;
    auto apply = [&](std::vector<SummaryRecord>& records, bool enabled, const char* name) {
      const std::size_t input = records.size();
      if (enabled) records = resample(records, result.length_model).kept;
      write_file_atomic(run_dir / "resample" / (std::string(name) + ".report.json"),
                        dump_pretty(to_json(make_report(input, records.size()))));
    };
    apply(ed_final, config.resample_ed, "ED");
    apply(ad_final, config.resample_ad, "AD");
    note(phase, std::to_string(ed_final.size()) + " ED / " + std::to_string(ad_final.size()) + " AD kept");

    phase = "assemble";
    AssembleOptions assemble_options{tokenizer, config.seed, result.config_digest};
    const auto assembled = assemble(ed_final, ad_final, hd, run_dir / "pyramid", assemble_options);

    phase = "stats";
    result.stats = stats(run_dir / "pyramid");
    note(phase, fmt::format("{} ED / {} AD / {} HD in pyramid", result.stats.ed.sample_count, result.stats.ad.sample_count,
                            result.stats.hd.sample_count));

    phase = "plan";
    const auto manifests = plan(assembled.manifest, run_dir / "pyramid", run_dir / "plan", config.plan);
    write_plan(manifests, run_dir / "plan");

    phase = "digests";
    result.digests = digest_tree(run_dir);
    ordered_json digests = ordered_json::object();
    for (const auto& [file, hash] : result.digests) digests[file] = hash;
    write_file_atomic(run_dir / "digests.json", dump_pretty(digests));
  } catch (const std::exception& e) {
    try {
      write_file_atomic(run_dir / "FAILED", dump_pretty(ordered_json{{"phase", phase}, {"error", e.what()}}));
    } catch (...) {
    }
    throw;
  }
  return result;
}

}  // namespace sumforge
