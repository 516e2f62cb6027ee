#include "cli.hpp"

#include "sumforge/digest.hpp"
#include "sumforge/errors.hpp"
#include "sumforge/eval.hpp"
#include "sumforge/gsg.hpp"
#include "sumforge/hft.hpp"
#include "sumforge/llm.hpp"
#include "sumforge/pipeline.hpp"
#include "sumforge/pyramid.hpp"
#include "sumforge/resample.hpp"
#include "sumforge/theory.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>

namespace sumforge::cli {

namespace fs = std::filesystem;

namespace {

// Settings shared by every subcommand; a --config file supplies defaults
// and explicit flags win. Secrets never come from here, only the name of
// the environment variable holding them.
struct Globals {
  std::string config_path;
  std::string format = "table";
  unsigned jobs = 0;
  std::string log_level = "info";
  std::string vocab;
  std::uint64_t seed = 1;
  ordered_json file = ordered_json::object();
  fs::path file_dir;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  Globals& g;
  std::shared_ptr<spdlog::logger> log;

  bool json() const { return g.format == "json"; }
};

std::optional<fs::path> vocab_path(const Context& ctx) {
  if (!ctx.g.vocab.empty()) return fs::path(ctx.g.vocab);
  if (const auto it = ctx.g.file.find("vocabulary"); it != ctx.g.file.end() && it->is_string()) {
    const fs::path p(it->get<std::string>());
    return p.is_absolute() ? p : ctx.g.file_dir / p;
  }
  return std::nullopt;
}

Tokenizer tokenizer_for(const Context& ctx) { return make_tokenizer(vocab_path(ctx)); }

ordered_json input(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw Error(ErrorCode::kIoError, "input not found: " + p.string());
  return ordered_json{{"file", p.filename().string()}, {"sha256", sha256_file(p)}};
}

// Writes the snapshot next to a file output (<out>.snapshot.json) or inside
// a directory output, and returns its digest.
std::string write_snapshot(const Context& ctx, std::string_view command, const fs::path& out, bool out_is_dir,
                           ordered_json options, ordered_json inputs) {
  ordered_json snap{{"format", "sumforge.snapshot/1"},
                    {"command", std::string(command)},
                    {"seed", ctx.g.seed},
                    {"tokenizer", tokenizer_for(ctx).id()},
                    {"options", std::move(options)},
                    {"inputs", std::move(inputs)}};
  const std::string text = dump_pretty(snap);
  const fs::path path = out_is_dir ? out / "config.snapshot.json" : fs::path(out.string() + ".snapshot.json");
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
  const std::string digest = sha256_hex(text);
  ctx.log->info("snapshot={} digest={}", path.string(), digest);
  return digest;
}

void emit(const Context& ctx, const ordered_json& json, const std::string& table) {
  if (ctx.json()) {
    ctx.out << dump_pretty(json);
  } else {
    ctx.out << table;
  }
}

void ensure_parent(const fs::path& p) {
  if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
}

BackendConfig backend_from(const Context& ctx) {
  const auto it = ctx.g.file.find("llm");
  return backend_config_from_json(it != ctx.g.file.end() ? *it : ordered_json::object());
}

RougeVariant parse_variant(const std::string& v) { return v == "recall" ? RougeVariant::kRecall : RougeVariant::kF1; }

PlanMode parse_mode(const std::string& v) {
  if (v == "hd_only") return PlanMode::kHdOnly;
  if (v == "hybrid") return PlanMode::kHybrid;
  return PlanMode::kHierarchical;
}

std::string fmt_model(const LengthModel& m) {
  return fmt::format("mu {:.4f} | sigma {:.4f} | interval [{:.4f}, {:.4f}] | n {}\n", m.mu, m.sigma, m.lower, m.upper,
                     m.sample_count);
}

template <typename T>
std::optional<T> opt_if(const CLI::Option* o, const T& value) {
  return o->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Globals g;
  CLI::App app{"sumforge: summarization corpus toolkit", "sumforge"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");
  auto* config_opt = app.add_option("--config", g.config_path, "JSON settings file (flags override it)");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "table"}));
  auto* jobs_opt = app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_option("--vocab", g.vocab, "External tokenizer vocabulary (one token per line)");
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed");
  app.fallthrough();

  // build-ed
  struct {
    std::string corpus, out, skipped, variant = "f1";
    std::size_t doc_limit = 1024;
  } ed;
  auto* c_ed = app.add_subcommand("build-ed", "Extract gap-sentence pseudo-summaries");
  c_ed->add_option("--corpus", ed.corpus, "Corpus JSONL {id, document}")->required();
  c_ed->add_option("--out", ed.out, "Output records JSONL")->required();
  c_ed->add_option("--skipped", ed.skipped, "Skipped-document JSONL (default <out>.skipped.jsonl)");
  c_ed->add_option("--variant", ed.variant, "Selection score")->check(CLI::IsMember({"f1", "recall"}));
  c_ed->add_option("--doc-limit", ed.doc_limit, "Document token limit")->check(CLI::PositiveNumber);

  // build-ad
  struct {
    std::string corpus, out, rejects, hd, backend, endpoint, model, cache_dir;
    int sent_num = 3;
    int word_num = 0;
    unsigned max_in_flight = 0;
  } ad;
  auto* c_ad = app.add_subcommand("build-ad", "Generate LLM summaries with the zero-shot prompt");
  c_ad->add_option("--corpus", ad.corpus, "Corpus JSONL {id, document}")->required();
  c_ad->add_option("--out", ad.out, "Output records JSONL")->required();
  c_ad->add_option("--rejects", ad.rejects, "Reject JSONL (default <out>.rejects.jsonl)");
  c_ad->add_option("--sent-num", ad.sent_num, "[sent num] value")->check(CLI::PositiveNumber);
  auto* word_num_opt = c_ad->add_option("--word-num", ad.word_num, "[word num] value")->check(CLI::PositiveNumber);
  c_ad->add_option("--hd", ad.hd, "HD records; [word num] defaults to their mean length");
  auto* backend_opt = c_ad->add_option("--backend", ad.backend, "mock|live")->check(CLI::IsMember({"mock", "live"}));
  auto* endpoint_opt = c_ad->add_option("--endpoint", ad.endpoint, "Chat-completion URL");
  auto* model_opt = c_ad->add_option("--model", ad.model, "Model name");
  auto* cache_opt = c_ad->add_option("--cache-dir", ad.cache_dir, "Completion cache directory");
  auto* inflight_opt = c_ad->add_option("--max-in-flight", ad.max_in_flight, "Concurrent requests")
                           ->check(CLI::PositiveNumber);

  // fit-length
  struct {
    std::string hd, out;
  } fl;
  auto* c_fit = app.add_subcommand("fit-length", "Fit the Gaussian length model on HD summaries");
  c_fit->add_option("--hd", fl.hd, "HD records JSONL")->required();
  c_fit->add_option("--out", fl.out, "Model JSON")->required();

  // resample
  struct {
    std::string in, model, out, report;
  } rs;
  auto* c_rs = app.add_subcommand("resample", "Keep records inside the model's 2-sigma interval");
  c_rs->add_option("--in", rs.in, "Records JSONL")->required();
  c_rs->add_option("--model", rs.model, "Length model JSON")->required();
  c_rs->add_option("--out", rs.out, "Kept records JSONL")->required();
  c_rs->add_option("--report", rs.report, "Report JSON (default <out>.report.json)");

  // assemble
  struct {
    std::string ed, ad, hd, out;
    std::size_t hd_k = 0;
  } as;
  auto* c_as = app.add_subcommand("assemble", "Assemble the ED/AD/HD pyramid directory");
  c_as->add_option("--ed", as.ed, "ED records JSONL")->required();
  c_as->add_option("--ad", as.ad, "AD records JSONL")->required();
  c_as->add_option("--hd", as.hd, "HD records JSONL")->required();
  c_as->add_option("--out", as.out, "Output directory")->required();
  auto* hdk_opt = c_as->add_option("--hd-k", as.hd_k, "Subsample K HD records")->check(CLI::PositiveNumber);

  // stats
  std::string stats_dir;
  auto* c_st = app.add_subcommand("stats", "Per-tier sample counts and length statistics");
  c_st->add_option("--pyramid", stats_dir, "Pyramid directory")->required();

  // plan
  struct {
    std::string pyramid, out, mode = "hierarchical";
    int generic_epochs = 0, personalized_epochs = 0, batch = 0;
    double lr = 0.0;
  } pl;
  auto* c_pl = app.add_subcommand("plan", "Emit fine-tuning stage manifests");
  c_pl->add_option("--pyramid", pl.pyramid, "Pyramid directory")->required();
  c_pl->add_option("--out", pl.out, "Plan directory")->required();
  c_pl->add_option("--mode", pl.mode, "Schedule")->check(CLI::IsMember({"hierarchical", "hd_only", "hybrid"}));
  auto* ge_opt = c_pl->add_option("--generic-epochs", pl.generic_epochs, "Generic epochs")->check(CLI::PositiveNumber);
  auto* pe_opt =
      c_pl->add_option("--personalized-epochs", pl.personalized_epochs, "Personalized epochs")->check(CLI::PositiveNumber);
  auto* lr_opt = c_pl->add_option("--learning-rate", pl.lr, "Learning rate")->check(CLI::PositiveNumber);
  auto* bs_opt = c_pl->add_option("--batch-size", pl.batch, "Global batch size")->check(CLI::PositiveNumber);

  // run-hft
  struct {
    std::string plan, trainer, out;
    bool resume = false;
  } hf;
  auto* c_hf = app.add_subcommand("run-hft", "Run the stage manifests through an external trainer");
  c_hf->add_option("--plan", hf.plan, "Plan directory")->required();
  c_hf->add_option("--trainer", hf.trainer, "Trainer command line")->required();
  c_hf->add_option("--out", hf.out, "Run directory")->required();
  c_hf->add_flag("--resume", hf.resume, "Skip stages whose checkpoints validate");

  // verify-theory
  struct {
    std::size_t samples = 10000, alphabet = 3, max_joints = 16;
    bool model_x = false;
    std::string out;
  } th;
  auto* c_th = app.add_subcommand("verify-theory", "Monte Carlo probe of the entropy-gain argument");
  c_th->add_option("--samples", th.samples, "Random joints")->check(CLI::PositiveNumber);
  c_th->add_option("--alphabet", th.alphabet, "Values per variable")->check(CLI::Range(1, 8));
  c_th->add_option("--max-joints", th.max_joints, "Counterexample joints to serialize");
  c_th->add_flag("--model-x", th.model_x, "Include X in the joint");
  c_th->add_option("--out", th.out, "Report JSON");

  // score
  struct {
    std::string ref, dataset = "corpus", external, external_name = "external", out;
    std::vector<std::string> preds;
    bool stem = false;
  } sc;
  auto* c_sc = app.add_subcommand("score", "ROUGE-1/2/L against references; ANOVA across runs");
  c_sc->add_option("--ref", sc.ref, "References JSONL {id, summary}")->required();
  c_sc->add_option("--pred", sc.preds, "Predictions JSONL {id, summary}; repeat for runs")->required();
  c_sc->add_option("--dataset", sc.dataset, "Dataset label for the significance table");
  c_sc->add_option("--external", sc.external, "Precomputed per-pair scores JSONL {id, score}");
  c_sc->add_option("--external-name", sc.external_name, "Name of the external metric");
  c_sc->add_flag("--stem", sc.stem, "Porter-stem tokens");
  c_sc->add_option("--out", sc.out, "Report JSON");

  // compare
  struct {
    std::string gold, sys1, sys2, out;
    double tolerance = kDefaultLengthTolerance;
  } cp;
  auto* c_cp = app.add_subcommand("compare", "Length pre-screen and element informativeness verdicts");
  c_cp->add_option("--gold", cp.gold, "Gold annotations JSONL")->required();
  c_cp->add_option("--sys1", cp.sys1, "System 1 annotations JSONL")->required();
  c_cp->add_option("--sys2", cp.sys2, "System 2 annotations JSONL")->required();
  c_cp->add_option("--tolerance", cp.tolerance, "Length tolerance ratio")->check(CLI::PositiveNumber);
  c_cp->add_option("--out", cp.out, "Report JSON");

  // pipeline
  std::string pipeline_out;
  auto* c_pp = app.add_subcommand("pipeline", "Run every phase from one config");
  c_pp->add_option("--out", pipeline_out, "Run directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return 2;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto logger = std::make_shared<spdlog::logger>("sumforge", sink);
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l %v");
  logger->set_level(spdlog::level::from_str(g.log_level));
  Context ctx{out, err, g, logger};

  try {
    if (config_opt->count() > 0) {
      g.file = read_json(g.config_path);
      g.file_dir = fs::path(g.config_path).parent_path();
      if (seed_opt->count() == 0) g.seed = g.file.value("seed", g.seed);
      if (jobs_opt->count() == 0) g.jobs = g.file.value("jobs", g.jobs);
    }

    if (c_ed->parsed()) {
      const Tokenizer tok = tokenizer_for(ctx);
      GsgOptions opts;
      opts.variant = parse_variant(ed.variant);
      opts.doc_token_limit = ed.doc_limit;
      const auto corpus = read_corpus(ed.corpus);
      const auto result = extract_corpus(corpus, tok, opts, g.jobs);
      ensure_parent(ed.out);
      write_records(ed.out, result.records);
      std::vector<ordered_json> skips;
      for (const auto& s : result.skipped) skips.push_back({{"id", s.id}, {"reason", s.reason}});
      write_jsonl(ed.skipped.empty() ? ed.out + ".skipped.jsonl" : ed.skipped, skips);
      write_snapshot(ctx, "build-ed", ed.out, false,
                     {{"variant", ed.variant}, {"doc_limit", ed.doc_limit}}, {{"corpus", input(ed.corpus)}});
      logger->info("phase=build-ed records={} skipped={}", result.records.size(), result.skipped.size());
      return 0;
    }

    if (c_ad->parsed()) {
      const Tokenizer tok = tokenizer_for(ctx);
      BackendConfig bc = backend_from(ctx);
      if (backend_opt->count()) bc.kind = ad.backend == "live" ? BackendKind::kLive : BackendKind::kMock;
      if (endpoint_opt->count()) bc.endpoint = ad.endpoint;
      if (model_opt->count()) bc.model = ad.model;
      if (cache_opt->count()) bc.cache_dir = fs::path(ad.cache_dir);
      if (inflight_opt->count()) bc.max_in_flight = ad.max_in_flight;
      PromptSpec spec;
      spec.sent_num = ad.sent_num;
      ordered_json inputs{{"corpus", input(ad.corpus)}};
      if (word_num_opt->count()) {
        spec.word_num = ad.word_num;
      } else if (!ad.hd.empty()) {
        const auto model = fit_records(read_records(ad.hd, Tier::kHD, tok));
        spec.word_num = std::max(1, static_cast<int>(std::llround(model.mu)));
        inputs["hd"] = input(ad.hd);
      }
      AbstractiveGenerator gen(bc, make_backend(bc), tok);
      const auto result = gen.generate_corpus(read_corpus(ad.corpus), spec, bc.max_in_flight);
      ensure_parent(ad.out);
      write_records(ad.out, result.records);
      std::vector<ordered_json> rejects;
      for (const auto& r : result.rejects) rejects.push_back({{"id", r.id}, {"error", r.error}});
      write_jsonl(ad.rejects.empty() ? ad.out + ".rejects.jsonl" : ad.rejects, rejects);
      write_snapshot(ctx, "build-ad", ad.out, false,
                     {{"sent_num", spec.sent_num}, {"word_num", spec.word_num}, {"llm", to_json(bc)}}, inputs);
      logger->info("phase=build-ad records={} rejects={} cache_hits={} backend_calls={}", result.records.size(),
                   result.rejects.size(), result.cache_hits, result.backend_calls);
      return 0;
    }

    if (c_fit->parsed()) {
      const auto model = fit_records(read_records(fl.hd, Tier::kHD, tokenizer_for(ctx)));
      if (model.degenerate()) logger->warn("phase=fit-length degenerate=true sigma=0");
      ensure_parent(fl.out);
      write_file_atomic(fl.out, dump_pretty(to_json(model)));
      write_snapshot(ctx, "fit-length", fl.out, false, ordered_json::object(), {{"hd", input(fl.hd)}});
      emit(ctx, to_json(model), fmt_model(model));
      return 0;
    }

    if (c_rs->parsed()) {
      const auto model = length_model_from_json(read_json(rs.model));
      const auto records = read_records(rs.in, Tier::kED, tokenizer_for(ctx));
      const auto result = resample(records, model);
      ensure_parent(rs.out);
      write_records(rs.out, result.kept);
      const auto report = make_report(records.size(), result.kept.size());
      write_file_atomic(rs.report.empty() ? rs.out + ".report.json" : rs.report, dump_pretty(to_json(report)));
      write_snapshot(ctx, "resample", rs.out, false, ordered_json::object(),
                     {{"records", input(rs.in)}, {"model", input(rs.model)}});
      emit(ctx, to_json(report),
           fmt::format("input {} | kept {} | dropped {} | retention {:.4f}\n", report.input, report.kept,
                       report.dropped, report.retention_rate));
      return 0;
    }

    if (c_as->parsed()) {
      const Tokenizer tok = tokenizer_for(ctx);
      std::error_code ec;
      if (!fs::is_regular_file(as.hd, ec)) throw Error(ErrorCode::kMissingTier, "HD tier file not found: " + as.hd);
      auto hd = read_records(as.hd, Tier::kHD, tok);
      if (hdk_opt->count()) hd = subsample_hd(hd, as.hd_k, g.seed);
      const auto ed_records = read_records(as.ed, Tier::kED, tok);
      const auto ad_records = read_records(as.ad, Tier::kAD, tok);
      ordered_json options{{"hd_k", hdk_opt->count() ? ordered_json(as.hd_k) : ordered_json(nullptr)}};
      const std::string digest = write_snapshot(ctx, "assemble", as.out, true, options,
                                                {{"ed", input(as.ed)}, {"ad", input(as.ad)}, {"hd", input(as.hd)}});
      const auto result = assemble(ed_records, ad_records, hd, as.out, AssembleOptions{tok, g.seed, digest});
      logger->info("phase=assemble manifest_digest={}", result.manifest_digest);
      const auto st = stats(fs::path(as.out));
      emit(ctx, to_json(st), to_table(st));
      return 0;
    }

    if (c_st->parsed()) {
      const auto st = stats(fs::path(stats_dir));
      emit(ctx, to_json(st), to_table(st));
      return 0;
    }

    if (c_pl->parsed()) {
      const auto pyramid = load_pyramid(pl.pyramid);
      PlanOverrides overrides;
      overrides.mode = parse_mode(pl.mode);
      overrides.generic_epochs = opt_if(ge_opt, pl.generic_epochs);
      overrides.personalized_epochs = opt_if(pe_opt, pl.personalized_epochs);
      overrides.learning_rate = opt_if(lr_opt, pl.lr);
      overrides.batch_size = opt_if(bs_opt, pl.batch);
      if (seed_opt->count()) overrides.seed = g.seed;
      const auto manifests = plan(pyramid.manifest, pl.pyramid, pl.out, overrides);
      const auto files = write_plan(manifests, pl.out);
      ordered_json listing = ordered_json::array();
      std::string table = "Stage | Tiers | Epochs | LR | Batch | Init\n";
      for (std::size_t i = 0; i < manifests.size(); ++i) {
        listing.push_back(to_json(manifests[i]));
        std::string tiers;
        for (Tier t : manifests[i].data_tiers) tiers += (tiers.empty() ? "" : "+") + std::string(to_string(t));
        table += fmt::format("{} | {} | {} | {:g} | {} | {}\n", to_string(manifests[i].stage), tiers,
                             manifests[i].epochs, manifests[i].learning_rate, manifests[i].batch_size,
                             to_string(manifests[i].init_from));
      }
      emit(ctx, listing, table);
      return 0;
    }

    if (c_hf->parsed()) {
      const auto ledger = execute(hf.plan, TrainerCommand::parse(hf.trainer), hf.out, ExecuteOptions{hf.resume});
      std::string table = "Stage | Manifest | Checkpoint | Wall s | Exit\n";
      for (const auto& e : ledger.entries) {
        table += fmt::format("{} | {} | {} | {:.3f} | {}\n", to_string(e.stage), e.manifest_digest.substr(0, 12),
                             e.checkpoint_id, e.wall_time_s, e.exit_status);
      }
      emit(ctx, to_json(ledger), table);
      return 0;
    }

    if (c_th->parsed()) {
      MonteCarloOptions mc;
      mc.samples = th.samples;
      mc.seed = g.seed;
      mc.alphabet = th.alphabet;
      mc.model_x = th.model_x;
      mc.jobs = g.jobs;
      mc.max_counterexample_joints = th.max_joints;
      const auto report = run_monte_carlo(mc);
      const auto json = to_json(report);
      if (!th.out.empty()) {
        ensure_parent(th.out);
        write_file_atomic(th.out, dump_pretty(json));
      }
      if (!report.counterexamples.empty()) {
        logger->warn("phase=verify-theory counterexamples={} (assumption holds but G_hi <= G_hy)",
                     report.counterexamples.size());
      }
      emit(ctx, json, to_table(report));
      return report.identities_hold() ? 0 : 1;
    }

    if (c_sc->parsed()) {
      const auto refs = read_jsonl(sc.ref);
      ScoreOptions opts;
      opts.tokenizer = tokenizer_for(ctx);
      opts.rouge.stem = sc.stem;
      opts.jobs = g.jobs;
      if (!sc.external.empty()) opts.external = read_external_scores(sc.external, sc.external_name);
      std::vector<ScoreReport> runs;
      for (const auto& pred : sc.preds) runs.push_back(score_corpus(align_by_id(read_jsonl(pred), refs), opts));
      ordered_json json{{"runs", ordered_json::array()}};
      std::string table;
      for (std::size_t i = 0; i < runs.size(); ++i) {
        json["runs"].push_back(to_json(runs[i], runs.size() == 1));
        table += fmt::format("run {} ({})\n", i + 1, fs::path(sc.preds[i]).filename().string()) + to_table(runs[i]);
      }
      if (runs.size() >= 2) {
        const std::vector<SignificanceRow> rows{significance(sc.dataset, runs)};
        json["significance"] = to_json(rows);
        table += "\n" + to_table(rows);
      }
      if (!sc.out.empty()) {
        ensure_parent(sc.out);
        write_file_atomic(sc.out, dump_pretty(json));
      }
      emit(ctx, json, table);
      return 0;
    }

    if (c_cp->parsed()) {
      const auto report =
          compare(read_jsonl(cp.gold), read_jsonl(cp.sys1), read_jsonl(cp.sys2), tokenizer_for(ctx), cp.tolerance);
      if (!cp.out.empty()) {
        ensure_parent(cp.out);
        write_file_atomic(cp.out, dump_pretty(to_json(report)));
      }
      emit(ctx, to_json(report), to_table(report));
      return 0;
    }

    if (c_pp->parsed()) {
      if (config_opt->count() == 0) throw Error(ErrorCode::kInvalidConfig, "pipeline needs --config");
      PipelineConfig pc = pipeline_config_from_json(g.file, g.file_dir);
      if (!g.vocab.empty()) pc.vocabulary = fs::path(g.vocab);
      if (seed_opt->count()) {
        pc.seed = g.seed;
        pc.pyramid.seed = g.seed;
      }
      pc.jobs = g.jobs;
      const auto result = run_pipeline(pc, pipeline_out, [&](std::string_view phase, std::string_view message) {
        logger->info("phase={} {}", phase, message);
      });
      ordered_json digests = ordered_json::object();
      for (const auto& [file, hash] : result.digests) digests[file] = hash;
      emit(ctx, ordered_json{{"run_dir", pipeline_out}, {"config_digest", result.config_digest}, {"digests", digests}},
           to_table(result.stats));
      return 0;
    }
  } catch (const Error& e) {
    logger->error("code={} {}", to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    logger->error("code=IoError {}", e.what());
    return 1;
  }
  return 2;
}

}  // namespace sumforge::cli
