#include "sumforge/pyramid.hpp"

#include "sumforge/digest.hpp"
#include "sumforge/errors.hpp"
#include "sumforge/resample.hpp"
#include "sumforge/rng.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <unordered_set>

namespace sumforge {

namespace {

constexpr std::string_view kManifestFormat = "sumforge.pyramid/1";
constexpr std::array<Tier, 3> kTiers = {Tier::kED, Tier::kAD, Tier::kHD};

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

std::size_t rounded_share(std::size_t n, double fraction) {
  const auto share = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  return std::min(share, n);
}

std::string_view mode_name(PoolMode mode) {
  switch (mode) {
    case PoolMode::kSplit: return "split";
    case PoolMode::kFixedPool: return "fixed_pool";
    case PoolMode::kIncreasingPool: return "increasing_pool";
  }
  return "split";
}

void validate_records(const std::vector<SummaryRecord>& records, Tier expected, const Tokenizer& tokenizer) {
  const std::string tokenizer_id = tokenizer.id();
  for (const auto& r : records) {
    if (r.tier != expected) {
      throw Error(ErrorCode::kTierViolation, "record \"" + r.doc_id + "\" is tagged " +
                                                 std::string(to_string(r.tier)) + " but was supplied as " +
                                                 std::string(to_string(expected)));
    }
    if (!r.tokenizer_id.empty() && r.tokenizer_id != tokenizer_id) {
      throw Error(ErrorCode::kTokenizerMismatch,
                  "record \"" + r.doc_id + "\" uses tokenizer " + r.tokenizer_id + ", pyramid uses " + tokenizer_id);
    }
    const std::size_t actual = tokenizer.count(r.summary);
    if (actual != r.token_len) {
      throw Error(ErrorCode::kTierViolation, "record \"" + r.doc_id + "\" declares token_len " +
                                                 std::to_string(r.token_len) + " but its summary has " +
                                                 std::to_string(actual) + " tokens");
    }
  }
}

std::string records_content(const std::vector<SummaryRecord>& records, const std::string& tokenizer_id) {
  std::string content;
  for (const auto& r : records) {
    SummaryRecord copy = r;
    copy.tokenizer_id = tokenizer_id;
    content += dump_line(to_json(copy));
    content += '\n';
  }
  return content;
}

ordered_json tier_file_json(const TierFile& t) {
  ordered_json obj = ordered_json::object();
  obj["file"] = t.file;
  obj["count"] = t.count;
  obj["sha256"] = t.sha256;
  return obj;
}

TierFile tier_file_from_json(const ordered_json& obj) {
  return {obj.at("file").get<std::string>(), obj.at("count").get<std::size_t>(),
          obj.at("sha256").get<std::string>()};
}

ordered_json optional_number(const std::optional<double>& value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

}  // namespace

void PyramidConfig::validate() const {
  switch (mode) {
    case PoolMode::kSplit:
      if (!in_unit_interval(ed_ratio) || !in_unit_interval(ad_ratio) || std::abs(ed_ratio + ad_ratio - 1.0) > 1e-9) {
        throw Error(ErrorCode::kInvalidConfig, "split ratios must lie in [0,1] and sum to 1");
      }
      break;
    case PoolMode::kFixedPool:
      if (!in_unit_interval(ad_fraction_tau)) {
        throw Error(ErrorCode::kInvalidConfig, "ad_fraction_tau must lie in [0,1]");
      }
      break;
    case PoolMode::kIncreasingPool:
      if (!in_unit_interval(ad_fraction_sigma)) {
        throw Error(ErrorCode::kInvalidConfig, "ad_fraction_sigma must lie in [0,1]");
      }
      break;
  }
}

ordered_json to_json(const PyramidConfig& config) {
  ordered_json obj = ordered_json::object();
  obj["mode"] = mode_name(config.mode);
  obj["split_ratio"] = ordered_json::array({config.ed_ratio, config.ad_ratio});
  obj["ad_fraction_tau"] = config.ad_fraction_tau;
  obj["ad_fraction_sigma"] = config.ad_fraction_sigma;
  obj["seed"] = config.seed;
  return obj;
}

PyramidConfig pyramid_config_from_json(const ordered_json& obj) {
  PyramidConfig config;
  try {
    const std::string mode = obj.value("mode", std::string("split"));
    if (mode == "split") {
      config.mode = PoolMode::kSplit;
    } else if (mode == "fixed_pool") {
      config.mode = PoolMode::kFixedPool;
    } else if (mode == "increasing_pool") {
      config.mode = PoolMode::kIncreasingPool;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown pyramid mode \"" + mode + "\"");
    }
    if (obj.contains("split_ratio")) {
      const auto& ratio = obj.at("split_ratio");
      config.ed_ratio = ratio.at(0).get<double>();
      config.ad_ratio = ratio.at(1).get<double>();
    }
    config.ad_fraction_tau = obj.value("ad_fraction_tau", config.ad_fraction_tau);
    config.ad_fraction_sigma = obj.value("ad_fraction_sigma", config.ad_fraction_sigma);
    config.seed = obj.value("seed", config.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("pyramid config: ") + e.what());
  }
  config.validate();
  return config;
}

SplitResult split_corpus(const std::vector<DocInput>& corpus, const PyramidConfig& config) {
  config.validate();
  SplitResult result;
  std::vector<const DocInput*> unique;
  unique.reserve(corpus.size());
  std::unordered_set<std::string> seen;
  for (const auto& doc : corpus) {
    if (seen.insert(doc.id).second) {
      unique.push_back(&doc);
    } else {
      ++result.duplicates_removed;
    }
  }
  if (unique.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no documents");

  const std::size_t n = unique.size();
  Engine rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  fisher_yates_shuffle(std::span<std::size_t>(order), rng);

  std::vector<bool> to_ad(n, false);
  std::vector<bool> to_ed(n, false);
  switch (config.mode) {
    case PoolMode::kSplit: {
      const std::size_t ed_count = rounded_share(n, config.ed_ratio);
      for (std::size_t i = 0; i < n; ++i) (i < ed_count ? to_ed : to_ad)[order[i]] = true;
      break;
    }
    case PoolMode::kFixedPool: {
      const std::size_t ad_count = rounded_share(n, config.ad_fraction_tau);
      for (std::size_t i = 0; i < n; ++i) (i < ad_count ? to_ad : to_ed)[order[i]] = true;
      break;
    }
    case PoolMode::kIncreasingPool: {
      const std::size_t ad_count = rounded_share(n, config.ad_fraction_sigma);
      std::fill(to_ed.begin(), to_ed.end(), true);
      for (std::size_t i = 0; i < ad_count; ++i) to_ad[order[i]] = true;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (to_ed[i]) result.ed_source.push_back(*unique[i]);
    if (to_ad[i]) result.ad_source.push_back(*unique[i]);
  }
  return result;
}

const TierFile& PyramidManifest::tier(Tier t) const {
  switch (t) {
    case Tier::kED: return ed;
    case Tier::kAD: return ad;
    case Tier::kHD: return hd;
  }
  return ed;
}

ordered_json to_json(const PyramidManifest& manifest) {
  ordered_json obj = ordered_json::object();
  obj["format"] = kManifestFormat;
  obj["seed"] = manifest.seed;
  obj["tokenizer_id"] = manifest.tokenizer_id;
  obj["config_digest"] = manifest.config_digest;
  ordered_json tiers = ordered_json::object();
  for (const Tier t : kTiers) tiers[std::string(to_string(t))] = tier_file_json(manifest.tier(t));
  obj["tiers"] = tiers;
  return obj;
}

PyramidManifest pyramid_manifest_from_json(const ordered_json& obj) {
  try {
    if (obj.at("format").get<std::string>() != kManifestFormat) {
      throw Error(ErrorCode::kCorpusReadError, "unsupported pyramid manifest format");
    }
    PyramidManifest manifest;
    manifest.seed = obj.at("seed").get<std::uint64_t>();
    manifest.tokenizer_id = obj.at("tokenizer_id").get<std::string>();
    manifest.config_digest = obj.at("config_digest").get<std::string>();
    const auto& tiers = obj.at("tiers");
    manifest.ed = tier_file_from_json(tiers.at("ED"));
    manifest.ad = tier_file_from_json(tiers.at("AD"));
    manifest.hd = tier_file_from_json(tiers.at("HD"));
    return manifest;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorpusReadError, std::string("pyramid manifest: ") + e.what());
  }
}

std::string tier_file_name(Tier tier) { return std::string(to_string(tier)) + ".jsonl"; }

AssembleResult assemble(const std::vector<SummaryRecord>& ed, const std::vector<SummaryRecord>& ad,
                        const std::vector<SummaryRecord>& hd, const std::filesystem::path& out_dir,
                        const AssembleOptions& options) {
  validate_records(ed, Tier::kED, options.tokenizer);
  validate_records(ad, Tier::kAD, options.tokenizer);
  validate_records(hd, Tier::kHD, options.tokenizer);

  const std::string tokenizer_id = options.tokenizer.id();
  PyramidManifest manifest;
  manifest.seed = options.seed;
  manifest.tokenizer_id = tokenizer_id;
  manifest.config_digest = options.config_digest;

  auto write_tier = [&](const std::vector<SummaryRecord>& records, Tier tier, TierFile& slot) {
    const std::string content = records_content(records, tokenizer_id);
    slot.file = tier_file_name(tier);
    slot.count = records.size();
    slot.sha256 = sha256_hex(content);
    write_file_atomic(out_dir / slot.file, content);
  };
  write_tier(ed, Tier::kED, manifest.ed);
  write_tier(ad, Tier::kAD, manifest.ad);
  write_tier(hd, Tier::kHD, manifest.hd);

  const std::string manifest_text = dump_pretty(to_json(manifest));
  write_file_atomic(out_dir / "manifest.json", manifest_text);

  PyramidStats summary;
  summary.ed = tier_stats(ed);
  summary.ad = tier_stats(ad);
  summary.hd = tier_stats(hd);
  write_file_atomic(out_dir / "stats.json", dump_pretty(to_json(summary)));

  return {manifest, sha256_hex(manifest_text)};
}

const std::vector<SummaryRecord>& PyramidData::tier(Tier t) const {
  switch (t) {
    case Tier::kED: return ed;
    case Tier::kAD: return ad;
    case Tier::kHD: return hd;
  }
  return ed;
}

PyramidData load_pyramid(const std::filesystem::path& dir) {
  PyramidData data;
  data.manifest = pyramid_manifest_from_json(read_json(dir / "manifest.json"));
  const Tokenizer tokenizer;  // only used when token_len is absent
  for (const Tier t : kTiers) {
    const TierFile& info = data.manifest.tier(t);
    const auto path = dir / info.file;
    const std::string digest = sha256_file(path);
    if (digest != info.sha256) {
      throw Error(ErrorCode::kCorpusReadError, path.string() + ": digest does not match manifest");
    }
    auto records = read_records(path, t, tokenizer);
    if (records.size() != info.count) {
      throw Error(ErrorCode::kCorpusReadError, path.string() + ": " + std::to_string(records.size()) +
                                                   " records but manifest says " + std::to_string(info.count));
    }
    switch (t) {
      case Tier::kED: data.ed = std::move(records); break;
      case Tier::kAD: data.ad = std::move(records); break;
      case Tier::kHD: data.hd = std::move(records); break;
    }
  }
  return data;
}

const TierStats& PyramidStats::tier(Tier t) const {
  switch (t) {
    case Tier::kED: return ed;
    case Tier::kAD: return ad;
    case Tier::kHD: return hd;
  }
  return ed;
}

TierStats tier_stats(const std::vector<SummaryRecord>& records) {
  TierStats out;
  out.sample_count = records.size();
  if (records.empty()) return out;
  std::vector<std::int64_t> lengths;
  lengths.reserve(records.size());
  for (const auto& r : records) lengths.push_back(static_cast<std::int64_t>(r.token_len));
  if (lengths.size() == 1) {
    out.length_mean = static_cast<double>(lengths.front());
    return out;
  }
  const LengthModel moments = fit(lengths);
  out.length_mean = moments.mu;
  out.length_std = moments.sigma;
  return out;
}

PyramidStats stats(const PyramidData& pyramid) {
  return {tier_stats(pyramid.ed), tier_stats(pyramid.ad), tier_stats(pyramid.hd)};
}

PyramidStats stats(const std::filesystem::path& dir) { return stats(load_pyramid(dir)); }

ordered_json to_json(const PyramidStats& s) {
  ordered_json obj = ordered_json::object();
  for (const Tier t : kTiers) {
    const TierStats& ts = s.tier(t);
    ordered_json row = ordered_json::object();
    row["sample_count"] = ts.sample_count;
    row["length_mean"] = optional_number(ts.length_mean);
    row["length_std"] = optional_number(ts.length_std);
    obj[std::string(to_string(t))] = row;
  }
  return obj;
}

std::string to_table(const PyramidStats& s) {
  std::string out = fmt::format("{:<6}| {}\n", "Tier", "Sample Number / Length Mean±std");
  out += "------+--------------------------------\n";
  for (const Tier t : kTiers) {
    const TierStats& ts = s.tier(t);
    std::string moments = "-";
    if (ts.length_mean) {
      moments = fmt::format("{:.0f}", *ts.length_mean);
      moments += ts.length_std ? fmt::format("±{:.0f}", *ts.length_std) : "±-";
    }
    out += fmt::format("{:<6}| {} / {}\n", to_string(t), ts.sample_count, moments);
  }
  return out;
}

std::vector<SummaryRecord> subsample_hd(const std::vector<SummaryRecord>& hd, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > hd.size()) {
    throw Error(ErrorCode::kInvalidK,
                "k must lie in [1, " + std::to_string(hd.size()) + "], got " + std::to_string(k));
  }
  Engine rng(seed);
  std::vector<SummaryRecord> out;
  out.reserve(k);
  for (const std::size_t i : sample_without_replacement(hd.size(), k, rng)) out.push_back(hd[i]);
  return out;
}

}  // namespace sumforge
