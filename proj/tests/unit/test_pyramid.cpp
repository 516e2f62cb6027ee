#include "test_support.hpp"

#include "sumforge/digest.hpp"
#include "sumforge/errors.hpp"
#include "sumforge/pyramid.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace sumforge;
using testing_support::TempDir;

namespace {

std::vector<DocInput> docs(std::size_t n) {
  std::vector<DocInput> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"d" + std::to_string(i), "text " + std::to_string(i)});
  return out;
}

std::vector<SummaryRecord> tier_records(Tier tier, std::size_t n, const std::string& prefix) {
  std::vector<SummaryRecord> out;
  const Tokenizer tok;
  for (std::size_t i = 0; i < n; ++i) {
    SummaryRecord r;
    r.doc_id = prefix + std::to_string(i);
    r.document = "Document " + std::to_string(i) + ".";
    r.summary = "summary words " + std::string(i % 4, 'x') + " end.";
    r.tier = tier;
    r.token_len = tok.count(r.summary);
    r.tokenizer_id = tok.id();
    out.push_back(r);
  }
  return out;
}

std::set<std::string> ids(const std::vector<DocInput>& d) {
  std::set<std::string> s;
  for (const auto& x : d) s.insert(x.id);
  return s;
}

}  // namespace

TEST(Split, EightTwoDisjointDeterministic) {
  PyramidConfig c;
  c.seed = 7;
  const auto a = split_corpus(docs(10), c);
  EXPECT_EQ(a.ed_source.size(), 8u);
  EXPECT_EQ(a.ad_source.size(), 2u);
  auto ed = ids(a.ed_source);
  for (const auto& id : ids(a.ad_source)) EXPECT_FALSE(ed.count(id));
  ed.merge(ids(a.ad_source));
  EXPECT_EQ(ed, ids(docs(10)));
  const auto b = split_corpus(docs(10), c);
  EXPECT_EQ(ids(a.ad_source), ids(b.ad_source));
}

TEST(Split, SizesWithinOneOfRatio) {
  PyramidConfig c;
  for (std::size_t n = 1; n < 60; ++n) {
    const auto r = split_corpus(docs(n), c);
    EXPECT_LE(std::abs(static_cast<double>(r.ed_source.size()) - 0.8 * static_cast<double>(n)), 1.0);
    EXPECT_EQ(r.ed_source.size() + r.ad_source.size(), n);
  }
}

TEST(Split, PreservesInputOrderAndDedups) {
  auto corpus = docs(20);
  corpus.push_back(corpus[3]);
  const auto r = split_corpus(corpus, PyramidConfig{});
  EXPECT_EQ(r.duplicates_removed, 1u);
  EXPECT_EQ(r.ed_source.size() + r.ad_source.size(), 20u);
  auto index = [](const DocInput& d) { return std::stoi(d.id.substr(1)); };
  for (std::size_t i = 1; i < r.ed_source.size(); ++i) EXPECT_LT(index(r.ed_source[i - 1]), index(r.ed_source[i]));
}

TEST(Split, PoolModes) {
  PyramidConfig fixed;
  fixed.mode = PoolMode::kFixedPool;
  fixed.ad_fraction_tau = 0.3;
  auto r = split_corpus(docs(10), fixed);
  EXPECT_EQ(r.ad_source.size(), 3u);
  EXPECT_EQ(r.ed_source.size(), 7u);
  PyramidConfig inc;
  inc.mode = PoolMode::kIncreasingPool;
  inc.ad_fraction_sigma = 0.5;
  r = split_corpus(docs(10), inc);
  EXPECT_EQ(r.ed_source.size(), 10u);
  EXPECT_EQ(r.ad_source.size(), 5u);
}

TEST(Split, Errors) {
  try {
    split_corpus({}, PyramidConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCorpus);
  }
  PyramidConfig bad;
  bad.ed_ratio = 0.7;
  EXPECT_THROW(split_corpus(docs(3), bad), Error);
}

TEST(Assemble, WritesTiersAndManifest) {
  TempDir tmp;
  AssembleOptions o;
  o.seed = 5;
  o.config_digest = "abc";
  const auto ed = tier_records(Tier::kED, 40, "e");
  const auto ad = tier_records(Tier::kAD, 10, "a");
  const auto hd = tier_records(Tier::kHD, 5, "h");
  const auto r = assemble(ed, ad, hd, tmp.path(), o);
  EXPECT_EQ(r.manifest.ed.count, 40u);
  EXPECT_EQ(r.manifest.ad.count, 10u);
  EXPECT_EQ(r.manifest.hd.count, 5u);
  for (const char* f : {"ED.jsonl", "AD.jsonl", "HD.jsonl", "manifest.json", "stats.json"}) {
    EXPECT_TRUE(std::filesystem::exists(tmp / f)) << f;
  }
  EXPECT_EQ(r.manifest_digest, sha256_file(tmp / "manifest.json"));
  EXPECT_EQ(r.manifest.ed.sha256, sha256_file(tmp / "ED.jsonl"));

  TempDir again;
  EXPECT_EQ(assemble(ed, ad, hd, again.path(), o).manifest_digest, r.manifest_digest);

  const auto loaded = load_pyramid(tmp.path());
  EXPECT_EQ(loaded.ed.size(), 40u);
  EXPECT_EQ(dump_line(to_json(loaded.hd[2])), dump_line(to_json(hd[2])));
  // Round trip: stats from disk equal stats on the inputs.
  EXPECT_EQ(dump_line(to_json(stats(tmp.path()))),
            dump_line(to_json(PyramidStats{tier_stats(ed), tier_stats(ad), tier_stats(hd)})));
}

TEST(Assemble, ValidationBeforeWriting) {
  TempDir tmp;
  auto ed = tier_records(Tier::kED, 3, "e");
  ed[1].token_len += 1;
  try {
    assemble(ed, {}, tier_records(Tier::kHD, 2, "h"), tmp / "out", AssembleOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTierViolation);
  }
  EXPECT_FALSE(std::filesystem::exists(tmp / "out"));

  try {
    assemble(tier_records(Tier::kAD, 1, "x"), {}, {}, tmp / "out", AssembleOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTierViolation);
  }
  auto mixed = tier_records(Tier::kED, 1, "e");
  mixed[0].tokenizer_id = "vocab:0123456789abcdef";
  try {
    assemble(mixed, {}, {}, tmp / "out", AssembleOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTokenizerMismatch);
  }
}

TEST(Load, DetectsTamperedTier) {
  TempDir tmp;
  assemble(tier_records(Tier::kED, 2, "e"), {}, tier_records(Tier::kHD, 2, "h"), tmp.path(), AssembleOptions{});
  testing_support::write_text(tmp / "ED.jsonl", testing_support::read_text(tmp / "ED.jsonl") + "\n");
  try {
    load_pyramid(tmp.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorpusReadError);
  }
}

TEST(Stats, MomentsAndEmptyTier) {
  std::vector<SummaryRecord> rs(3);
  rs[0].token_len = 60;
  rs[1].token_len = 64;
  rs[2].token_len = 68;
  const auto s = tier_stats(rs);
  EXPECT_EQ(s.sample_count, 3u);
  EXPECT_EQ(*s.length_mean, 64.0);
  EXPECT_EQ(*s.length_std, 4.0);
  const auto empty = tier_stats({});
  EXPECT_EQ(empty.sample_count, 0u);
  EXPECT_FALSE(empty.length_mean);
  EXPECT_FALSE(empty.length_std);
  const PyramidStats p{s, empty, s};
  const auto j = to_json(p);
  EXPECT_TRUE(j["AD"]["length_mean"].is_null());
  const auto table = to_table(p);
  EXPECT_NE(table.find("Sample Number / Length Mean±std"), std::string::npos);
  EXPECT_NE(table.find("ED    | 3 / 64±4"), std::string::npos);
  EXPECT_NE(table.find("AD    | 0 / -"), std::string::npos);
}

TEST(Subsample, Properties) {
  const auto hd = tier_records(Tier::kHD, 100, "h");
  EXPECT_EQ(subsample_hd(hd, 100, 1).size(), 100u);
  for (std::size_t k : {10u, 50u, 100u}) {
    const auto a = subsample_hd(hd, k, 3);
    const auto b = subsample_hd(hd, k, 3);
    ASSERT_EQ(a.size(), k);
    for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(a[i].doc_id, b[i].doc_id);
    std::set<std::string> unique;
    for (const auto& r : a) unique.insert(r.doc_id);
    EXPECT_EQ(unique.size(), k);
  }
  for (std::size_t k : {0u, 101u}) {
    try {
      subsample_hd(hd, k, 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidK);
    }
  }
}

TEST(PyramidConfig, JsonRoundTrip) {
  PyramidConfig c;
  c.mode = PoolMode::kFixedPool;
  c.ad_fraction_tau = 0.4;
  c.seed = 99;
  const auto back = pyramid_config_from_json(to_json(c));
  EXPECT_EQ(back.mode, PoolMode::kFixedPool);
  EXPECT_EQ(back.ad_fraction_tau, 0.4);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_THROW(pyramid_config_from_json(ordered_json::parse(R"({"mode":"nope"})")), Error);
}
