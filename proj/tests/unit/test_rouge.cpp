#include "oracles.hpp"

#include "sumforge/errors.hpp"
#include "sumforge/rng.hpp"
#include "sumforge/rouge.hpp"

#include <gtest/gtest.h>

using namespace sumforge;

namespace {

TokenSeq words(std::string_view s) { return tokenize(s, TokenizerMode::kWord); }

TokenSeq random_tokens(Engine& rng, std::size_t max_len, std::size_t alphabet) {
  TokenSeq t(uniform_below(rng, max_len + 1));
  for (auto& x : t) x = "w" + std::to_string(uniform_below(rng, alphabet));
  return t;
}

}  // namespace

TEST(RougeN, HandCases) {
  auto s = rouge_n(words("the cat sat"), words("the cat sat"), 1);
  EXPECT_DOUBLE_EQ(s.f1, 1.0);
  s = rouge_n(words("a b c"), words("x y z"), 1);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  s = rouge_n(words("the cat sat"), words("the cat ran"), 1);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3.0);
  s = rouge_n(words("the cat sat on"), words("the cat ran on"), 2);
  EXPECT_DOUBLE_EQ(s.precision, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 1.0 / 3.0);
}

TEST(RougeN, ClippedCounts) {
  const auto s = rouge_n(TokenSeq{"a", "a", "a"}, TokenSeq{"a"}, 1);
  EXPECT_DOUBLE_EQ(s.precision, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
}

TEST(RougeN, InvalidN) { EXPECT_THROW(rouge_n(TokenSeq{"a"}, TokenSeq{"a"}, 0), Error); }

TEST(RougeL, HandCases) {
  auto s = rouge_l(words("a b c d"), words("a c b d"));
  EXPECT_DOUBLE_EQ(s.precision, 0.75);
  EXPECT_DOUBLE_EQ(s.recall, 0.75);
  s = rouge_l(TokenSeq{}, TokenSeq{"a"});
  EXPECT_EQ(s.f1, 0.0);
  s = rouge_l(words("x y z"), words("x y z"));
  EXPECT_DOUBLE_EQ(s.f1, 1.0);
}

TEST(RougeSuite, Examples) {
  auto s = rouge_suite("the cat sat", "the cat sat");
  EXPECT_DOUBLE_EQ(s.r1.f1, 1.0);
  EXPECT_DOUBLE_EQ(s.r2.f1, 1.0);
  EXPECT_DOUBLE_EQ(s.rl.f1, 1.0);
  s = rouge_suite("the cat sat", "the cat ran");
  EXPECT_DOUBLE_EQ(s.r1.f1, 2.0 / 3.0);
  s = rouge_suite("", "anything");
  EXPECT_EQ(s.r1.f1, 0.0);
  EXPECT_EQ(s.r2.f1, 0.0);
  EXPECT_EQ(s.rl.f1, 0.0);
}

TEST(RougeSuite, PunctuationDroppedByDefault) {
  const auto s = rouge_suite("the cat sat .", "the cat sat");
  EXPECT_DOUBLE_EQ(s.r1.f1, 1.0);
  RougeOptions keep;
  keep.keep_punctuation = true;
  EXPECT_LT(rouge_suite("the cat sat .", "the cat sat", Tokenizer::word(), keep).r1.f1, 1.0);
}

TEST(RougeSuite, StemAndStopwords) {
  RougeOptions o;
  o.stem = true;
  EXPECT_DOUBLE_EQ(rouge_suite("cats running", "cat runs", Tokenizer::word(), o).r1.f1, 1.0);
  o = {};
  o.remove_stopwords = true;
  EXPECT_DOUBLE_EQ(rouge_suite("the cat", "a cat", Tokenizer::word(), o).r1.f1, 1.0);
}

TEST(RougeOracle, RandomAgainstBruteForce) {
  Engine rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_tokens(rng, 30, 8);
    const auto b = random_tokens(rng, 30, 8);
    for (std::size_t n = 1; n <= 3; ++n) {
      const auto got = rouge_n(a, b, static_cast<int>(n));
      const auto want = oracle::prf(oracle::rouge_n_counts(a, b, n));
      EXPECT_NEAR(got.precision, want.p, 1e-12);
      EXPECT_NEAR(got.recall, want.r, 1e-12);
      EXPECT_NEAR(got.f1, want.f, 1e-12);
    }
    const auto got = rouge_l(a, b);
    const auto want = oracle::prf(oracle::lcs_counts(a, b));
    EXPECT_NEAR(got.f1, want.f, 1e-12);
    EXPECT_NEAR(got.recall, want.r, 1e-12);
  }
}

TEST(RougeProperties, SymmetricF1AndBounds) {
  Engine rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_tokens(rng, 20, 5);
    const auto b = random_tokens(rng, 20, 5);
    const auto ab = rouge_n(a, b, 1);
    const auto ba = rouge_n(b, a, 1);
    EXPECT_NEAR(ab.f1, ba.f1, 1e-15);
    EXPECT_NEAR(ab.precision, ba.recall, 1e-15);
    EXPECT_GE(ab.f1, 0.0);
    EXPECT_LE(ab.f1, 1.0);
    // Every LCS is a common subsequence of unigrams, so it cannot beat R1.
    EXPECT_LE(rouge_l(a, b).f1, ab.f1 + 1e-15);
  }
}

TEST(Porter, ReferenceVocabulary) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"caresses", "caress"}, {"ponies", "poni"},        {"ties", "ti"},          {"caress", "caress"},
      {"cats", "cat"},        {"feed", "feed"},          {"agreed", "agre"},      {"plastered", "plaster"},
      {"motoring", "motor"},  {"sing", "sing"},          {"conflated", "conflat"}, {"troubled", "troubl"},
      {"sized", "size"},      {"hopping", "hop"},        {"falling", "fall"},     {"filing", "file"},
      {"happy", "happi"},     {"relational", "relat"},   {"conditional", "condit"}, {"rational", "ration"},
      {"digitizer", "digit"}, {"generalization", "gener"}, {"hopeful", "hope"},     {"goodness", "good"},
      {"revival", "reviv"},   {"adjustable", "adjust"},  {"effective", "effect"}, {"controll", "control"},
      {"roll", "roll"},       {"as", "as"}};
  for (const auto& [in, out] : cases) EXPECT_EQ(porter_stem(in), out) << in;
  EXPECT_EQ(porter_stem("Running"), "Running");
}
