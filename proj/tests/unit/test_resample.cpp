#include "sumforge/errors.hpp"
#include "sumforge/resample.hpp"
#include "sumforge/rng.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace sumforge;

namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

std::pair<double, double> big_moments(const std::vector<std::int64_t>& xs) {
  Big sum = 0;
  for (auto x : xs) sum += Big(x);
  const Big mean = sum / Big(xs.size());
  Big ss = 0;
  for (auto x : xs) ss += (Big(x) - mean) * (Big(x) - mean);
  const Big var = ss / Big(xs.size() - 1);
  return {mean.convert_to<double>(), boost::multiprecision::sqrt(var).convert_to<double>()};
}

std::vector<SummaryRecord> records_with(const std::vector<std::size_t>& lens, std::string tok = "word") {
  std::vector<SummaryRecord> out;
  for (std::size_t i = 0; i < lens.size(); ++i) {
    SummaryRecord r;
    r.doc_id = "r" + std::to_string(i);
    r.token_len = lens[i];
    r.tokenizer_id = tok;
    out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> lens_of(const std::vector<SummaryRecord>& rs) {
  std::vector<std::size_t> out;
  for (const auto& r : rs) out.push_back(r.token_len);
  return out;
}

}  // namespace

TEST(Fit, SmallExample) {
  const std::vector<std::int64_t> xs = {60, 64, 68};
  const auto m = fit(xs);
  EXPECT_EQ(m.mu, 64.0);
  EXPECT_EQ(m.sigma, 4.0);
  EXPECT_EQ(m.lower, 56.0);
  EXPECT_EQ(m.upper, 72.0);
  EXPECT_EQ(m.sample_count, 3u);
  EXPECT_EQ(m.sample_digest, length_digest(xs));
}

TEST(Fit, TableIntervals) {
  auto m = LengthModel::from_moments(64, 17);
  EXPECT_EQ(m.lower, 30.0);
  EXPECT_EQ(m.upper, 98.0);
  m = LengthModel::from_moments(34, 10);
  EXPECT_EQ(m.lower, 14.0);
  EXPECT_EQ(m.upper, 54.0);
}

TEST(Fit, ZeroVarianceIsDegenerateNotError) {
  const std::vector<std::int64_t> xs = {50, 50, 50};
  const auto m = fit(xs);
  EXPECT_TRUE(m.degenerate());
  EXPECT_EQ(m.lower, 50.0);
  EXPECT_EQ(m.upper, 50.0);
}

TEST(Fit, InsufficientData) {
  const std::vector<std::int64_t> one = {5};
  try {
    fit(one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
  EXPECT_THROW(fit(std::vector<std::int64_t>{}), Error);
}

TEST(Fit, ExactAgainstMultiprecision) {
  Engine rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::int64_t> xs(2 + uniform_below(rng, 60));
    // Large offset with small spread: naive sum-of-squares loses digits here.
    const std::int64_t offset = static_cast<std::int64_t>(uniform_below(rng, 1'000'000'000));
    for (auto& x : xs) x = offset + static_cast<std::int64_t>(uniform_below(rng, 200));
    const auto m = fit(xs);
    const auto [mu, sigma] = big_moments(xs);
    EXPECT_NEAR(m.mu, mu, 1e-9 * std::abs(mu));
    if (sigma > 0) {
      EXPECT_NEAR(m.sigma, sigma, 1e-9 * sigma);
    } else {
      EXPECT_EQ(m.sigma, 0.0);
    }
    EXPECT_NEAR(m.upper - m.lower, 4 * m.sigma, 1e-6);
  }
}

TEST(Resample, InclusiveBounds) {
  const auto m = LengthModel::from_moments(64, 17);
  const auto r = resample(records_with({29, 30, 98, 99}), m);
  EXPECT_EQ(lens_of(r.kept), (std::vector<std::size_t>{30, 98}));
  EXPECT_EQ(r.dropped, 2u);
}

TEST(Resample, AllInside) {
  const auto r = resample(records_with({40, 50, 60}), LengthModel::from_moments(50, 10));
  EXPECT_EQ(r.dropped, 0u);
  EXPECT_EQ(r.kept.size(), 3u);
}

TEST(Resample, TokenizerMismatch) {
  try {
    resample(records_with({40}, "vocab:abc"), LengthModel::from_moments(50, 10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTokenizerMismatch);
  }
}

TEST(Resample, IdempotentStableMonotone) {
  Engine rng(3);
  std::vector<std::size_t> lens(500);
  for (auto& l : lens) l = uniform_below(rng, 150);
  const auto recs = records_with(lens);
  const auto narrow = LengthModel::from_moments(64, 10);
  const auto wide = LengthModel::from_moments(64, 20);
  const auto once = resample(recs, narrow);
  const auto twice = resample(once.kept, narrow);
  EXPECT_EQ(lens_of(once.kept), lens_of(twice.kept));
  EXPECT_EQ(twice.dropped, 0u);
  EXPECT_EQ(once.kept.size() + once.dropped, recs.size());
  std::vector<std::string> ids;
  for (const auto& r : once.kept) ids.push_back(r.doc_id);
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
    return std::stoi(a.substr(1)) < std::stoi(b.substr(1));
  }));
  const auto wider = resample(recs, wide);
  std::set<std::string> wide_ids;
  for (const auto& r : wider.kept) wide_ids.insert(r.doc_id);
  for (const auto& id : ids) EXPECT_TRUE(wide_ids.count(id));
}

TEST(Resample, MonteCarloRetention) {
  Engine rng(64);
  const auto m = LengthModel::from_moments(64, 17);
  std::size_t kept = 0;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) {
    // Box-Muller on the library's own uniform helper.
    const double u1 = uniform_open_closed(rng);
    const double u2 = uniform_open_closed(rng);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    if (m.contains(std::round(64.0 + 17.0 * z))) ++kept;
  }
  EXPECT_NEAR(static_cast<double>(kept) / n, 0.9545, 0.005);
}

TEST(Report, Json) {
  const auto r = make_report(10, 7);
  EXPECT_EQ(r.dropped, 3u);
  EXPECT_DOUBLE_EQ(r.retention_rate, 0.7);
  EXPECT_EQ(dump_line(to_json(make_report(0, 0))), "{\"input\":0,\"kept\":0,\"dropped\":0,\"retention_rate\":0.0}");
  const auto m = fit(std::vector<std::int64_t>{60, 64, 68});
  const auto back = length_model_from_json(to_json(m));
  EXPECT_EQ(back.mu, m.mu);
  EXPECT_EQ(back.sigma, m.sigma);
  EXPECT_EQ(back.sample_digest, m.sample_digest);
}
