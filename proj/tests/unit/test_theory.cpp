#include "sumforge/errors.hpp"
#include "sumforge/theory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace sumforge;

namespace {

// Brute-force H(A|B) straight from the joint cells: group cells by the
// values of B and of A∪B with std::map keys.
double oracle_conditional(const JointDistribution& j, const std::vector<std::string>& a,
                          const std::vector<std::string>& b) {
  const auto& sizes = j.sizes();
  const auto& p = j.probabilities();
  std::vector<std::size_t> ia, ib;
  for (const auto& n : a) ia.push_back(j.index_of(n));
  for (const auto& n : b) ib.push_back(j.index_of(n));
  std::map<std::vector<std::size_t>, double> pab, pb;
  std::vector<std::size_t> digits(sizes.size(), 0);
  for (std::size_t cell = 0; cell < p.size(); ++cell) {
    std::size_t rem = cell;
    for (std::size_t v = sizes.size(); v-- > 0;) {
      digits[v] = rem % sizes[v];
      rem /= sizes[v];
    }
    std::vector<std::size_t> kb, kab;
    for (auto i : ib) kb.push_back(digits[i]);
    kab = kb;
    for (auto i : ia) kab.push_back(digits[i]);
    pab[kab] += p[cell];
    pb[kb] += p[cell];
  }
  double h = 0.0;
  for (const auto& [k, v] : pab) {
    if (v <= 0) continue;
    const std::vector<std::size_t> kb(k.begin(), k.begin() + static_cast<long>(ib.size()));
    h -= v * std::log2(v / pb[kb]);
  }
  return h;
}

JointDistribution two_bits(std::vector<double> p) { return JointDistribution({"A", "B"}, {2, 2}, std::move(p)); }

}  // namespace

TEST(Entropy, HandCases) {
  EXPECT_EQ(entropy(std::vector<double>{0.5, 0.25, 0.25}), 1.5);
  EXPECT_EQ(entropy(std::vector<double>{1.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 2.0);
}

TEST(Entropy, NotNormalized) {
  for (const auto& bad : {std::vector<double>{0.5, 0.4}, std::vector<double>{1.2, -0.2}}) {
    try {
      entropy(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNotNormalized);
    }
  }
}

TEST(Joint, MarginalsAndConditionals) {
  // A uniform, B = A: H(A) = 1, H(A|B) = 0, H(A,B) = 1.
  const auto j = two_bits({0.5, 0.0, 0.0, 0.5});
  EXPECT_DOUBLE_EQ(j.entropy({"A"}), 1.0);
  EXPECT_DOUBLE_EQ(j.entropy({"A", "B"}), 1.0);
  EXPECT_NEAR(j.conditional_entropy({"A"}, {"B"}), 0.0, 1e-15);
  const auto ind = two_bits({0.25, 0.25, 0.25, 0.25});
  EXPECT_DOUBLE_EQ(ind.conditional_entropy({"A"}, {"B"}), 1.0);
  EXPECT_EQ(ind.marginal({"B"}), (std::vector<double>{0.5, 0.5}));
  const auto skew = two_bits({0.1, 0.2, 0.3, 0.4});
  EXPECT_NEAR(skew.marginal({"A"})[0], 0.3, 1e-15);
  EXPECT_NEAR(skew.marginal({"B"})[0], 0.4, 1e-15);
}

TEST(Joint, Errors) {
  try {
    two_bits({0.25, 0.25, 0.25, 0.25}).entropy({"Q"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownVariable);
  }
  EXPECT_THROW(two_bits({0.5, 0.5, 0.5, 0.5}), Error);
  EXPECT_THROW(JointDistribution({"A"}, {2}, {1.0}), Error);
}

TEST(Joint, JsonRoundTripAndDigest) {
  Engine rng(1);
  const auto j = random_joint(rng, 2);
  const auto back = JointDistribution::from_json(j.to_json());
  EXPECT_EQ(back.digest(), j.digest());
  EXPECT_EQ(back.names(), kTheoryVariables);
  EXPECT_EQ(j.digest().size(), 64u);
}

TEST(Joint, OracleAgreement) {
  Engine rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto j = random_joint(rng, 2 + trial % 2, trial % 3 == 0);
    for (const auto& [a, b] : std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>{
             {{"Y"}, {"J1"}}, {{"Z"}, {"Y", "J1"}}, {{"Y", "Z"}, {"J3"}}, {{"J2"}, {"Y", "Z", "J1"}}}) {
      EXPECT_NEAR(j.conditional_entropy(a, b), oracle_conditional(j, a, b), 1e-12);
    }
  }
}

TEST(Assumption, ConstructedCases) {
  // Y, Z fair bits; each J_k is Y xor Z seen through a binary channel that
  // flips with probability noise[k].
  const double noise[3] = {0.3, 0.1, 0.2};
  std::vector<double> p(32, 0.0);
  for (std::size_t cell = 0; cell < 32; ++cell) {
    const std::size_t y = cell >> 4 & 1, z = cell >> 3 & 1;
    const std::size_t js[3] = {cell >> 2 & 1, cell >> 1 & 1, cell & 1};
    double w = 0.25;
    for (int k = 0; k < 3; ++k) w *= js[k] == (y ^ z) ? 1.0 - noise[k] : noise[k];
    p[cell] = w;
  }
  const JointDistribution j(kTheoryVariables, {2, 2, 2, 2, 2}, p);
  const auto c = check_assumption(j);
  EXPECT_FALSE(c.ineq4.has_value());
  EXPECT_EQ(c.breakdown().size(), 3u);
  EXPECT_EQ(c.satisfied(), c.ineq1 && c.ineq2 && c.ineq3);
  // J_k carries no information about Y or Z alone, so every strict inequality fails.
  EXPECT_FALSE(c.ineq1 || c.ineq2 || c.ineq3);
  // Check each inequality against direct entropies.
  const double y1 = j.conditional_entropy({"Y"}, {"J1"}), y2 = j.conditional_entropy({"Y"}, {"J2"}),
               y3 = j.conditional_entropy({"Y"}, {"J3"});
  const double z1 = j.conditional_entropy({"Z"}, {"J1"}), z2 = j.conditional_entropy({"Z"}, {"J2"}),
               z3 = j.conditional_entropy({"Z"}, {"J3"});
  EXPECT_EQ(c.ineq1, z1 > z2 && z2 > z3);
  EXPECT_EQ(c.ineq2, y1 > y2);
  EXPECT_EQ(c.ineq3, y2 < y3);

  Engine rng(4);
  const auto withx = random_joint(rng, 2, true);
  EXPECT_TRUE(check_assumption(withx).ineq4.has_value());
}

TEST(Gains, MatchDefinitions) {
  Engine rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const auto j = random_joint(rng, 2);
    const auto g = gains(j);
    const double ghy = std::abs(oracle_conditional(j, {"Y", "Z"}, {"J3"}) - oracle_conditional(j, {"Y", "Z"}, {"J1"}));
    const double ghi = std::abs(oracle_conditional(j, {"Y"}, {"J2"}) - oracle_conditional(j, {"Y"}, {"J1"})) +
                       std::abs(oracle_conditional(j, {"Z"}, {"J3"}) - oracle_conditional(j, {"Z"}, {"J2"}));
    EXPECT_NEAR(g.g_hybrid, ghy, 1e-12);
    EXPECT_NEAR(g.g_hierarchical, ghi, 1e-12);
    EXPECT_EQ(g.hierarchical_wins, g.g_hierarchical > g.g_hybrid);
    EXPECT_EQ(g.assumption_satisfied, check_assumption(j).satisfied());
  }
}

TEST(Audit, IdentitiesHoldAssumptionStepsReported) {
  Engine rng(21);
  bool printed_mismatch_seen = false;
  for (int trial = 0; trial < 200; ++trial) {
    const auto items = identity_audit(random_joint(rng, 3));
    std::size_t chain = 0;
    for (const auto& it : items) {
      if (it.kind == AuditKind::kIdentity) {
        EXPECT_LE(it.delta, 1e-9) << it.name;
      }
      if (it.name.rfind("chain_rule", 0) == 0) ++chain;
      if (it.name == "regroup_as_printed" && it.delta > 1e-9) printed_mismatch_seen = true;
    }
    EXPECT_EQ(chain, 6u);
  }
  EXPECT_TRUE(printed_mismatch_seen);
}

TEST(MonteCarlo, IdentitiesAndDeterminismAcrossJobs) {
  MonteCarloOptions o;
  o.samples = 1000;
  o.seed = 5;
  o.jobs = 1;
  const auto a = run_monte_carlo(o);
  o.jobs = 4;
  const auto b = run_monte_carlo(o);
  EXPECT_EQ(dump_line(to_json(a)), dump_line(to_json(b)));
  EXPECT_EQ(a.n_samples, 1000u);
  EXPECT_TRUE(a.identities_hold());
  EXPECT_LE(a.n_hierarchical_wins, a.n_samples);
  EXPECT_LE(a.n_assumption_satisfied, a.n_samples);
  EXPECT_LE(a.counterexample_joints.size(), o.max_counterexample_joints);
  const auto j = to_json(a);
  auto it = j.begin();
  for (const char* key : {"n_samples", "n_assumption_satisfied", "n_hierarchical_wins", "counterexamples"}) {
    EXPECT_EQ(it.key(), key);
    ++it;
  }
  EXPECT_NE(to_table(a).find("identities hold"), std::string::npos);
  o.seed = 6;
  EXPECT_NE(dump_line(to_json(run_monte_carlo(o))), dump_line(j));
}

TEST(MonteCarlo, CounterexamplesAreReplayable) {
  MonteCarloOptions o;
  o.samples = 3000;
  o.alphabet = 2;
  const auto r = run_monte_carlo(o);
  ASSERT_EQ(r.counterexamples.size() >= r.counterexample_joints.size(), true);
  for (std::size_t i = 0; i < r.counterexample_joints.size(); ++i) {
    const auto j = JointDistribution::from_json(r.counterexample_joints[i]);
    EXPECT_EQ(j.digest(), r.counterexamples[i]);
    const auto g = gains(j);
    EXPECT_TRUE(g.assumption_satisfied);
    EXPECT_LE(g.g_hierarchical, g.g_hybrid);
  }
}
