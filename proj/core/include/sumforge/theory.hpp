#pragma once

#include "sumforge/jsonl.hpp"
#include "sumforge/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sumforge {

inline constexpr double kNormalizationTolerance = 1e-9;

// Shannon entropy in bits with 0 log 0 = 0. kNotNormalized when an entry is
// negative or the sum is off by more than kNormalizationTolerance.
double entropy(std::span<const double> p);

// Finite joint distribution over named variables. Cells are stored row-major
// with the last variable varying fastest.
class JointDistribution {
 public:
  JointDistribution(std::vector<std::string> names, std::vector<std::size_t> sizes, std::vector<double> p);

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  const std::vector<double>& probabilities() const { return p_; }
  bool has(std::string_view name) const;

  // kUnknownVariable for names not in the joint.
  std::size_t index_of(std::string_view name) const;
  std::uint32_t mask_of(const std::vector<std::string>& vars) const;

  // Marginal over `vars` in the joint's own variable order.
  std::vector<double> marginal(const std::vector<std::string>& vars) const;
  std::vector<double> marginal_mask(std::uint32_t mask) const;

  double entropy(const std::vector<std::string>& vars) const;
  double entropy_mask(std::uint32_t mask) const;
  // H(A|B) = H(A,B) - H(B).
  double conditional_entropy(const std::vector<std::string>& targets, const std::vector<std::string>& given) const;

  // {"variables": [{"name", "size"}...], "p": [...]}
  ordered_json to_json() const;
  static JointDistribution from_json(const ordered_json& obj);
  std::string digest() const;

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> sizes_;
  std::vector<double> p_;
};

// Canonical variable names: X (optional), Y, Z and the model-ability
// variables J1 = J(p_x), J2 = J(p_{x,y}), J3 = J(p_{x,y,z}).
inline const std::vector<std::string> kTheoryVariables = {"Y", "Z", "J1", "J2", "J3"};

struct AssumptionCheck {
  bool ineq1 = false;  // H(Z|J1) > H(Z|J2) > H(Z|J3)
  bool ineq2 = false;  // H(Y|J1) > H(Y|J2)
  bool ineq3 = false;  // H(Y|J2) < H(Y|J3)
  // H(X|J1) < H(X|J2) < H(X|J3); only evaluated when X is in the joint.
  std::optional<bool> ineq4;

  // Inequalities 1-3; inequality 4 is reported but never required.
  bool satisfied() const { return ineq1 && ineq2 && ineq3; }
  std::vector<bool> breakdown() const { return {ineq1, ineq2, ineq3}; }
};

AssumptionCheck check_assumption(const JointDistribution& joint);

struct GainReport {
  double g_hybrid = 0.0;        // |H(Y,Z|J3) - H(Y,Z|J1)|
  double g_hierarchical = 0.0;  // |H(Y|J2) - H(Y|J1)| + |H(Z|J3) - H(Z|J2)|
  bool assumption_satisfied = false;
  bool hierarchical_wins = false;  // g_hierarchical > g_hybrid
};

GainReport gains(const JointDistribution& joint);

enum class AuditKind {
  kIdentity,             // must hold for every joint
  kAssumptionDependent,  // reported, never asserted
};

struct AuditItem {
  std::string name;
  AuditKind kind = AuditKind::kIdentity;
  double lhs = 0.0;
  double rhs = 0.0;
  double delta = 0.0;  // |lhs - rhs|
};

// Every step of the G_hy - G_hi derivation, evaluated numerically, plus the
// chain-rule identities it relies on. Includes both the regrouping as
// printed and the algebraically consistent one.
std::vector<AuditItem> identity_audit(const JointDistribution& joint);

// Dirichlet(1) joint over Y, Z, J1, J2, J3 (and X first when requested),
// each with `alphabet` values.
JointDistribution random_joint(Engine& rng, std::size_t alphabet = 3, bool model_x = false);

struct MonteCarloOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::size_t alphabet = 3;
  bool model_x = false;
  unsigned jobs = 0;  // 0 = hardware concurrency
  std::size_t max_counterexample_joints = 16;
};

struct MonteCarloReport {
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::size_t alphabet = 0;
  std::size_t n_assumption_satisfied = 0;
  std::size_t n_hierarchical_wins = 0;
  std::size_t n_ineq1 = 0;
  std::size_t n_ineq2 = 0;
  std::size_t n_ineq3 = 0;
  std::size_t n_ineq4 = 0;
  // Digests of assumption-satisfying joints with G_hi <= G_hy.
  std::vector<std::string> counterexamples;
  std::vector<ordered_json> counterexample_joints;

  double max_identity_delta = 0.0;
  double max_negative_entropy = 0.0;
  double max_conditioning_excess = 0.0;  // max of H(A|B) - H(A)
  std::size_t n_printed_regroup_mismatch = 0;
  double max_printed_regroup_delta = 0.0;
  double max_implicit_step_delta = 0.0;
  double sum_implicit_step_delta = 0.0;
  std::size_t n_abs_removal_valid = 0;  // among assumption-satisfying joints
  std::size_t n_final_term_negative = 0;
  std::size_t n_final_term_negative_satisfied = 0;

  bool identities_hold(double tolerance = 1e-9) const;
};

// Samples are drawn in fixed-size shards whose seeds derive from the master
// seed, so the report does not depend on the worker count.
MonteCarloReport run_monte_carlo(const MonteCarloOptions& options);

ordered_json to_json(const MonteCarloReport& report);
std::string to_table(const MonteCarloReport& report);

}  // namespace sumforge
