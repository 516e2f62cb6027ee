#include "sumforge/theory.hpp"

#include "sumforge/digest.hpp"
#include "sumforge/errors.hpp"

#include "parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <numeric>

namespace sumforge {

namespace {

void check_normalized(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kNotNormalized, fmt::format("negative or NaN probability {}", v));
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorCode::kNotNormalized, fmt::format("probabilities sum to {:.17g}", sum));
  }
}

double entropy_unchecked(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

constexpr std::size_t kMaxVariables = 16;

}  // namespace

double entropy(std::span<const double> p) {
  check_normalized(p);
  return entropy_unchecked(p);
}

JointDistribution::JointDistribution(std::vector<std::string> names, std::vector<std::size_t> sizes,
                                     std::vector<double> p)
    : names_(std::move(names)), sizes_(std::move(sizes)), p_(std::move(p)) {
  if (names_.size() != sizes_.size() || names_.empty() || names_.size() > kMaxVariables) {
    throw Error(ErrorCode::kInvalidConfig, "joint needs 1-16 variables with one size each");
  }
  std::size_t cells = 1;
  for (std::size_t s : sizes_) {
    if (s == 0) throw Error(ErrorCode::kInvalidConfig, "empty alphabet");
    cells *= s;
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    for (std::size_t k = i + 1; k < names_.size(); ++k) {
      if (names_[i] == names_[k]) throw Error(ErrorCode::kInvalidConfig, "duplicate variable " + names_[i]);
    }
  }
  if (p_.size() != cells) {
    throw Error(ErrorCode::kInvalidConfig, fmt::format("expected {} probabilities, got {}", cells, p_.size()));
  }
  check_normalized(p_);
}

bool JointDistribution::has(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t JointDistribution::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error(ErrorCode::kUnknownVariable, "no variable named '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::uint32_t JointDistribution::mask_of(const std::vector<std::string>& vars) const {
  std::uint32_t mask = 0;
  for (const auto& v : vars) mask |= 1u << index_of(v);
  return mask;
}

std::vector<double> JointDistribution::marginal_mask(std::uint32_t mask) const {
  const std::size_t n = names_.size();
  // Output strides for the kept variables, last kept variable fastest.
  std::vector<std::size_t> out_stride(n, 0);
  std::size_t out_size = 1;
  for (std::size_t v = n; v-- > 0;) {
    if (mask & (1u << v)) {
      out_stride[v] = out_size;
      out_size *= sizes_[v];
    }
  }
  std::vector<double> out(out_size, 0.0);
  std::vector<std::size_t> digit(n, 0);
  std::size_t target = 0;
  for (double value : p_) {
    out[target] += value;
    for (std::size_t v = n; v-- > 0;) {
      ++digit[v];
      target += out_stride[v];
      if (digit[v] < sizes_[v]) break;
      target -= out_stride[v] * digit[v];
      digit[v] = 0;
    }
  }
  return out;
}

std::vector<double> JointDistribution::marginal(const std::vector<std::string>& vars) const {
  return marginal_mask(mask_of(vars));
}

double JointDistribution::entropy_mask(std::uint32_t mask) const {
  if (mask == 0) return 0.0;
  return entropy_unchecked(marginal_mask(mask));
}

double JointDistribution::entropy(const std::vector<std::string>& vars) const { return entropy_mask(mask_of(vars)); }

double JointDistribution::conditional_entropy(const std::vector<std::string>& targets,
                                              const std::vector<std::string>& given) const {
  const std::uint32_t a = mask_of(targets);
  const std::uint32_t b = mask_of(given);
  return entropy_mask(a | b) - entropy_mask(b);
}

ordered_json JointDistribution::to_json() const {
  ordered_json vars = ordered_json::array();
  for (std::size_t i = 0; i < names_.size(); ++i) vars.push_back({{"name", names_[i]}, {"size", sizes_[i]}});
  return ordered_json{{"variables", vars}, {"p", p_}};
}

JointDistribution JointDistribution::from_json(const ordered_json& obj) {
  try {
    std::vector<std::string> names;
    std::vector<std::size_t> sizes;
    for (const auto& v : obj.at("variables")) {
      names.push_back(v.at("name").get<std::string>());
      sizes.push_back(v.at("size").get<std::size_t>());
    }
    return JointDistribution(std::move(names), std::move(sizes), obj.at("p").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("joint: ") + e.what());
  }
}

std::string JointDistribution::digest() const { return sha256_hex(dump_line(to_json())); }

namespace {

// Subset entropies of one joint, each marginal computed at most once.
class EntropyTable {
 public:
  explicit EntropyTable(const JointDistribution& joint) : joint_(joint) {}

  double h(std::uint32_t mask) {
    if (mask >= values_.size()) return joint_.entropy_mask(mask);
    if (!known_[mask]) {
      values_[mask] = joint_.entropy_mask(mask);
      known_[mask] = true;
    }
    return values_[mask];
  }
  double cond(std::uint32_t a, std::uint32_t b) { return h(a | b) - h(b); }

 private:
  const JointDistribution& joint_;
  std::array<double, 128> values_{};
  std::bitset<128> known_;
};

struct Masks {
  std::uint32_t y, z, j1, j2, j3;
  std::optional<std::uint32_t> x;

  explicit Masks(const JointDistribution& j)
      : y(j.mask_of({"Y"})), z(j.mask_of({"Z"})), j1(j.mask_of({"J1"})), j2(j.mask_of({"J2"})), j3(j.mask_of({"J3"})) {
    if (j.has("X")) x = j.mask_of({"X"});
  }
};

AssumptionCheck check_with(EntropyTable& t, const Masks& m) {
  AssumptionCheck c;
  const double z1 = t.cond(m.z, m.j1), z2 = t.cond(m.z, m.j2), z3 = t.cond(m.z, m.j3);
  const double y1 = t.cond(m.y, m.j1), y2 = t.cond(m.y, m.j2), y3 = t.cond(m.y, m.j3);
  c.ineq1 = z1 > z2 && z2 > z3;
  c.ineq2 = y1 > y2;
  c.ineq3 = y2 < y3;
  if (m.x) {
    const double x1 = t.cond(*m.x, m.j1), x2 = t.cond(*m.x, m.j2), x3 = t.cond(*m.x, m.j3);
    c.ineq4 = x1 < x2 && x2 < x3;
  }
  return c;
}

GainReport gains_with(EntropyTable& t, const Masks& m, const AssumptionCheck& check) {
  GainReport g;
  const std::uint32_t yz = m.y | m.z;
  g.g_hybrid = std::abs(t.cond(yz, m.j3) - t.cond(yz, m.j1));
  g.g_hierarchical =
      std::abs(t.cond(m.y, m.j2) - t.cond(m.y, m.j1)) + std::abs(t.cond(m.z, m.j3) - t.cond(m.z, m.j2));
  g.assumption_satisfied = check.satisfied();
  g.hierarchical_wins = g.g_hierarchical > g.g_hybrid;
  return g;
}

// H(A | B) from the conditional distributions, -sum p(a,b) log p(a|b),
// without going through H(A,B) - H(B).
double direct_conditional(const JointDistribution& joint, std::uint32_t a, std::uint32_t b) {
  const auto p_ab = joint.marginal_mask(a | b);
  const auto& sizes = joint.sizes();
  const std::size_t n = sizes.size();
  const std::uint32_t ab = a | b;
  // Map each cell of the (a|b) marginal onto its b-marginal cell.
  std::vector<std::size_t> b_stride(n, 0);
  std::size_t b_size = 1;
  for (std::size_t v = n; v-- > 0;) {
    if (b & (1u << v)) {
      b_stride[v] = b_size;
      b_size *= sizes[v];
    }
  }
  std::vector<std::size_t> kept;
  for (std::size_t v = 0; v < n; ++v) {
    if (ab & (1u << v)) kept.push_back(v);
  }
  std::vector<std::size_t> b_index(p_ab.size(), 0);
  std::vector<std::size_t> digit(kept.size(), 0);
  for (std::size_t cell = 0; cell < p_ab.size(); ++cell) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < kept.size(); ++k) idx += digit[k] * b_stride[kept[k]];
    b_index[cell] = idx;
    for (std::size_t k = kept.size(); k-- > 0;) {
      if (++digit[k] < sizes[kept[k]]) break;
      digit[k] = 0;
    }
  }
  std::vector<double> p_b(b_size, 0.0);
  for (std::size_t cell = 0; cell < p_ab.size(); ++cell) p_b[b_index[cell]] += p_ab[cell];
  double h = 0.0;
  for (std::size_t cell = 0; cell < p_ab.size(); ++cell) {
    const double v = p_ab[cell];
    if (v > 0.0) h -= v * std::log2(v / p_b[b_index[cell]]);
  }
  return h;
}

AuditItem item(std::string name, AuditKind kind, double lhs, double rhs) {
  return AuditItem{std::move(name), kind, lhs, rhs, std::abs(lhs - rhs)};
}

std::vector<AuditItem> audit_with(const JointDistribution& joint, EntropyTable& t, const Masks& m) {
  std::vector<AuditItem> out;
  const std::uint32_t yz = m.y | m.z;
  const std::array<std::pair<const char*, std::uint32_t>, 3> js = {{{"J1", m.j1}, {"J2", m.j2}, {"J3", m.j3}}};

  for (const auto& [name, j] : js) {
    // H(Y,Z|J) = H(Z|Y,J) + H(Y|J) and = H(Y|Z,J) + H(Z|J)
    const double hyz = direct_conditional(joint, yz, j);
    out.push_back(item(fmt::format("chain_rule H(Y,Z|{0}) = H(Z|Y,{0}) + H(Y|{0})", name), AuditKind::kIdentity, hyz,
                       direct_conditional(joint, m.z, m.y | j) + direct_conditional(joint, m.y, j)));
    out.push_back(item(fmt::format("chain_rule H(Y,Z|{0}) = H(Y|Z,{0}) + H(Z|{0})", name), AuditKind::kIdentity, hyz,
                       direct_conditional(joint, m.y, m.z | j) + direct_conditional(joint, m.z, j)));
  }

  const double hyz1 = t.cond(yz, m.j1), hyz3 = t.cond(yz, m.j3);
  const double hy1 = t.cond(m.y, m.j1), hy2 = t.cond(m.y, m.j2);
  const double hz2 = t.cond(m.z, m.j2), hz3 = t.cond(m.z, m.j3);
  const double hz_y1 = t.cond(m.z, m.y | m.j1);
  const double hy_z3 = t.cond(m.y, m.z | m.j3);

  const double difference = std::abs(hyz3 - hyz1) - std::abs(hy2 - hy1) - std::abs(hz3 - hz2);
  const double signed_sum = (hyz1 - hyz3) + (hy2 - hy1) + (hz3 - hz2);
  out.push_back(item("remove_absolute_values", AuditKind::kAssumptionDependent, difference, signed_sum));

  const double printed = (hyz1 - hy1) + (hy1 - hz2) - (hyz3 - hz3);
  const double corrected = (hyz1 - hy1) + (hy2 - hz2) - (hyz3 - hz3);
  out.push_back(item("regroup_as_printed", AuditKind::kAssumptionDependent, signed_sum, printed));
  out.push_back(item("regroup_corrected", AuditKind::kIdentity, signed_sum, corrected));

  const double chain_form = (hz_y1 - hz2) + (hy2 - hy_z3);
  out.push_back(item("regroup_to_conditionals", AuditKind::kIdentity, corrected, chain_form));
  out.push_back(item("implicit H(Z|Y,J1) = H(Z|J2)", AuditKind::kAssumptionDependent, hz_y1, hz2));
  out.push_back(item("final_term H(Y|J2) - H(Y|Z,J3) vs 0", AuditKind::kAssumptionDependent, hy2 - hy_z3, 0.0));
  return out;
}

}  // namespace

AssumptionCheck check_assumption(const JointDistribution& joint) {
  EntropyTable t(joint);
  return check_with(t, Masks(joint));
}

GainReport gains(const JointDistribution& joint) {
  EntropyTable t(joint);
  const Masks m(joint);
  return gains_with(t, m, check_with(t, m));
}

std::vector<AuditItem> identity_audit(const JointDistribution& joint) {
  EntropyTable t(joint);
  return audit_with(joint, t, Masks(joint));
}

JointDistribution random_joint(Engine& rng, std::size_t alphabet, bool model_x) {
  std::vector<std::string> names;
  if (model_x) names.push_back("X");
  names.insert(names.end(), kTheoryVariables.begin(), kTheoryVariables.end());
  std::vector<std::size_t> sizes(names.size(), alphabet);
  std::size_t cells = 1;
  for (std::size_t s : sizes) cells *= s;
  // Normalized Exp(1) draws are a Dirichlet(1, ..., 1) sample.
  std::vector<double> p(cells);
  double sum = 0.0;
  for (double& v : p) {
    v = -std::log(uniform_open_closed(rng));
    sum += v;
  }
  if (sum == 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(cells));
  } else {
    for (double& v : p) v /= sum;
  }
  return JointDistribution(std::move(names), std::move(sizes), std::move(p));
}

bool MonteCarloReport::identities_hold(double tolerance) const {
  return max_identity_delta <= tolerance && max_negative_entropy <= tolerance && max_conditioning_excess <= tolerance;
}

namespace {

constexpr std::size_t kShardSize = 256;

void accumulate_sample(MonteCarloReport& r, const JointDistribution& joint, std::size_t max_joints) {
  EntropyTable t(joint);
  const Masks m(joint);
  const auto check = check_with(t, m);
  const auto g = gains_with(t, m, check);
  const auto audit = audit_with(joint, t, m);

  ++r.n_samples;
  r.n_ineq1 += check.ineq1;
  r.n_ineq2 += check.ineq2;
  r.n_ineq3 += check.ineq3;
  r.n_ineq4 += check.ineq4.value_or(false);

  for (const auto& a : audit) {
    if (a.kind == AuditKind::kIdentity) r.max_identity_delta = std::max(r.max_identity_delta, a.delta);
  }

  // Nonnegativity and conditioning-reduces-entropy over every ordered pair
  // of distinct variables.
  const std::size_t n = joint.names().size();
  for (std::size_t a = 0; a < n; ++a) {
    const double ha = t.h(1u << a);
    r.max_negative_entropy = std::max(r.max_negative_entropy, -ha);
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const double cond = t.cond(1u << a, 1u << b);
      r.max_negative_entropy = std::max(r.max_negative_entropy, -cond);
      r.max_conditioning_excess = std::max(r.max_conditioning_excess, cond - ha);
    }
  }

  auto find = [&](std::string_view prefix) -> const AuditItem& {
    for (const auto& a : audit) {
      if (a.name.starts_with(prefix)) return a;
    }
    return audit.front();
  };
  const auto& printed = find("regroup_as_printed");
  if (printed.delta > 1e-9) ++r.n_printed_regroup_mismatch;
  r.max_printed_regroup_delta = std::max(r.max_printed_regroup_delta, printed.delta);
  const auto& implicit = find("implicit");
  r.max_implicit_step_delta = std::max(r.max_implicit_step_delta, implicit.delta);
  r.sum_implicit_step_delta += implicit.delta;
  const bool final_negative = find("final_term").lhs < 0.0;
  r.n_final_term_negative += final_negative;

  if (check.satisfied()) {
    ++r.n_assumption_satisfied;
    r.n_final_term_negative_satisfied += final_negative;
    if (find("remove_absolute_values").delta <= 1e-9) ++r.n_abs_removal_valid;
    if (g.hierarchical_wins) {
      ++r.n_hierarchical_wins;
    } else {
      r.counterexamples.push_back(joint.digest());
      if (r.counterexample_joints.size() < max_joints) r.counterexample_joints.push_back(joint.to_json());
    }
  }
}

void merge(MonteCarloReport& into, MonteCarloReport&& from, std::size_t max_joints) {
  into.n_samples += from.n_samples;
  into.n_assumption_satisfied += from.n_assumption_satisfied;
  into.n_hierarchical_wins += from.n_hierarchical_wins;
  into.n_ineq1 += from.n_ineq1;
  into.n_ineq2 += from.n_ineq2;
  into.n_ineq3 += from.n_ineq3;
  into.n_ineq4 += from.n_ineq4;
  into.counterexamples.insert(into.counterexamples.end(), from.counterexamples.begin(), from.counterexamples.end());
  for (auto& j : from.counterexample_joints) {
    if (into.counterexample_joints.size() >= max_joints) break;
    into.counterexample_joints.push_back(std::move(j));
  }
  into.max_identity_delta = std::max(into.max_identity_delta, from.max_identity_delta);
  into.max_negative_entropy = std::max(into.max_negative_entropy, from.max_negative_entropy);
  into.max_conditioning_excess = std::max(into.max_conditioning_excess, from.max_conditioning_excess);
  into.n_printed_regroup_mismatch += from.n_printed_regroup_mismatch;
  into.max_printed_regroup_delta = std::max(into.max_printed_regroup_delta, from.max_printed_regroup_delta);
  into.max_implicit_step_delta = std::max(into.max_implicit_step_delta, from.max_implicit_step_delta);
  into.sum_implicit_step_delta += from.sum_implicit_step_delta;
  into.n_abs_removal_valid += from.n_abs_removal_valid;
  into.n_final_term_negative += from.n_final_term_negative;
  into.n_final_term_negative_satisfied += from.n_final_term_negative_satisfied;
}

}  // namespace

MonteCarloReport run_monte_carlo(const MonteCarloOptions& options) {
  if (options.alphabet < 1 || options.alphabet > 8) {
    throw Error(ErrorCode::kInvalidConfig, "alphabet size must be in [1, 8]");
  }
  const std::size_t shards = (options.samples + kShardSize - 1) / kShardSize;
  std::vector<MonteCarloReport> parts(shards);
  detail::parallel_for(shards, options.jobs, [&](std::size_t s) {
    Engine rng(splitmix64(options.seed ^ splitmix64(s)));
    const std::size_t begin = s * kShardSize;
    const std::size_t end = std::min(options.samples, begin + kShardSize);
    for (std::size_t i = begin; i < end; ++i) {
      accumulate_sample(parts[s], random_joint(rng, options.alphabet, options.model_x),
                        options.max_counterexample_joints);
    }
  });
  MonteCarloReport report;
  report.seed = options.seed;
  report.alphabet = options.alphabet;
  for (auto& part : parts) merge(report, std::move(part), options.max_counterexample_joints);
  return report;
}

namespace {

ordered_json fraction(std::size_t num, std::size_t den) {
  if (den == 0) return nullptr;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ordered_json to_json(const MonteCarloReport& r) {
  return ordered_json{
      {"n_samples", r.n_samples},
      {"n_assumption_satisfied", r.n_assumption_satisfied},
      {"n_hierarchical_wins", r.n_hierarchical_wins},
      {"counterexamples", r.counterexamples},
      {"seed", r.seed},
      {"alphabet_size", r.alphabet},
      {"hierarchical_win_fraction", fraction(r.n_hierarchical_wins, r.n_assumption_satisfied)},
      {"inequalities", {{"ineq1", r.n_ineq1}, {"ineq2", r.n_ineq2}, {"ineq3", r.n_ineq3}, {"ineq4", r.n_ineq4}}},
      {"identities",
       {{"max_chain_rule_delta", r.max_identity_delta},
        {"max_negative_entropy", r.max_negative_entropy},
        {"max_conditioning_excess", r.max_conditioning_excess},
        {"hold", r.identities_hold()}}},
      {"derivation",
       {{"printed_regroup_mismatches", r.n_printed_regroup_mismatch},
        {"max_printed_regroup_delta", r.max_printed_regroup_delta},
        {"abs_removal_valid_given_assumption", r.n_abs_removal_valid},
        {"implicit_step_max_delta", r.max_implicit_step_delta},
        {"implicit_step_mean_delta",
         r.n_samples == 0 ? ordered_json(nullptr)
                          : ordered_json(r.sum_implicit_step_delta / static_cast<double>(r.n_samples))},
        {"final_term_negative", r.n_final_term_negative},
        {"final_term_negative_given_assumption", r.n_final_term_negative_satisfied}}},
      {"counterexample_joints", r.counterexample_joints},
  };
}

std::string to_table(const MonteCarloReport& r) {
  auto pct = [](std::size_t num, std::size_t den) {
    return den == 0 ? std::string("n/a") : fmt::format("{:.2f}%", 100.0 * static_cast<double>(num) / den);
  };
  std::string out;
  out += fmt::format("samples                      {}\n", r.n_samples);
  out += fmt::format("assumption satisfied         {} ({})\n", r.n_assumption_satisfied, pct(r.n_assumption_satisfied, r.n_samples));
  out += fmt::format("G_hi > G_hy | assumption     {} ({})\n", r.n_hierarchical_wins,
                     pct(r.n_hierarchical_wins, r.n_assumption_satisfied));
  out += fmt::format("counterexamples              {}\n", r.counterexamples.size());
  out += fmt::format("identities hold (1e-9)       {}\n", r.identities_hold() ? "yes" : "no");
  out += fmt::format("printed regroup mismatches   {}\n", r.n_printed_regroup_mismatch);
  out += fmt::format("implicit step max |delta|    {:.6g}\n", r.max_implicit_step_delta);
  out += fmt::format("final term < 0 | assumption  {} ({})\n", r.n_final_term_negative_satisfied,
                     pct(r.n_final_term_negative_satisfied, r.n_assumption_satisfied));
  return out;
}

}  // namespace sumforge
