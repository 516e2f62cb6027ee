#pragma once

#include "sumforge/jsonl.hpp"
#include "sumforge/rouge.hpp"
#include "sumforge/textcore.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sumforge {

struct ScorePair {
  std::string id;
  std::string generated;
  std::string reference;
};

struct PairScore {
  std::string id;
  RougeSuite rouge;
  std::optional<double> external;
};

// Means are of per-pair F1 values in [0, 1]; reports scale them by 100.
struct ScoreReport {
  std::vector<PairScore> pairs;
  double mean_r1 = 0.0;
  double mean_r2 = 0.0;
  double mean_rl = 0.0;
  std::optional<double> mean_external;
  std::string external_name;
  std::size_t n = 0;
};

// Precomputed per-pair scores from a model-based scorer, keyed by pair id.
struct ExternalScores {
  std::string name;
  std::vector<std::pair<std::string, double>> by_id;
};

struct ScoreOptions {
  Tokenizer tokenizer;
  RougeOptions rouge;
  unsigned jobs = 0;
  std::optional<ExternalScores> external;
};

// kAlignmentError for an empty input or when external scores do not cover
// exactly the pair ids.
ScoreReport score_corpus(const std::vector<ScorePair>& pairs, const ScoreOptions& options = {});

// Joins predictions {"id","summary"} with references ({"id","summary"} or
// {"id","reference"}) in reference order. kAlignmentError when the id sets
// or line counts differ.
std::vector<ScorePair> align_by_id(const std::vector<ordered_json>& predictions,
                                   const std::vector<ordered_json>& references);
ExternalScores read_external_scores(const std::filesystem::path& path, std::string name);

ordered_json to_json(const ScoreReport& report, bool include_pairs = true);
std::string to_table(const ScoreReport& report);

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  double ss_between = 0.0;
  double ss_within = 0.0;
};

// One-way fixed-effects ANOVA. kDegenerateGroups with fewer than two
// groups, a group below two observations, or when the pooled within-group
// variance is zero.
AnovaResult anova_one_way(const std::vector<std::vector<double>>& groups);

// I_x(a, b) by the modified Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
// P(F > f) for F ~ F(d1, d2).
double f_distribution_sf(double f, double d1, double d2);

struct SignificanceRow {
  std::string dataset;
  AnovaResult r1;
  AnovaResult r2;
  AnovaResult rl;
};

// ANOVA across repeated runs, one group of per-pair F1 values per run.
SignificanceRow significance(std::string dataset, const std::vector<ScoreReport>& runs);
ordered_json to_json(const std::vector<SignificanceRow>& rows);
// "Dataset | ROUGE-1 | ROUGE-2 | ROUGE-L" with p-values.
std::string to_table(const std::vector<SignificanceRow>& rows);

inline constexpr double kDefaultLengthTolerance = 1.0;

// True when candidate_len lies inside
// [reference_len / (1 + tolerance), reference_len * (1 + tolerance)].
bool length_prescreen(double candidate_len, double reference_len, double tolerance = kDefaultLengthTolerance);

inline constexpr std::array<std::string_view, 4> kElementCategories = {"entities", "dates", "events", "results"};

// Lowercases, trims and collapses internal whitespace; the default
// comparator's canonical form.
std::string normalize_element(std::string_view raw);

struct ElementAnnotation {
  std::array<std::set<std::string>, 4> sets;

  // Normalizes every element and drops empty ones.
  static ElementAnnotation from_lists(const std::array<std::vector<std::string>, 4>& lists);
  static ElementAnnotation from_json(const ordered_json& obj);
  std::size_t total() const;
};

int informativeness(const ElementAnnotation& gold, const ElementAnnotation& sys);

enum class Outcome { kWin, kEqual, kFail };
enum class Prescreen { kBothPass, kSys1Fail, kSys2Fail, kBothFail };

std::string_view to_string(Outcome outcome) noexcept;
std::string_view to_string(Prescreen prescreen) noexcept;

struct Lengths {
  double reference = 0.0;
  double sys1 = 0.0;
  double sys2 = 0.0;
};

// Outcome from system 1's point of view.
struct Verdict {
  Outcome outcome = Outcome::kEqual;
  int info_1 = 0;
  int info_2 = 0;
  Prescreen length_prescreen = Prescreen::kBothPass;
};

Verdict verdict(const ElementAnnotation& gold, const ElementAnnotation& sys1, const ElementAnnotation& sys2,
                const Lengths& lengths, double tolerance = kDefaultLengthTolerance);

ordered_json to_json(const Verdict& v);

struct ComparisonItem {
  std::string id;
  Verdict verdict;
};

struct ComparisonReport {
  std::vector<ComparisonItem> items;
  std::size_t wins = 0;
  std::size_t equals = 0;
  std::size_t fails = 0;
};

// Joins gold/sys1/sys2 annotation rows by id; lengths are token counts of
// the optional "summary" field of each row (0 when absent) unless a row has
// an explicit "length".
ComparisonReport compare(const std::vector<ordered_json>& gold, const std::vector<ordered_json>& sys1,
                         const std::vector<ordered_json>& sys2, const Tokenizer& tokenizer,
                         double tolerance = kDefaultLengthTolerance);
ordered_json to_json(const ComparisonReport& report);
std::string to_table(const ComparisonReport& report);

}  // namespace sumforge
