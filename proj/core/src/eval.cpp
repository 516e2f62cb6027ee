#include "sumforge/eval.hpp"

#include "sumforge/errors.hpp"

#include "parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_map>

namespace sumforge {

ScoreReport score_corpus(const std::vector<ScorePair>& pairs, const ScoreOptions& options) {
  if (pairs.empty()) throw Error(ErrorCode::kAlignmentError, "no (generated, reference) pairs to score");
  ScoreReport report;
  report.n = pairs.size();
  report.pairs.resize(pairs.size());
  detail::parallel_for(pairs.size(), options.jobs, [&](std::size_t i) {
    report.pairs[i].id = pairs[i].id;
    report.pairs[i].rouge = rouge_suite(pairs[i].generated, pairs[i].reference, options.tokenizer, options.rouge);
  });

  if (options.external) {
    std::unordered_map<std::string, double> by_id(options.external->by_id.begin(), options.external->by_id.end());
    if (by_id.size() != pairs.size()) {
      throw Error(ErrorCode::kAlignmentError, fmt::format("{} external scores for {} pairs", by_id.size(), pairs.size()));
    }
    double sum = 0.0;
    for (auto& p : report.pairs) {
      const auto it = by_id.find(p.id);
      if (it == by_id.end()) throw Error(ErrorCode::kAlignmentError, "no external score for id '" + p.id + "'");
      p.external = it->second;
      sum += it->second;
    }
    report.mean_external = sum / static_cast<double>(report.n);
    report.external_name = options.external->name;
  }

  double r1 = 0.0, r2 = 0.0, rl = 0.0;
  for (const auto& p : report.pairs) {
    r1 += p.rouge.r1.f1;
    r2 += p.rouge.r2.f1;
    rl += p.rouge.rl.f1;
  }
  const double n = static_cast<double>(report.n);
  report.mean_r1 = r1 / n;
  report.mean_r2 = r2 / n;
  report.mean_rl = rl / n;
  return report;
}

namespace {

std::string row_id(const ordered_json& row, std::string_view context, std::size_t index) {
  const auto it = row.find("id");
  if (it == row.end() || !it->is_string()) {
    throw Error(ErrorCode::kAlignmentError, fmt::format("{} row {} has no string id", context, index + 1));
  }
  return it->get<std::string>();
}

std::string row_text(const ordered_json& row, std::initializer_list<const char*> keys, std::string_view context) {
  for (const char* key : keys) {
    const auto it = row.find(key);
    if (it != row.end() && it->is_string()) return it->get<std::string>();
  }
  throw Error(ErrorCode::kAlignmentError, fmt::format("{} row '{}' has no summary text", context,
                                                      row.value("id", std::string("?"))));
}

}  // namespace

std::vector<ScorePair> align_by_id(const std::vector<ordered_json>& predictions,
                                   const std::vector<ordered_json>& references) {
  if (predictions.size() != references.size()) {
    throw Error(ErrorCode::kAlignmentError,
                fmt::format("{} predictions vs {} references", predictions.size(), references.size()));
  }
  if (references.empty()) throw Error(ErrorCode::kAlignmentError, "no references");
  std::unordered_map<std::string, const ordered_json*> by_id;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto id = row_id(predictions[i], "predictions", i);
    if (!by_id.emplace(id, &predictions[i]).second) {
      throw Error(ErrorCode::kAlignmentError, "duplicate prediction id '" + id + "'");
    }
  }
  std::vector<ScorePair> out;
  out.reserve(references.size());
  for (std::size_t i = 0; i < references.size(); ++i) {
    const auto id = row_id(references[i], "references", i);
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::kAlignmentError, "no prediction for reference id '" + id + "'");
    out.push_back({id, row_text(*it->second, {"summary", "prediction"}, "predictions"),
                   row_text(references[i], {"summary", "reference"}, "references")});
    by_id.erase(it);
  }
  return out;
}

ExternalScores read_external_scores(const std::filesystem::path& path, std::string name) {
  ExternalScores scores{std::move(name), {}};
  for_each_jsonl(path, [&](const ordered_json& row, std::size_t line) {
    const auto id = row.find("id");
    const auto score = row.find("score");
    if (id == row.end() || !id->is_string() || score == row.end() || !score->is_number()) {
      throw Error(ErrorCode::kCorpusReadError, fmt::format("{}:{}: need \"id\" and numeric \"score\"", path.string(), line));
    }
    scores.by_id.emplace_back(id->get<std::string>(), score->get<double>());
  });
  return scores;
}

ordered_json to_json(const ScoreReport& report, bool include_pairs) {
  ordered_json means{{"rouge1", 100.0 * report.mean_r1}, {"rouge2", 100.0 * report.mean_r2}, {"rougeL", 100.0 * report.mean_rl}};
  if (report.mean_external) means[report.external_name] = *report.mean_external;
  ordered_json out{{"n", report.n}, {"means", means}};
  if (include_pairs) {
    ordered_json rows = ordered_json::array();
    for (const auto& p : report.pairs) {
      ordered_json row{{"id", p.id},
                       {"rouge1", 100.0 * p.rouge.r1.f1},
                       {"rouge2", 100.0 * p.rouge.r2.f1},
                       {"rougeL", 100.0 * p.rouge.rl.f1}};
      if (p.external) row[report.external_name] = *p.external;
      rows.push_back(std::move(row));
    }
    out["pairs"] = std::move(rows);
  }
  return out;
}

std::string to_table(const ScoreReport& report) {
  std::string out = "n | ROUGE-1 | ROUGE-2 | ROUGE-L";
  if (report.mean_external) out += " | " + report.external_name;
  out += "\n";
  out += fmt::format("{} | {:.2f} | {:.2f} | {:.2f}", report.n, 100.0 * report.mean_r1, 100.0 * report.mean_r2,
                     100.0 * report.mean_rl);
  if (report.mean_external) out += fmt::format(" | {:.4f}", *report.mean_external);
  out += "\n";
  return out;
}

AnovaResult anova_one_way(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(ErrorCode::kDegenerateGroups, "ANOVA needs at least two groups");
  std::size_t total_n = 0;
  double grand_sum = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) {
      throw Error(ErrorCode::kDegenerateGroups, fmt::format("group {} has fewer than two observations", g + 1));
    }
    total_n += groups[g].size();
    for (double v : groups[g]) grand_sum += v;
  }
  const double grand_mean = grand_sum / static_cast<double>(total_n);

  AnovaResult r;
  for (const auto& group : groups) {
    double sum = 0.0;
    for (double v : group) sum += v;
    const double mean = sum / static_cast<double>(group.size());
    r.ss_between += static_cast<double>(group.size()) * (mean - grand_mean) * (mean - grand_mean);
    for (double v : group) r.ss_within += (v - mean) * (v - mean);
  }
  r.df_between = groups.size() - 1;
  r.df_within = total_n - groups.size();
  if (r.ss_within <= 0.0) {
    throw Error(ErrorCode::kDegenerateGroups, "zero within-group variance in every group");
  }
  const double ms_between = r.ss_between / static_cast<double>(r.df_between);
  const double ms_within = r.ss_within / static_cast<double>(r.df_within);
  r.f = ms_between / ms_within;
  r.p = f_distribution_sf(r.f, static_cast<double>(r.df_between), static_cast<double>(r.df_within));
  return r;
}

SignificanceRow significance(std::string dataset, const std::vector<ScoreReport>& runs) {
  std::vector<std::vector<double>> r1, r2, rl;
  for (const auto& run : runs) {
    auto& a = r1.emplace_back();
    auto& b = r2.emplace_back();
    auto& c = rl.emplace_back();
    for (const auto& p : run.pairs) {
      a.push_back(p.rouge.r1.f1);
      b.push_back(p.rouge.r2.f1);
      c.push_back(p.rouge.rl.f1);
    }
  }
  return SignificanceRow{std::move(dataset), anova_one_way(r1), anova_one_way(r2), anova_one_way(rl)};
}

namespace {

ordered_json to_json(const AnovaResult& r) {
  return ordered_json{{"F", r.f}, {"p", r.p}, {"df_between", r.df_between}, {"df_within", r.df_within}};
}

}  // namespace

ordered_json to_json(const std::vector<SignificanceRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& row : rows) {
    out.push_back(ordered_json{
        {"dataset", row.dataset}, {"rouge1", to_json(row.r1)}, {"rouge2", to_json(row.r2)}, {"rougeL", to_json(row.rl)}});
  }
  return out;
}

std::string to_table(const std::vector<SignificanceRow>& rows) {
  std::string out = "Dataset | ROUGE-1 | ROUGE-2 | ROUGE-L\n";
  for (const auto& row : rows) {
    out += fmt::format("{} | {:.3g} | {:.3g} | {:.3g}\n", row.dataset, row.r1.p, row.r2.p, row.rl.p);
  }
  return out;
}

bool length_prescreen(double candidate_len, double reference_len, double tolerance) {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::kInvalidConfig, "length tolerance must be positive");
  const double lower = reference_len / (1.0 + tolerance);
  const double upper = reference_len * (1.0 + tolerance);
  return candidate_len >= lower && candidate_len <= upper;
}

std::string normalize_element(std::string_view raw) {
  const std::string lowered = to_lower(normalize_nfc(raw));
  std::string out;
  bool pending_space = false;
  for (char c : lowered) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

ElementAnnotation ElementAnnotation::from_lists(const std::array<std::vector<std::string>, 4>& lists) {
  ElementAnnotation a;
  for (std::size_t c = 0; c < lists.size(); ++c) {
    for (const auto& raw : lists[c]) {
      auto norm = normalize_element(raw);
      if (!norm.empty()) a.sets[c].insert(std::move(norm));
    }
  }
  return a;
}

ElementAnnotation ElementAnnotation::from_json(const ordered_json& obj) {
  std::array<std::vector<std::string>, 4> lists;
  for (std::size_t c = 0; c < kElementCategories.size(); ++c) {
    const auto it = obj.find(std::string(kElementCategories[c]));
    if (it == obj.end() || it->is_null()) continue;
    if (!it->is_array()) {
      throw Error(ErrorCode::kCorpusReadError, fmt::format("\"{}\" must be an array", kElementCategories[c]));
    }
    for (const auto& e : *it) {
      if (!e.is_string()) {
        throw Error(ErrorCode::kCorpusReadError, fmt::format("\"{}\" entries must be strings", kElementCategories[c]));
      }
      lists[c].push_back(e.get<std::string>());
    }
  }
  return from_lists(lists);
}

std::size_t ElementAnnotation::total() const {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.size();
  return n;
}

int informativeness(const ElementAnnotation& gold, const ElementAnnotation& sys) {
  int info = 0;
  for (std::size_t c = 0; c < gold.sets.size(); ++c) {
    for (const auto& e : sys.sets[c]) info += gold.sets[c].count(e) > 0 ? 1 : 0;
  }
  return info;
}

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::kWin:
      return "Win";
    case Outcome::kEqual:
      return "Equal";
    case Outcome::kFail:
      return "Fail";
  }
  return "Equal";
}

std::string_view to_string(Prescreen prescreen) noexcept {
  switch (prescreen) {
    case Prescreen::kBothPass:
      return "both_pass";
    case Prescreen::kSys1Fail:
      return "sys1_fail";
    case Prescreen::kSys2Fail:
      return "sys2_fail";
    case Prescreen::kBothFail:
      return "both_fail";
  }
  return "both_pass";
}

Verdict verdict(const ElementAnnotation& gold, const ElementAnnotation& sys1, const ElementAnnotation& sys2,
                const Lengths& lengths, double tolerance) {
  Verdict v;
  v.info_1 = informativeness(gold, sys1);
  v.info_2 = informativeness(gold, sys2);
  const bool pass1 = length_prescreen(lengths.sys1, lengths.reference, tolerance);
  const bool pass2 = length_prescreen(lengths.sys2, lengths.reference, tolerance);
  if (!pass1 && !pass2) {
    v.length_prescreen = Prescreen::kBothFail;
    v.outcome = Outcome::kEqual;
  } else if (!pass1) {
    v.length_prescreen = Prescreen::kSys1Fail;
    v.outcome = Outcome::kFail;
  } else if (!pass2) {
    v.length_prescreen = Prescreen::kSys2Fail;
    v.outcome = Outcome::kWin;
  } else {
    v.length_prescreen = Prescreen::kBothPass;
    v.outcome = v.info_1 > v.info_2 ? Outcome::kWin : v.info_1 == v.info_2 ? Outcome::kEqual : Outcome::kFail;
  }
  return v;
}

ordered_json to_json(const Verdict& v) {
  return ordered_json{{"outcome", std::string(to_string(v.outcome))},
                      {"info_1", v.info_1},
                      {"info_2", v.info_2},
                      {"length_prescreen", std::string(to_string(v.length_prescreen))}};
}

namespace {

double row_length(const ordered_json& row, const Tokenizer& tokenizer) {
  if (const auto it = row.find("length"); it != row.end() && it->is_number()) return it->get<double>();
  if (const auto it = row.find("summary"); it != row.end() && it->is_string()) {
    return static_cast<double>(tokenizer.count(it->get<std::string>()));
  }
  return 0.0;
}

std::map<std::string, const ordered_json*> index_rows(const std::vector<ordered_json>& rows, std::string_view context) {
  std::map<std::string, const ordered_json*> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto id = row_id(rows[i], context, i);
    if (!out.emplace(id, &rows[i]).second) {
      throw Error(ErrorCode::kAlignmentError, fmt::format("duplicate {} id '{}'", context, id));
    }
  }
  return out;
}

}  // namespace

ComparisonReport compare(const std::vector<ordered_json>& gold, const std::vector<ordered_json>& sys1,
                         const std::vector<ordered_json>& sys2, const Tokenizer& tokenizer, double tolerance) {
  if (gold.empty()) throw Error(ErrorCode::kAlignmentError, "no gold annotations");
  if (gold.size() != sys1.size() || gold.size() != sys2.size()) {
    throw Error(ErrorCode::kAlignmentError,
                fmt::format("annotation counts differ: gold {}, sys1 {}, sys2 {}", gold.size(), sys1.size(), sys2.size()));
  }
  const auto s1 = index_rows(sys1, "sys1");
  const auto s2 = index_rows(sys2, "sys2");
  ComparisonReport report;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto id = row_id(gold[i], "gold", i);
    const auto a = s1.find(id);
    const auto b = s2.find(id);
    if (a == s1.end() || b == s2.end()) throw Error(ErrorCode::kAlignmentError, "id '" + id + "' missing from a system");
    const Lengths lengths{row_length(gold[i], tokenizer), row_length(*a->second, tokenizer),
                          row_length(*b->second, tokenizer)};
    const auto v = verdict(ElementAnnotation::from_json(gold[i]), ElementAnnotation::from_json(*a->second),
                           ElementAnnotation::from_json(*b->second), lengths, tolerance);
    switch (v.outcome) {
      case Outcome::kWin:
        ++report.wins;
        break;
      case Outcome::kEqual:
        ++report.equals;
        break;
      case Outcome::kFail:
        ++report.fails;
        break;
    }
    report.items.push_back({id, v});
  }
  return report;
}

ordered_json to_json(const ComparisonReport& report) {
  ordered_json items = ordered_json::array();
  for (const auto& item : report.items) {
    ordered_json row{{"id", item.id}};
    row.update(to_json(item.verdict));
    items.push_back(std::move(row));
  }
  return ordered_json{{"n", report.items.size()},
                      {"win", report.wins},
                      {"equal", report.equals},
                      {"fail", report.fails},
                      {"items", items}};
}

std::string to_table(const ComparisonReport& report) {
  const double n = report.items.empty() ? 1.0 : static_cast<double>(report.items.size());
  std::string out = "Outcome | Count | Share\n";
  out += fmt::format("Win | {} | {:.1f}%\n", report.wins, 100.0 * report.wins / n);
  out += fmt::format("Equal | {} | {:.1f}%\n", report.equals, 100.0 * report.equals / n);
  out += fmt::format("Fail | {} | {:.1f}%\n", report.fails, 100.0 * report.fails / n);
  return out;
}

}  // namespace sumforge
