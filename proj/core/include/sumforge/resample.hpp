#pragma once

#include "sumforge/jsonl.hpp"
#include "sumforge/record.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sumforge {

// Gaussian model of summary token lengths with its mu +/- 2 sigma
// retention interval (about 95% of the mass).
struct LengthModel {
  double mu = 0.0;
  double sigma = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t sample_count = 0;
  std::string tokenizer_id = "word";
  // SHA-256 over the fitted lengths (decimal, one per line, input order).
  std::string sample_digest;

  static LengthModel from_moments(double mu, double sigma, std::size_t sample_count = 0,
                                  std::string tokenizer_id = "word");

  bool degenerate() const { return sigma == 0.0; }
  bool contains(double length) const { return lower <= length && length <= upper; }
};

// Arithmetic mean and sample (n - 1) standard deviation, accumulated exactly
// in 128-bit integers. kInsufficientData for fewer than two lengths. A zero
// sigma is allowed; callers should warn via LengthModel::degenerate().
LengthModel fit(std::span<const std::int64_t> lengths, std::string tokenizer_id = "word");
LengthModel fit_records(const std::vector<SummaryRecord>& records);

std::string length_digest(std::span<const std::int64_t> lengths);

struct ResampleResult {
  std::vector<SummaryRecord> kept;
  std::size_t dropped = 0;
};

// Keeps records with lower <= token_len <= upper, order preserved.
// kTokenizerMismatch when a record declares a tokenizer other than the
// model's.
ResampleResult resample(const std::vector<SummaryRecord>& records, const LengthModel& model);

struct ResampleReport {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  double retention_rate = 0.0;
};

ResampleReport make_report(std::size_t input, std::size_t kept);

ordered_json to_json(const LengthModel& model);
LengthModel length_model_from_json(const ordered_json& obj);
ordered_json to_json(const ResampleReport& report);

}  // namespace sumforge
