#include "sumforge/resample.hpp"

#include "sumforge/digest.hpp"
#include "sumforge/errors.hpp"

#include <cmath>

namespace sumforge {

namespace {
__extension__ using int128 = __int128;
}  // namespace

LengthModel LengthModel::from_moments(double mu, double sigma, std::size_t sample_count, std::string tokenizer_id) {
  LengthModel model;
  model.mu = mu;
  model.sigma = sigma;
  model.lower = mu - 2.0 * sigma;
  model.upper = mu + 2.0 * sigma;
  model.sample_count = sample_count;
  model.tokenizer_id = std::move(tokenizer_id);
  return model;
}

std::string length_digest(std::span<const std::int64_t> lengths) {
  Sha256 hasher;
  for (const auto len : lengths) hasher.update(std::to_string(len)).update("\n");
  return hasher.hex_digest();
}

LengthModel fit(std::span<const std::int64_t> lengths, std::string tokenizer_id) {
  if (lengths.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "need at least 2 lengths to fit a length model, got " + std::to_string(lengths.size()));
  }
  int128 sum = 0;
  int128 sum_sq = 0;
  for (const auto len : lengths) {
    if (len < 0) throw Error(ErrorCode::kInsufficientData, "token lengths must be non-negative");
    sum += len;
    sum_sq += static_cast<int128>(len) * len;
  }
  const auto n = static_cast<int128>(lengths.size());
  // n * sum_sq - sum^2 is exact; only the final division and sqrt round.
  const int128 scatter = n * sum_sq - sum * sum;
  const long double mean = static_cast<long double>(sum) / static_cast<long double>(n);
  const long double variance = static_cast<long double>(scatter) / static_cast<long double>(n * (n - 1));
  LengthModel model = LengthModel::from_moments(static_cast<double>(mean),
                                                static_cast<double>(std::sqrt(variance)), lengths.size(),
                                                std::move(tokenizer_id));
  model.sample_digest = length_digest(lengths);
  return model;
}

LengthModel fit_records(const std::vector<SummaryRecord>& records) {
  std::vector<std::int64_t> lengths;
  lengths.reserve(records.size());
  std::string tokenizer_id = records.empty() ? "word" : records.front().tokenizer_id;
  for (const auto& r : records) {
    if (!r.tokenizer_id.empty() && r.tokenizer_id != tokenizer_id) {
      throw Error(ErrorCode::kTokenizerMismatch, "record \"" + r.doc_id + "\" uses tokenizer " + r.tokenizer_id +
                                                     ", expected " + tokenizer_id);
    }
    lengths.push_back(static_cast<std::int64_t>(r.token_len));
  }
  return fit(lengths, tokenizer_id.empty() ? "word" : tokenizer_id);
}

ResampleResult resample(const std::vector<SummaryRecord>& records, const LengthModel& model) {
  ResampleResult out;
  for (const auto& r : records) {
    if (!r.tokenizer_id.empty() && r.tokenizer_id != model.tokenizer_id) {
      throw Error(ErrorCode::kTokenizerMismatch, "record \"" + r.doc_id + "\" measured with " + r.tokenizer_id +
                                                     " but the length model uses " + model.tokenizer_id);
    }
    if (model.contains(static_cast<double>(r.token_len))) {
      out.kept.push_back(r);
    } else {
      ++out.dropped;
    }
  }
  return out;
}

ResampleReport make_report(std::size_t input, std::size_t kept) {
  ResampleReport report;
  report.input = input;
  report.kept = kept;
  report.dropped = input - kept;
  report.retention_rate = input == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(input);
  return report;
}

ordered_json to_json(const LengthModel& model) {
  ordered_json obj = ordered_json::object();
  obj["mu"] = model.mu;
  obj["sigma"] = model.sigma;
  obj["lower"] = model.lower;
  obj["upper"] = model.upper;
  obj["sample_count"] = model.sample_count;
  obj["tokenizer_id"] = model.tokenizer_id;
  obj["sample_digest"] = model.sample_digest;
  return obj;
}

LengthModel length_model_from_json(const ordered_json& obj) {
  try {
    LengthModel model = LengthModel::from_moments(obj.at("mu").get<double>(), obj.at("sigma").get<double>(),
                                                  obj.value("sample_count", std::size_t{0}),
                                                  obj.value("tokenizer_id", std::string("word")));
    // Stored bounds win so a hand-edited interval is honoured.
    model.lower = obj.value("lower", model.lower);
    model.upper = obj.value("upper", model.upper);
    model.sample_digest = obj.value("sample_digest", std::string{});
    if (model.lower > model.upper) throw Error(ErrorCode::kInvalidConfig, "length model has lower > upper");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("length model: ") + e.what());
  }
}

ordered_json to_json(const ResampleReport& report) {
  ordered_json obj = ordered_json::object();
  obj["input"] = report.input;
  obj["kept"] = report.kept;
  obj["dropped"] = report.dropped;
  obj["retention_rate"] = report.retention_rate;
  return obj;
}

}  // namespace sumforge
