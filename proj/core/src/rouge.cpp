#include "sumforge/rouge.hpp"

#include "sumforge/errors.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace sumforge {

namespace detail {
extern const std::string_view kStopwordsData;
}  // namespace detail

namespace {

// Interns the tokens of both sequences into dense ids so n-gram windows can
// be hashed without building strings.
struct Interned {
  std::vector<std::uint32_t> candidate;
  std::vector<std::uint32_t> reference;
};

Interned intern(std::span<const std::string> candidate, std::span<const std::string> reference) {
  std::unordered_map<std::string_view, std::uint32_t> ids;
  ids.reserve(candidate.size() + reference.size());
  auto map = [&](std::span<const std::string> seq) {
    std::vector<std::uint32_t> out;
    out.reserve(seq.size());
    for (const auto& tok : seq) {
      auto [it, inserted] = ids.try_emplace(tok, static_cast<std::uint32_t>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  Interned result;
  result.candidate = map(candidate);
  result.reference = map(reference);
  return result;
}

struct WindowHash {
  const std::vector<std::uint32_t>* seq;
  std::size_t n;
  std::size_t operator()(std::size_t start) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t k = 0; k < n; ++k) {
      h ^= (*seq)[start + k];
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

struct WindowEq {
  const std::vector<std::uint32_t>* seq;
  std::size_t n;
  bool operator()(std::size_t a, std::size_t b) const {
    return std::equal(seq->begin() + static_cast<std::ptrdiff_t>(a),
                      seq->begin() + static_cast<std::ptrdiff_t>(a + n),
                      seq->begin() + static_cast<std::ptrdiff_t>(b));
  }
};

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = [] {
    std::unordered_set<std::string> out;
    const std::string_view data = detail::kStopwordsData;
    std::size_t pos = 0;
    while (pos < data.size()) {
      std::size_t end = data.find('\n', pos);
      if (end == std::string_view::npos) end = data.size();
      std::string_view line = data.substr(pos, end - pos);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
      if (!line.empty() && line.front() != '#') out.emplace(line);
      pos = end + 1;
    }
    return out;
  }();
  return words;
}

}  // namespace

RougeScore RougeScore::from_counts(std::size_t overlap, std::size_t candidate_total,
                                   std::size_t reference_total) {
  RougeScore s;
  if (candidate_total > 0) s.precision = static_cast<double>(overlap) / static_cast<double>(candidate_total);
  if (reference_total > 0) s.recall = static_cast<double>(overlap) / static_cast<double>(reference_total);
  if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidN, "n must be >= 1, got " + std::to_string(n));
  const auto width = static_cast<std::size_t>(n);
  const std::size_t cand_total = candidate.size() >= width ? candidate.size() - width + 1 : 0;
  const std::size_t ref_total = reference.size() >= width ? reference.size() - width + 1 : 0;
  if (cand_total == 0 || ref_total == 0) return RougeScore::from_counts(0, cand_total, ref_total);

  // Both sequences share one id space; windows are addressed by their start
  // offset into the concatenation `cand ++ ref`.
  Interned ids = intern(candidate, reference);
  std::vector<std::uint32_t> joined = std::move(ids.candidate);
  const std::size_t ref_offset = joined.size();
  joined.insert(joined.end(), ids.reference.begin(), ids.reference.end());

  std::unordered_map<std::size_t, std::size_t, WindowHash, WindowEq> ref_counts(
      ref_total * 2, WindowHash{&joined, width}, WindowEq{&joined, width});
  for (std::size_t i = 0; i < ref_total; ++i) ++ref_counts[ref_offset + i];

  std::size_t overlap = 0;
  for (std::size_t i = 0; i < cand_total; ++i) {
    auto it = ref_counts.find(i);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return RougeScore::from_counts(overlap, cand_total, ref_total);
}

RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  const auto cand = candidate.first(std::min(candidate.size(), kLcsTokenCap));
  const auto ref = reference.first(std::min(reference.size(), kLcsTokenCap));
  if (cand.empty() || ref.empty()) return RougeScore::from_counts(0, cand.size(), ref.size());

  const Interned ids = intern(cand, ref);
  std::vector<std::uint32_t> prev(ids.reference.size() + 1, 0);
  std::vector<std::uint32_t> curr(ids.reference.size() + 1, 0);
  for (const std::uint32_t a : ids.candidate) {
    for (std::size_t j = 1; j <= ids.reference.size(); ++j) {
      curr[j] = a == ids.reference[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return RougeScore::from_counts(prev.back(), cand.size(), ref.size());
}

bool is_stopword(std::string_view lowered) { return stopwords().count(std::string(lowered)) > 0; }

TokenSeq prepare_tokens(TokenSeq tokens, const RougeOptions& options) {
  if (!options.keep_punctuation || options.remove_stopwords) {
    std::erase_if(tokens, [&](const std::string& t) {
      return (!options.keep_punctuation && is_punctuation_token(t)) ||
             (options.remove_stopwords && is_stopword(t));
    });
  }
  if (options.stem) {
    for (auto& t : tokens) t = porter_stem(t);
  }
  return tokens;
}

RougeSuite rouge_suite(std::string_view candidate, std::string_view reference, const Tokenizer& tokenizer,
                       const RougeOptions& options) {
  const TokenSeq cand = prepare_tokens(tokenizer.tokenize(candidate), options);
  const TokenSeq ref = prepare_tokens(tokenizer.tokenize(reference), options);
  return {rouge_n(cand, ref, 1), rouge_n(cand, ref, 2), rouge_l(cand, ref)};
}

}  // namespace sumforge
