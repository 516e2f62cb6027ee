#pragma once

#include "sumforge/textcore.hpp"

#include <span>
#include <string>
#include <string_view>

namespace sumforge {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // Zero denominators give a zero component; f1 is 0 when p + r == 0.
  static RougeScore from_counts(std::size_t overlap, std::size_t candidate_total,
                                std::size_t reference_total);
};

// Which component of a RougeScore is used as a scalar score.
enum class RougeVariant { kF1, kRecall };

inline double select(const RougeScore& score, RougeVariant variant) {
  return variant == RougeVariant::kF1 ? score.f1 : score.recall;
}

// Token preprocessing applied by rouge_suite and sentence selection. The
// defaults drop punctuation-only tokens and nothing else.
struct RougeOptions {
  bool keep_punctuation = false;
  bool stem = false;
  bool remove_stopwords = false;
};

// Longest input (in tokens) considered by rouge_l; longer sequences are
// truncated before the LCS table is built.
inline constexpr std::size_t kLcsTokenCap = 4096;

// Clipped n-gram overlap; kInvalidN when n < 1.
RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference, int n);
RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

struct RougeSuite {
  RougeScore r1;
  RougeScore r2;
  RougeScore rl;
};

TokenSeq prepare_tokens(TokenSeq tokens, const RougeOptions& options);

RougeSuite rouge_suite(std::string_view candidate, std::string_view reference,
                       const Tokenizer& tokenizer = Tokenizer::word(), const RougeOptions& options = {});

// Porter (1980) suffix-stripping stemmer for lowercase ASCII words; other
// input is returned unchanged.
std::string porter_stem(std::string_view word);

bool is_stopword(std::string_view lowered);

}  // namespace sumforge
