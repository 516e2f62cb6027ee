#pragma once

// Deliberately naive reference implementations. They share no code with
// the library beyond the token preprocessing they are handed.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

struct Counts {
  std::int64_t overlap = 0;
  std::int64_t cand = 0;
  std::int64_t ref = 0;
};

inline std::map<Tokens, std::int64_t> ngram_bag(const Tokens& t, std::size_t n) {
  std::map<Tokens, std::int64_t> bag;
  if (t.size() < n) return bag;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++bag[Tokens(t.begin() + i, t.begin() + i + n)];
  return bag;
}

inline Counts rouge_n_counts(const Tokens& cand, const Tokens& ref, std::size_t n) {
  const auto a = ngram_bag(cand, n);
  const auto b = ngram_bag(ref, n);
  Counts c;
  for (const auto& [g, k] : a) {
    c.cand += k;
    auto it = b.find(g);
    if (it != b.end()) c.overlap += std::min(k, it->second);
  }
  for (const auto& [g, k] : b) c.ref += k;
  return c;
}

// Top-down memoized LCS length.
class Lcs {
 public:
  Lcs(const Tokens& a, const Tokens& b) : a_(a), b_(b), memo_((a.size() + 1) * (b.size() + 1), -1) {}
  std::int64_t length() { return at(0, 0); }

 private:
  std::int64_t at(std::size_t i, std::size_t j) {
    if (i == a_.size() || j == b_.size()) return 0;
    auto& slot = memo_[i * (b_.size() + 1) + j];
    if (slot >= 0) return slot;
    if (a_[i] == b_[j]) {
      slot = 1 + at(i + 1, j + 1);
    } else {
      slot = std::max(at(i + 1, j), at(i, j + 1));
    }
    return slot;
  }

  const Tokens& a_;
  const Tokens& b_;
  std::vector<std::int64_t> memo_;
};

struct Prf {
  double p = 0.0, r = 0.0, f = 0.0;
};

inline Prf prf(const Counts& c) {
  Prf s;
  if (c.cand > 0) s.p = static_cast<double>(c.overlap) / static_cast<double>(c.cand);
  if (c.ref > 0) s.r = static_cast<double>(c.overlap) / static_cast<double>(c.ref);
  if (c.cand + c.ref > 0 && c.overlap > 0) s.f = 2.0 * static_cast<double>(c.overlap) / static_cast<double>(c.cand + c.ref);
  return s;
}

inline Counts lcs_counts(const Tokens& cand, const Tokens& ref) {
  return {Lcs(cand, ref).length(), static_cast<std::int64_t>(cand.size()), static_cast<std::int64_t>(ref.size())};
}

enum class Variant { kF1, kRecall };

// Rational score as (numerator, denominator) with a zero denominator
// meaning 0.
inline std::pair<std::int64_t, std::int64_t> rational(const Counts& c, Variant v) {
  const std::int64_t den = v == Variant::kF1 ? c.cand + c.ref : c.ref;
  const std::int64_t num = v == Variant::kF1 ? 2 * c.overlap : c.overlap;
  if (den == 0) return {0, 1};
  return {num, den};
}

// Brute-force sentence selection: each sentence against the literal
// concatenation of the others, exact comparison, first maximum wins.
inline std::size_t gsg_argmax(const std::vector<Tokens>& sentences, Variant v) {
  std::size_t best = 0;
  std::pair<std::int64_t, std::int64_t> best_score{-1, 1};
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Tokens rest;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      if (k != i) rest.insert(rest.end(), sentences[k].begin(), sentences[k].end());
    }
    const auto s = rational(rouge_n_counts(sentences[i], rest, 1), v);
    if (s.first * best_score.second > best_score.first * s.second) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

}  // namespace oracle
