#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sumforge {

using TokenSeq = std::vector<std::string>;

struct Sentence {
  std::size_t index = 0;
  // Surface text of the sentence (NFC normalized, trimmed).
  std::string text;
  // Word-tokenizer output for `text`.
  TokenSeq tokens;
};

struct Document {
  std::string id;
  std::string raw_text;
  std::vector<Sentence> sentences;

  std::size_t token_count() const;
};

// Lowercase words that may precede a period without ending a sentence.
class AbbreviationList {
 public:
  // The list bundled with the library (core/data/abbreviations.txt).
  static const AbbreviationList& builtin();
  static AbbreviationList from_file(const std::filesystem::path& path);
  // One entry per line; blank lines and '#' comments are ignored.
  static AbbreviationList parse(std::string_view text);

  bool contains(std::string_view lowered) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
};

std::string normalize_nfc(std::string_view text);
std::string to_lower(std::string_view text);

// Splits on '.', '!' or '?' (optionally followed by closing quotes or
// brackets) when followed by whitespace or end of text. A period after a
// guarded abbreviation or a single capital-letter initial does not split.
// Segments made only of punctuation are dropped.
std::vector<Sentence> split_sentences(std::string_view raw_text,
                                      const AbbreviationList& abbreviations = AbbreviationList::builtin());

Document make_document(std::string id, std::string_view raw_text,
                       const AbbreviationList& abbreviations = AbbreviationList::builtin());

// Greedy longest-match subword vocabulary. File format: one token per line,
// UTF-8, rank = line number.
class Vocabulary {
 public:
  static Vocabulary load(const std::filesystem::path& path);
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  bool contains(std::string_view token) const;
  std::size_t max_token_bytes() const { return max_token_bytes_; }
  std::size_t size() const { return ranks_.size(); }
  // SHA-256 of the token list; part of the tokenizer id.
  const std::string& digest() const { return digest_; }

 private:
  std::map<std::string, std::size_t, std::less<>> ranks_;
  std::size_t max_token_bytes_ = 0;
  std::string digest_;
};

enum class TokenizerMode { kWord, kExternalVocab };

struct TokenSpan {
  std::size_t begin = 0;  // byte offsets into the NFC-normalized text
  std::size_t end = 0;
  std::string token;
};

// Word mode: NFC, lowercase, each punctuation or symbol code point becomes
// its own token, whitespace separates the rest. External-vocab mode applies
// greedy longest-match segmentation to every word-mode token, falling back
// to one "<0xNN>" token per unmatched byte.
class Tokenizer {
 public:
  Tokenizer() = default;  // word mode
  explicit Tokenizer(TokenizerMode mode, std::shared_ptr<const Vocabulary> vocabulary = nullptr);

  static Tokenizer word() { return Tokenizer{}; }
  static Tokenizer with_vocabulary(Vocabulary vocabulary);

  TokenizerMode mode() const { return mode_; }
  // "word" or "vocab:<first 16 hex digits of the vocabulary digest>".
  std::string id() const;

  TokenSeq tokenize(std::string_view text) const;
  std::vector<TokenSpan> spans(std::string_view text) const;
  std::size_t count(std::string_view text) const { return tokenize(text).size(); }

  // Longest prefix of NFC(text) that tokenizes to exactly the first
  // min(limit, count) tokens.
  std::string truncate_text(std::string_view text, std::size_t limit) const;

 private:
  TokenizerMode mode_ = TokenizerMode::kWord;
  std::shared_ptr<const Vocabulary> vocabulary_;
};

// Free-function form; raises kVocabularyMissing when external-vocab mode is
// requested without a vocabulary.
TokenSeq tokenize(std::string_view text, TokenizerMode mode, const Vocabulary* vocabulary = nullptr);

std::string detokenize(const TokenSeq& tokens);

// True when every code point of the token is punctuation or a symbol.
bool is_punctuation_token(std::string_view token);

using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, std::size_t>;

// All contiguous n-token windows with multiplicity; kInvalidN when n < 1.
NgramCounts ngrams(const TokenSeq& seq, int n);

// First min(len, limit) tokens.
TokenSeq truncate(const TokenSeq& seq, std::size_t limit);

}  // namespace sumforge
