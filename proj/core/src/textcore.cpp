#include "sumforge/textcore.hpp"

#include "sumforge/digest.hpp"
#include "sumforge/errors.hpp"
#include "sumforge/jsonl.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <numeric>

namespace sumforge {

namespace detail {
extern const std::string_view kAbbreviationsData;
}  // namespace detail

namespace {

bool is_ascii(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_separator_code_point(UChar32 c) {
  const auto mask = U_GET_GC_MASK(c);
  return (mask & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

std::string_view trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_ascii_space(text[begin])) ++begin;
  while (end > begin && is_ascii_space(text[end - 1])) --end;
  return text.substr(begin, end - begin);
}

// Word-mode spans over already-normalized text.
std::vector<TokenSpan> word_spans(std::string_view text) {
  std::vector<TokenSpan> out;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t word_begin = -1;
  auto flush = [&](int32_t end) {
    if (word_begin >= 0) {
      const auto b = static_cast<std::size_t>(word_begin);
      const auto e = static_cast<std::size_t>(end);
      out.push_back({b, e, to_lower(text.substr(b, e - b))});
      word_begin = -1;
    }
  };
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) {
      // Invalid byte: keep it inside the current word.
      if (word_begin < 0) word_begin = start;
      continue;
    }
    if (u_isUWhiteSpace(c)) {
      flush(start);
    } else if (is_separator_code_point(c)) {
      flush(start);
      const auto b = static_cast<std::size_t>(start);
      const auto e = static_cast<std::size_t>(i);
      out.push_back({b, e, std::string(text.substr(b, e - b))});
    } else if (word_begin < 0) {
      word_begin = start;
    }
  }
  flush(length);
  return out;
}

std::string byte_token(unsigned char byte) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out = "<0x";
  out.push_back(kHex[byte >> 4]);
  out.push_back(kHex[byte & 0xF]);
  out.push_back('>');
  return out;
}

void segment_word(const TokenSpan& word, std::string_view surface, const Vocabulary& vocab,
                  std::vector<TokenSpan>& out) {
  const std::string& lowered = word.token;
  // Offsets inside the lowercased word map back onto the surface text only
  // when lowercasing preserved the byte length.
  const bool aligned = lowered.size() == surface.size();
  const std::size_t first = out.size();
  std::size_t pos = 0;
  while (pos < lowered.size()) {
    std::size_t take = 0;
    const std::size_t max_len = std::min(vocab.max_token_bytes(), lowered.size() - pos);
    for (std::size_t len = max_len; len > 0; --len) {
      if (vocab.contains(std::string_view(lowered).substr(pos, len))) {
        take = len;
        break;
      }
    }
    std::string piece;
    if (take == 0) {
      piece = byte_token(static_cast<unsigned char>(lowered[pos]));
      take = 1;
    } else {
      piece = lowered.substr(pos, take);
    }
    const std::size_t end = aligned ? word.begin + pos + take : word.begin;
    out.push_back({word.begin + (aligned ? pos : 0), end, std::move(piece)});
    pos += take;
  }
  if (!aligned && out.size() > first) out.back().end = word.end;
}

}  // namespace

std::size_t Document::token_count() const {
  return std::accumulate(sentences.begin(), sentences.end(), std::size_t{0},
                         [](std::size_t acc, const Sentence& s) { return acc + s.tokens.size(); });
}

const AbbreviationList& AbbreviationList::builtin() {
  static const AbbreviationList list = parse(detail::kAbbreviationsData);
  return list;
}

AbbreviationList AbbreviationList::from_file(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

AbbreviationList AbbreviationList::parse(std::string_view text) {
  AbbreviationList list;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    if (!line.empty() && line.front() != '#') {
      if (line.back() == '.') line.remove_suffix(1);
      list.entries_.insert(to_lower(line));
    }
    pos = end + 1;
  }
  return list;
}

bool AbbreviationList::contains(std::string_view lowered) const {
  return entries_.find(std::string(lowered)) != entries_.end();
}

std::string normalize_nfc(std::string_view text) {
  if (is_ascii(text)) return std::string(text);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kIoError, "ICU NFC normalizer unavailable");
  const icu::UnicodeString source =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kIoError, "NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string to_lower(std::string_view text) {
  if (is_ascii(text)) {
    std::string out(text);
    for (char& c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  }
  icu::UnicodeString value =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  value.toLower(icu::Locale::getRoot());
  std::string out;
  value.toUTF8String(out);
  return out;
}

std::vector<Sentence> split_sentences(std::string_view raw_text, const AbbreviationList& abbreviations) {
  const std::string text = normalize_nfc(raw_text);
  std::vector<Sentence> sentences;
  auto emit = [&](std::size_t begin, std::size_t end) {
    const std::string_view segment = trim(std::string_view(text).substr(begin, end - begin));
    if (segment.empty()) return;
    TokenSeq tokens = Tokenizer::word().tokenize(segment);
    if (std::all_of(tokens.begin(), tokens.end(), [](const std::string& t) { return is_punctuation_token(t); })) return;
    sentences.push_back({sentences.size(), std::string(segment), std::move(tokens)});
  };

  auto closing_len = [&](std::size_t pos) -> std::size_t {
    if (pos >= text.size()) return 0;
    const char c = text[pos];
    if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
    // U+2019 and U+201D (right single / double quotation marks).
    if (text.compare(pos, 3, "\xE2\x80\x99") == 0 || text.compare(pos, 3, "\xE2\x80\x9D") == 0) return 3;
    return 0;
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
    const bool single_period = (j - i == 1) && c == '.';
    while (std::size_t n = closing_len(j)) j += n;
    if (j < text.size() && !is_ascii_space(text[j])) {
      i = j;
      continue;
    }
    bool guarded = false;
    if (single_period) {
      std::size_t w = i;
      while (w > start && !is_ascii_space(text[w - 1])) --w;
      std::string_view word = std::string_view(text).substr(w, i - w);
      while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'' ||
                               word.front() == '[')) {
        word.remove_prefix(1);
      }
      const bool initial = word.size() == 1 && std::isupper(static_cast<unsigned char>(word[0])) != 0;
      guarded = initial || (!word.empty() && abbreviations.contains(to_lower(word)));
    }
    if (!guarded) {
      emit(start, j);
      start = j;
    }
    i = j;
  }
  emit(start, text.size());
  return sentences;
}

Document make_document(std::string id, std::string_view raw_text, const AbbreviationList& abbreviations) {
  Document doc;
  doc.id = std::move(id);
  doc.raw_text = std::string(raw_text);
  doc.sentences = split_sentences(raw_text, abbreviations);
  return doc;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(std::move(line));
    pos = end + 1;
  }
  return from_tokens(tokens);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary vocab;
  Sha256 hasher;
  for (std::size_t rank = 0; rank < tokens.size(); ++rank) {
    hasher.update(tokens[rank]).update("\n");
    if (tokens[rank].empty()) continue;
    vocab.ranks_.emplace(tokens[rank], rank);
    vocab.max_token_bytes_ = std::max(vocab.max_token_bytes_, tokens[rank].size());
  }
  vocab.digest_ = hasher.hex_digest();
  return vocab;
}

bool Vocabulary::contains(std::string_view token) const { return ranks_.find(token) != ranks_.end(); }

Tokenizer::Tokenizer(TokenizerMode mode, std::shared_ptr<const Vocabulary> vocabulary)
    : mode_(mode), vocabulary_(std::move(vocabulary)) {
  if (mode_ == TokenizerMode::kExternalVocab && !vocabulary_) {
    throw Error(ErrorCode::kVocabularyMissing, "external_vocab tokenizer requires a loaded vocabulary");
  }
}

Tokenizer Tokenizer::with_vocabulary(Vocabulary vocabulary) {
  return Tokenizer(TokenizerMode::kExternalVocab, std::make_shared<const Vocabulary>(std::move(vocabulary)));
}

std::string Tokenizer::id() const {
  if (mode_ == TokenizerMode::kWord) return "word";
  return "vocab:" + vocabulary_->digest().substr(0, 16);
}

std::vector<TokenSpan> Tokenizer::spans(std::string_view text) const {
  const std::string normalized = normalize_nfc(text);
  std::vector<TokenSpan> words = word_spans(normalized);
  if (mode_ == TokenizerMode::kWord) return words;
  std::vector<TokenSpan> pieces;
  pieces.reserve(words.size() * 2);
  for (const auto& word : words) {
    segment_word(word, std::string_view(normalized).substr(word.begin, word.end - word.begin),
                 *vocabulary_, pieces);
  }
  return pieces;
}

TokenSeq Tokenizer::tokenize(std::string_view text) const {
  std::vector<TokenSpan> spans_out = spans(text);
  TokenSeq tokens;
  tokens.reserve(spans_out.size());
  for (auto& span : spans_out) tokens.push_back(std::move(span.token));
  return tokens;
}

std::string Tokenizer::truncate_text(std::string_view text, std::size_t limit) const {
  std::string normalized = normalize_nfc(text);
  const std::vector<TokenSpan> all = spans(normalized);
  if (all.size() <= limit) return normalized;
  if (limit == 0) return {};
  normalized.resize(all[limit - 1].end);
  return normalized;
}

TokenSeq tokenize(std::string_view text, TokenizerMode mode, const Vocabulary* vocabulary) {
  if (mode == TokenizerMode::kWord) return Tokenizer::word().tokenize(text);
  if (vocabulary == nullptr) {
    throw Error(ErrorCode::kVocabularyMissing, "external_vocab tokenizer requires a loaded vocabulary");
  }
  return Tokenizer(mode, std::make_shared<const Vocabulary>(*vocabulary)).tokenize(text);
}

std::string detokenize(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

bool is_punctuation_token(std::string_view token) {
  if (token.empty()) return false;
  const auto* bytes = reinterpret_cast<const uint8_t*>(token.data());
  const auto length = static_cast<int32_t>(token.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c < 0 || !is_separator_code_point(c)) return false;
  }
  return true;
}

NgramCounts ngrams(const TokenSeq& seq, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidN, "n must be >= 1, got " + std::to_string(n));
  NgramCounts counts;
  const auto width = static_cast<std::size_t>(n);
  if (seq.size() < width) return counts;
  for (std::size_t i = 0; i + width <= seq.size(); ++i) {
    ++counts[Ngram(seq.begin() + static_cast<std::ptrdiff_t>(i),
                   seq.begin() + static_cast<std::ptrdiff_t>(i + width))];
  }
  return counts;
}

TokenSeq truncate(const TokenSeq& seq, std::size_t limit) {
  const std::size_t keep = std::min(seq.size(), limit);
  return TokenSeq(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(keep));
}

}  // namespace sumforge
