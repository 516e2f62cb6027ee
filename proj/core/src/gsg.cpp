#include "sumforge/gsg.hpp"

#include "parallel.hpp"
#include "sumforge/errors.hpp"

#include <istream>
#include <optional>
#include <unordered_map>

namespace sumforge {

namespace {

struct SentenceCounts {
  std::size_t overlap = 0;
  std::size_t candidate = 0;
  std::size_t rest = 0;
};

std::vector<SentenceCounts> sentence_counts(const Document& doc, const RougeOptions& rouge) {
  const std::size_t n = doc.sentences.size();
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::vector<std::uint32_t>> sentences(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& tok : prepare_tokens(doc.sentences[i].tokens, rouge)) {
      auto [it, inserted] = ids.try_emplace(tok, static_cast<std::uint32_t>(ids.size()));
      sentences[i].push_back(it->second);
    }
  }
  std::vector<std::size_t> total(ids.size(), 0);
  std::size_t total_len = 0;
  for (const auto& s : sentences) {
    for (const auto id : s) ++total[id];
    total_len += s.size();
  }

  std::vector<SentenceCounts> out(n);
  std::vector<std::size_t> own(ids.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = sentences[i];
    for (const auto id : s) ++own[id];
    // Unigram counts of D \ d_i are total - own.
    std::size_t overlap = 0;
    for (const auto id : s) {
      if (own[id] == 0) continue;
      overlap += std::min(own[id], total[id] - own[id]);
      own[id] = 0;
    }
    out[i] = {overlap, s.size(), total_len - s.size()};
  }
  return out;
}

// a < b compared exactly on the rational score: F1 = 2o / (c + r),
// recall = o / r, both 0 on a zero denominator.
bool score_less(const SentenceCounts& a, const SentenceCounts& b, RougeVariant variant) {
  __extension__ using u128 = unsigned __int128;
  std::size_t da = variant == RougeVariant::kF1 ? a.candidate + a.rest : a.rest;
  std::size_t db = variant == RougeVariant::kF1 ? b.candidate + b.rest : b.rest;
  const std::size_t na = da == 0 ? 0 : a.overlap;
  const std::size_t nb = db == 0 ? 0 : b.overlap;
  if (da == 0) da = 1;
  if (db == 0) db = 1;
  return static_cast<u128>(na) * db < static_cast<u128>(nb) * da;
}

}  // namespace

std::vector<double> sentence_scores(const Document& doc, const GsgOptions& options) {
  std::vector<double> scores;
  for (const auto& c : sentence_counts(doc, options.rouge)) {
    scores.push_back(select(RougeScore::from_counts(c.overlap, c.candidate, c.rest), options.variant));
  }
  return scores;
}

ExtractionResult extract(const Document& doc, const GsgOptions& options) {
  if (doc.sentences.empty()) {
    throw Error(ErrorCode::kEmptyDocument, "document \"" + doc.id + "\" has no sentences");
  }
  const auto counts = sentence_counts(doc, options.rouge);
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (score_less(counts[best], counts[i], options.variant)) best = i;
  }
  const auto& c = counts[best];
  const double score = select(RougeScore::from_counts(c.overlap, c.candidate, c.rest), options.variant);
  return {doc.id, best, score, doc.sentences[best].text};
}

Document prepare_document(const DocInput& input, const Tokenizer& tokenizer, std::size_t token_limit,
                          const AbbreviationList& abbreviations) {
  return make_document(input.id, tokenizer.truncate_text(input.text, token_limit), abbreviations);
}

SummaryRecord to_ed_record(const DocInput& input, const ExtractionResult& result, const Tokenizer& tokenizer) {
  SummaryRecord record;
  record.doc_id = input.id;
  record.document = input.text;
  record.summary = result.pseudo_summary;
  record.tier = Tier::kED;
  record.token_len = tokenizer.count(result.pseudo_summary);
  record.tokenizer_id = tokenizer.id();
  record.provenance["score"] = result.score;
  record.provenance["sentence_index"] = result.chosen_index;
  return record;
}

namespace {

struct Outcome {
  std::optional<SummaryRecord> record;
  std::optional<SkipEntry> skip;
};

Outcome process(const DocInput& input, const Tokenizer& tokenizer, const GsgOptions& options,
                const AbbreviationList& abbreviations) {
  const Document doc = prepare_document(input, tokenizer, options.doc_token_limit, abbreviations);
  if (doc.sentences.empty()) return {std::nullopt, SkipEntry{input.id, "EmptyDocument"}};
  return {to_ed_record(input, extract(doc, options), tokenizer), std::nullopt};
}

void process_chunk(const std::vector<DocInput>& chunk, const Tokenizer& tokenizer, const GsgOptions& options,
                   unsigned jobs, const AbbreviationList& abbreviations,
                   const std::function<void(const SummaryRecord&)>& on_record,
                   const std::function<void(const SkipEntry&)>& on_skip) {
  std::vector<Outcome> outcomes(chunk.size());
  detail::parallel_for(chunk.size(), jobs, [&](std::size_t i) {
    outcomes[i] = process(chunk[i], tokenizer, options, abbreviations);
  });
  for (auto& outcome : outcomes) {
    if (outcome.record) on_record(*outcome.record);
    if (outcome.skip) on_skip(*outcome.skip);
  }
}

constexpr std::size_t kChunkSize = 4096;

}  // namespace

CorpusExtraction extract_corpus(const std::vector<DocInput>& corpus, const Tokenizer& tokenizer,
                                const GsgOptions& options, unsigned jobs, const AbbreviationList& abbreviations) {
  CorpusExtraction result;
  process_chunk(
      corpus, tokenizer, options, jobs, abbreviations,
      [&](const SummaryRecord& r) { result.records.push_back(r); },
      [&](const SkipEntry& s) { result.skipped.push_back(s); });
  return result;
}

void extract_corpus_stream(std::istream& in, std::string_view source, const Tokenizer& tokenizer,
                           const GsgOptions& options, unsigned jobs,
                           const std::function<void(const SummaryRecord&)>& on_record,
                           const std::function<void(const SkipEntry&)>& on_skip,
                           const AbbreviationList& abbreviations) {
  std::vector<DocInput> chunk;
  chunk.reserve(kChunkSize);
  for_each_jsonl(in, source, [&](const ordered_json& row, std::size_t line) {
    const std::string context = std::string(source) + ":" + std::to_string(line);
    chunk.push_back({require_string(row, "id", context), require_string(row, "document", context)});
    if (chunk.size() == kChunkSize) {
      process_chunk(chunk, tokenizer, options, jobs, abbreviations, on_record, on_skip);
      chunk.clear();
    }
  });
  if (!chunk.empty()) process_chunk(chunk, tokenizer, options, jobs, abbreviations, on_record, on_skip);
}

}  // namespace sumforge
