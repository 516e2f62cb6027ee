#pragma once

#include "sumforge/record.hpp"
#include "sumforge/rouge.hpp"
#include "sumforge/textcore.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace sumforge {

struct GsgOptions {
  RougeVariant variant = RougeVariant::kF1;
  RougeOptions rouge;
  // Documents are cut to this many tokens (length tokenizer) before
  // sentence splitting.
  std::size_t doc_token_limit = 1024;
};

struct ExtractionResult {
  std::string doc_id;
  std::size_t chosen_index = 0;
  double score = 0.0;
  std::string pseudo_summary;
};

// Scores every sentence with ROUGE-1 against the concatenation of the other
// sentences and returns the best one (lowest index on ties). A single
// sentence document yields that sentence with score 0. kEmptyDocument when
// there are no sentences.
ExtractionResult extract(const Document& doc, const GsgOptions& options = {});

// Per-sentence scores in sentence order; the score extract() maximizes.
std::vector<double> sentence_scores(const Document& doc, const GsgOptions& options = {});

struct SkipEntry {
  std::string id;
  std::string reason;
};

struct CorpusExtraction {
  std::vector<SummaryRecord> records;
  std::vector<SkipEntry> skipped;
};

Document prepare_document(const DocInput& input, const Tokenizer& tokenizer, std::size_t token_limit,
                          const AbbreviationList& abbreviations = AbbreviationList::builtin());

SummaryRecord to_ed_record(const DocInput& input, const ExtractionResult& result, const Tokenizer& tokenizer);

// Output order matches input order for any `jobs` value (0 = hardware
// concurrency). Documents with no sentences are skipped, never fatal.
CorpusExtraction extract_corpus(const std::vector<DocInput>& corpus, const Tokenizer& tokenizer,
                                const GsgOptions& options = {}, unsigned jobs = 1,
                                const AbbreviationList& abbreviations = AbbreviationList::builtin());

// Streaming form over {"id","document"} JSONL. Records and skips are
// delivered in input order, chunk by chunk; malformed lines raise
// kCorpusReadError.
void extract_corpus_stream(std::istream& in, std::string_view source, const Tokenizer& tokenizer,
                           const GsgOptions& options, unsigned jobs,
                           const std::function<void(const SummaryRecord&)>& on_record,
                           const std::function<void(const SkipEntry&)>& on_skip,
                           const AbbreviationList& abbreviations = AbbreviationList::builtin());

}  // namespace sumforge
