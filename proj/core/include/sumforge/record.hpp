#pragma once

#include "sumforge/jsonl.hpp"
#include "sumforge/textcore.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sumforge {

enum class Tier { kED, kAD, kHD };

std::string_view to_string(Tier tier) noexcept;
std::optional<Tier> parse_tier(std::string_view name) noexcept;

// A source document before any summary exists for it.
struct DocInput {
  std::string id;
  std::string text;
};

// One Data Pyramid unit. Serialized as a JSONL object with keys in the order
//   id, summary, tier, token_len, <provenance keys...>, tokenizer_id, document
// so that extractive records carry the {"score", "sentence_index"} wire
// fields directly after token_len.
struct SummaryRecord {
  std::string doc_id;
  std::string document;
  std::string summary;
  Tier tier = Tier::kED;
  std::size_t token_len = 0;
  std::string tokenizer_id;
  ordered_json provenance = ordered_json::object();
};

ordered_json to_json(const SummaryRecord& record);
// Missing tier defaults to `default_tier`; missing token_len is computed
// with `tokenizer`, whose id is then recorded.
SummaryRecord record_from_json(const ordered_json& obj, std::string_view context, Tier default_tier,
                               const Tokenizer& tokenizer);

std::vector<SummaryRecord> read_records(const std::filesystem::path& path, Tier default_tier,
                                        const Tokenizer& tokenizer);
void write_records(const std::filesystem::path& path, const std::vector<SummaryRecord>& records);

// {"id", "document"} corpus lines.
std::vector<DocInput> read_corpus(const std::filesystem::path& path);
std::vector<DocInput> read_corpus(std::istream& in, std::string_view source);
void write_corpus(const std::filesystem::path& path, const std::vector<DocInput>& docs);

}  // namespace sumforge
