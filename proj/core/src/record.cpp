#include "sumforge/record.hpp"

#include "sumforge/errors.hpp"

#include <fstream>

namespace sumforge {

std::string_view to_string(Tier tier) noexcept {
  switch (tier) {
    case Tier::kED: return "ED";
    case Tier::kAD: return "AD";
    case Tier::kHD: return "HD";
  }
  return "?";
}

std::optional<Tier> parse_tier(std::string_view name) noexcept {
  if (name == "ED") return Tier::kED;
  if (name == "AD") return Tier::kAD;
  if (name == "HD") return Tier::kHD;
  return std::nullopt;
}

ordered_json to_json(const SummaryRecord& record) {
  ordered_json obj = ordered_json::object();
  obj["id"] = record.doc_id;
  obj["summary"] = record.summary;
  obj["tier"] = to_string(record.tier);
  obj["token_len"] = record.token_len;
  for (const auto& [key, value] : record.provenance.items()) obj[key] = value;
  obj["tokenizer_id"] = record.tokenizer_id;
  obj["document"] = record.document;
  return obj;
}

SummaryRecord record_from_json(const ordered_json& obj, std::string_view context, Tier default_tier,
                               const Tokenizer& tokenizer) {
  SummaryRecord record;
  record.doc_id = require_string(obj, "id", context);
  record.summary = require_string(obj, "summary", context);
  if (const auto it = obj.find("document"); it != obj.end() && it->is_string()) {
    record.document = it->get<std::string>();
  }
  record.tier = default_tier;
  if (const auto it = obj.find("tier"); it != obj.end()) {
    const auto parsed = it->is_string() ? parse_tier(it->get<std::string>()) : std::nullopt;
    if (!parsed) {
      throw Error(ErrorCode::kTierViolation, std::string(context) + ": unknown tier " + it->dump());
    }
    record.tier = *parsed;
  }
  if (const auto it = obj.find("tokenizer_id"); it != obj.end() && it->is_string()) {
    record.tokenizer_id = it->get<std::string>();
  }
  if (const auto it = obj.find("token_len"); it != obj.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
      throw Error(ErrorCode::kCorpusReadError, std::string(context) + ": token_len must be a non-negative integer");
    }
    record.token_len = it->get<std::size_t>();
  } else {
    record.token_len = tokenizer.count(record.summary);
    record.tokenizer_id = tokenizer.id();
  }
  for (const auto& [key, value] : obj.items()) {
    if (key == "id" || key == "summary" || key == "document" || key == "tier" || key == "token_len" ||
        key == "tokenizer_id") {
      continue;
    }
    record.provenance[key] = value;
  }
  return record;
}

std::vector<SummaryRecord> read_records(const std::filesystem::path& path, Tier default_tier,
                                        const Tokenizer& tokenizer) {
  std::vector<SummaryRecord> records;
  for_each_jsonl(path, [&](const ordered_json& row, std::size_t line) {
    records.push_back(
        record_from_json(row, path.string() + ":" + std::to_string(line), default_tier, tokenizer));
  });
  return records;
}

void write_records(const std::filesystem::path& path, const std::vector<SummaryRecord>& records) {
  std::string content;
  for (const auto& record : records) {
    content += dump_line(to_json(record));
    content += '\n';
  }
  write_file_atomic(path, content);
}

std::vector<DocInput> read_corpus(std::istream& in, std::string_view source) {
  std::vector<DocInput> docs;
  for_each_jsonl(in, source, [&](const ordered_json& row, std::size_t line) {
    const std::string context = std::string(source) + ":" + std::to_string(line);
    docs.push_back({require_string(row, "id", context), require_string(row, "document", context)});
  });
  return docs;
}

std::vector<DocInput> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_corpus(in, path.string());
}

void write_corpus(const std::filesystem::path& path, const std::vector<DocInput>& docs) {
  std::string content;
  for (const auto& doc : docs) {
    ordered_json row = ordered_json::object();
    row["id"] = doc.id;
    row["document"] = doc.text;
    content += dump_line(row);
    content += '\n';
  }
  write_file_atomic(path, content);
}

}  // namespace sumforge
