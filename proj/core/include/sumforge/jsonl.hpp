#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sumforge {

using ordered_json = nlohmann::ordered_json;

// Calls `visit(object, line_number)` for every non-blank line. Lines that are
// not JSON objects raise kCorpusReadError naming the source and line.
void for_each_jsonl(std::istream& in, std::string_view source,
                    const std::function<void(const ordered_json&, std::size_t)>& visit);
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const ordered_json&, std::size_t)>& visit);

std::vector<ordered_json> read_jsonl(const std::filesystem::path& path);
ordered_json read_json(const std::filesystem::path& path);

// Compact one-line serialization used for every JSONL record.
std::string dump_line(const ordered_json& value);
// Two-space indented serialization with a trailing newline.
std::string dump_pretty(const ordered_json& value);

// Writes via a sibling temporary file and rename, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
void write_jsonl(const std::filesystem::path& path, const std::vector<ordered_json>& rows);

std::string read_text_file(const std::filesystem::path& path);

// Required-field accessors that raise kCorpusReadError with context.
std::string require_string(const ordered_json& obj, std::string_view key, std::string_view context);

}  // namespace sumforge
