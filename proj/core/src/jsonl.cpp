#include "sumforge/jsonl.hpp"

#include "sumforge/errors.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

namespace sumforge {

void for_each_jsonl(std::istream& in, std::string_view source,
                    const std::function<void(const ordered_json&, std::size_t)>& visit) {
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ordered_json value;
    try {
      value = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kCorpusReadError,
                  std::string(source) + ":" + std::to_string(line_number) + ": " + e.what());
    }
    if (!value.is_object()) {
      throw Error(ErrorCode::kCorpusReadError,
                  std::string(source) + ":" + std::to_string(line_number) + ": expected a JSON object");
    }
    visit(value, line_number);
  }
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const ordered_json&, std::size_t)>& visit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  for_each_jsonl(in, path.string(), visit);
}

std::vector<ordered_json> read_jsonl(const std::filesystem::path& path) {
  std::vector<ordered_json> rows;
  for_each_jsonl(path, [&](const ordered_json& row, std::size_t) { rows.push_back(row); });
  return rows;
}

ordered_json read_json(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kCorpusReadError, path.string() + ": " + e.what());
  }
}

std::string dump_line(const ordered_json& value) {
  return value.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string dump_pretty(const ordered_json& value) {
  return value.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

void write_jsonl(const std::filesystem::path& path, const std::vector<ordered_json>& rows) {
  std::string content;
  for (const auto& row : rows) {
    content += dump_line(row);
    content += '\n';
  }
  write_file_atomic(path, content);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string require_string(const ordered_json& obj, std::string_view key, std::string_view context) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::kCorpusReadError,
                std::string(context) + ": missing string field \"" + std::string(key) + "\"");
  }
  return it->get<std::string>();
}

}  // namespace sumforge
