#include "sumforge/llm.hpp"

#include "parallel.hpp"
#include "sumforge/digest.hpp"
#include "sumforge/errors.hpp"

#include <cstdlib>
#include <sstream>
#include <thread>

namespace sumforge {

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

void replace_once(std::string& text, std::string_view placeholder, const std::string& value) {
  const std::size_t pos = text.find(placeholder);
  text.replace(pos, placeholder.size(), value);
}

std::string trim_copy(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

}  // namespace

RenderedPrompt render_prompt(const PromptSpec& spec, std::string_view document_text, const Tokenizer& tokenizer,
                             std::size_t document_token_limit) {
  for (const auto placeholder : {kSentNumPlaceholder, kWordNumPlaceholder}) {
    const std::size_t n = count_occurrences(spec.user_template, placeholder);
    if (n != 1) {
      throw Error(ErrorCode::kTemplateError, "user template must contain \"" + std::string(placeholder) +
                                                 "\" exactly once (found " + std::to_string(n) + ")");
    }
  }
  if (spec.sent_num < 1 || spec.word_num < 1) {
    throw Error(ErrorCode::kTemplateError, "sent_num and word_num must be positive");
  }
  RenderedPrompt out;
  out.system = spec.system_prompt;
  out.instruction = spec.user_template;
  replace_once(out.instruction, kSentNumPlaceholder, std::to_string(spec.sent_num));
  replace_once(out.instruction, kWordNumPlaceholder, std::to_string(spec.word_num));
  out.document_portion = tokenizer.truncate_text(document_text, document_token_limit);
  out.user = out.document_portion + "\n\n" + out.instruction;
  return out;
}

ordered_json to_wire_json(const ChatRequest& request) {
  ordered_json body = ordered_json::object();
  body["model"] = request.model;
  body["messages"] = ordered_json::array({
      ordered_json{{"role", "system"}, {"content", request.system}},
      ordered_json{{"role", "user"}, {"content", request.user}},
  });
  body["temperature"] = request.temperature;
  return body;
}

std::string parse_completion_response(std::string_view body) {
  ordered_json parsed;
  try {
    parsed = ordered_json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BackendError(std::string("malformed completion response: ") + e.what(), true);
  }
  try {
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("unexpected completion response shape: ") + e.what(), false);
  }
}

MockBackend::MockBackend(std::uint64_t seed, FailHook fail_hook) : seed_(seed), fail_hook_(std::move(fail_hook)) {}

std::size_t MockBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::string MockBackend::complete(const ChatRequest& request) {
  int attempt = 0;
  {
    std::lock_guard lock(mutex_);
    ++calls_;
    attempt = ++attempts_by_prompt_[request.user];
  }
  if (fail_hook_ && fail_hook_(request, attempt)) {
    throw BackendError("mock backend: injected failure on attempt " + std::to_string(attempt), true);
  }
  const std::size_t split = request.user.rfind("\n\n");
  const std::string_view document =
      split == std::string::npos ? std::string_view(request.user) : std::string_view(request.user).substr(0, split);
  const int budget = request.word_budget > 0 ? request.word_budget : 50;

  std::istringstream words{std::string(document)};
  std::string word;
  std::string out;
  for (int taken = 0; taken < budget && words >> word; ++taken) {
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  if (!out.empty() && out.back() != '.' && out.back() != '!' && out.back() != '?') {
    while (!out.empty() && (out.back() == ',' || out.back() == ';' || out.back() == ':')) out.pop_back();
    out.push_back('.');
  }
  return out;
}

BackendConfig backend_config_from_json(const ordered_json& obj) {
  BackendConfig config;
  if (!obj.is_object()) throw Error(ErrorCode::kInvalidConfig, "llm config must be a JSON object");
  try {
    if (obj.contains("backend")) {
      const auto kind = obj.at("backend").get<std::string>();
      if (kind == "live") {
        config.kind = BackendKind::kLive;
      } else if (kind == "mock") {
        config.kind = BackendKind::kMock;
      } else {
        throw Error(ErrorCode::kInvalidConfig, "llm.backend must be \"live\" or \"mock\"");
      }
    }
    config.endpoint = obj.value("endpoint", config.endpoint);
    config.api_key_env = obj.value("api_key_env", config.api_key_env);
    config.model = obj.value("model", config.model);
    config.temperature = obj.value("temperature", config.temperature);
    config.max_attempts = obj.value("max_attempts", config.max_attempts);
    config.base_delay = std::chrono::milliseconds(obj.value("base_delay_ms", config.base_delay.count()));
    config.max_delay = std::chrono::milliseconds(obj.value("max_delay_ms", config.max_delay.count()));
    config.timeout = std::chrono::seconds(obj.value("timeout_s", config.timeout.count()));
    config.max_in_flight = obj.value("max_in_flight", config.max_in_flight);
    config.mock_seed = obj.value("mock_seed", config.mock_seed);
    if (obj.contains("cache_dir") && obj.at("cache_dir").is_string()) {
      config.cache_dir = obj.at("cache_dir").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("llm config: ") + e.what());
  }
  if (config.max_attempts < 1) throw Error(ErrorCode::kInvalidConfig, "llm.max_attempts must be >= 1");
  if (config.max_in_flight < 1) throw Error(ErrorCode::kInvalidConfig, "llm.max_in_flight must be >= 1");
  return config;
}

ordered_json to_json(const BackendConfig& config) {
  ordered_json obj = ordered_json::object();
  obj["backend"] = config.kind == BackendKind::kLive ? "live" : "mock";
  obj["endpoint"] = config.endpoint;
  obj["api_key_env"] = config.api_key_env;
  obj["model"] = config.model;
  obj["temperature"] = config.temperature;
  obj["max_attempts"] = config.max_attempts;
  obj["base_delay_ms"] = config.base_delay.count();
  obj["max_delay_ms"] = config.max_delay.count();
  obj["timeout_s"] = config.timeout.count();
  obj["max_in_flight"] = config.max_in_flight;
  obj["mock_seed"] = config.mock_seed;
  if (config.cache_dir) {
    obj["cache_dir"] = config.cache_dir->generic_string();
  } else {
    obj["cache_dir"] = nullptr;
  }
  return obj;
}

std::shared_ptr<CompletionBackend> make_backend(const BackendConfig& config) {
  if (config.kind == BackendKind::kMock) return std::make_shared<MockBackend>(config.mock_seed);
  const char* key = std::getenv(config.api_key_env.c_str());
  return std::make_shared<HttpChatBackend>(config.endpoint, key != nullptr ? key : "", config.timeout);
}

CompletionCache::CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path CompletionCache::path_for(const std::string& prompt_hash) const {
  return dir_ / prompt_hash.substr(0, 2) / (prompt_hash + ".json");
}

std::optional<CachedCompletion> CompletionCache::get(const std::string& prompt_hash) const {
  const auto path = path_for(prompt_hash);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const ordered_json obj = read_json(path);
    CachedCompletion entry;
    entry.prompt_hash = obj.at("prompt_hash").get<std::string>();
    entry.summary = obj.at("summary").get<std::string>();
    entry.attempts = obj.at("attempts").get<int>();
    if (entry.prompt_hash != prompt_hash) return std::nullopt;
    return entry;
  } catch (const std::exception&) {
    // Unreadable entries are treated as misses and overwritten on success.
    return std::nullopt;
  }
}

void CompletionCache::put(const CachedCompletion& entry) {
  ordered_json obj = ordered_json::object();
  obj["prompt_hash"] = entry.prompt_hash;
  obj["summary"] = entry.summary;
  obj["attempts"] = entry.attempts;
  std::lock_guard lock(write_mutex_);
  try {
    write_file_atomic(path_for(entry.prompt_hash), dump_pretty(obj));
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kCacheError, std::string("cache store failed: ") + e.what());
  }
}

std::string prompt_hash(const ChatRequest& request) {
  const ordered_json key = ordered_json::array({request.system, request.user, request.model, request.temperature});
  return sha256_hex(dump_line(key));
}

std::string_view to_string(GenerationSource source) noexcept {
  switch (source) {
    case GenerationSource::kLive: return "live";
    case GenerationSource::kMock: return "mock";
    case GenerationSource::kCache: return "cache";
  }
  return "?";
}

AbstractiveGenerator::AbstractiveGenerator(BackendConfig config, std::shared_ptr<CompletionBackend> backend,
                                           Tokenizer tokenizer)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      tokenizer_(std::move(tokenizer)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (config_.cache_dir) cache_.emplace(*config_.cache_dir);
}

std::chrono::milliseconds AbstractiveGenerator::backoff_delay(int retry) const {
  auto delay = config_.base_delay;
  for (int i = 1; i < retry && delay < config_.max_delay; ++i) delay *= 2;
  return std::min(delay, config_.max_delay);
}

std::shared_ptr<std::mutex> AbstractiveGenerator::lock_for(const std::string& hash) {
  std::lock_guard lock(key_locks_mutex_);
  auto& slot = key_locks_[hash];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

GenerationRecord AbstractiveGenerator::call_backend(const std::string& doc_id, const ChatRequest& request,
                                                    const std::string& hash) {
  const GenerationSource source =
      config_.kind == BackendKind::kLive ? GenerationSource::kLive : GenerationSource::kMock;
  for (int attempt = 1;; ++attempt) {
    std::string text;
    try {
      const std::size_t now = ++in_flight_;
      std::size_t seen = max_observed_in_flight_.load();
      while (now > seen && !max_observed_in_flight_.compare_exchange_weak(seen, now)) {
      }
      struct Release {
        std::atomic<std::size_t>& counter;
        ~Release() { --counter; }
      } release{in_flight_};
      text = backend_->complete(request);
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= config_.max_attempts) {
        throw Error(ErrorCode::kBackendUnavailable, "document \"" + doc_id + "\" failed after " +
                                                        std::to_string(attempt) + " attempt(s): " + e.what());
      }
      sleeper_(backoff_delay(attempt));
      continue;
    }
    std::string summary = trim_copy(text);
    if (summary.empty()) {
      throw Error(ErrorCode::kEmptyCompletion, "backend returned an empty completion for \"" + doc_id + "\"");
    }
    return {doc_id, hash, std::move(summary), source, attempt};
  }
}

GenerationRecord AbstractiveGenerator::generate(std::string_view doc_id, std::string_view text,
                                                const PromptSpec& spec) {
  const RenderedPrompt prompt = render_prompt(spec, text, tokenizer_);
  ChatRequest request{config_.model, prompt.system, prompt.user, config_.temperature, spec.word_num};
  const std::string hash = prompt_hash(request);
  const std::string id(doc_id);

  const auto key_lock = lock_for(hash);
  std::lock_guard guard(*key_lock);
  if (cache_) {
    if (auto hit = cache_->get(hash)) {
      return {id, hash, hit->summary, GenerationSource::kCache, hit->attempts};
    }
  }
  GenerationRecord record = call_backend(id, request, hash);
  if (cache_) cache_->put({hash, record.summary, record.attempts});
  return record;
}

GenerationRecord AbstractiveGenerator::generate(const Document& doc, const PromptSpec& spec) {
  return generate(doc.id, doc.raw_text, spec);
}

SummaryRecord AbstractiveGenerator::to_ad_record(const DocInput& input, const GenerationRecord& generated) const {
  SummaryRecord record;
  record.doc_id = input.id;
  record.document = input.text;
  record.summary = generated.summary;
  record.tier = Tier::kAD;
  record.token_len = tokenizer_.count(generated.summary);
  record.tokenizer_id = tokenizer_.id();
  record.provenance["prompt_hash"] = generated.prompt_hash;
  record.provenance["attempts"] = generated.attempts;
  return record;
}

CorpusGeneration AbstractiveGenerator::generate_corpus(const std::vector<DocInput>& corpus, const PromptSpec& spec,
                                                       unsigned max_in_flight) {
  if (max_in_flight < 1) throw Error(ErrorCode::kInvalidConfig, "max_in_flight must be >= 1");
  struct Slot {
    std::optional<GenerationRecord> generated;
    std::optional<std::string> error;
  };
  std::vector<Slot> slots(corpus.size());
  detail::parallel_for(corpus.size(), max_in_flight, [&](std::size_t i) {
    try {
      slots[i].generated = generate(corpus[i].id, corpus[i].text, spec);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kCacheError) throw;
      slots[i].error = e.what();
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  });
  CorpusGeneration out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (slots[i].generated) {
      if (slots[i].generated->backend == GenerationSource::kCache) {
        ++out.cache_hits;
      } else {
        ++out.backend_calls;
      }
      out.records.push_back(to_ad_record(corpus[i], *slots[i].generated));
    } else {
      out.rejects.push_back({corpus[i].id, slots[i].error.value_or("unknown error")});
    }
  }
  return out;
}

}  // namespace sumforge
