#pragma once

#include "sumforge/record.hpp"
#include "sumforge/textcore.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sumforge {

inline constexpr std::string_view kSentNumPlaceholder = "[sent num]";
inline constexpr std::string_view kWordNumPlaceholder = "[word num]";

inline constexpr std::string_view kDefaultSystemPrompt =
    "Generate a concise and coherent summary towards the given article and don't generate anything "
    "else. Make sure the summary is clear, informative, and well-structured.";
inline constexpr std::string_view kDefaultUserTemplate =
    "Summarize the article in [sent num] sentences around [word num] words.";

// Documents are cut to this many tokens before they are placed in a prompt.
inline constexpr std::size_t kPromptDocumentTokenLimit = 2048;

struct PromptSpec {
  std::string system_prompt{kDefaultSystemPrompt};
  std::string user_template{kDefaultUserTemplate};
  int sent_num = 3;
  int word_num = 50;
};

struct RenderedPrompt {
  std::string system;
  // Truncated document, a blank line, then the rendered instruction.
  std::string user;
  std::string document_portion;
  std::string instruction;
};

// kTemplateError when either placeholder is missing or appears more than
// once, or when sent_num/word_num are not positive.
RenderedPrompt render_prompt(const PromptSpec& spec, std::string_view document_text,
                             const Tokenizer& tokenizer = Tokenizer::word(),
                             std::size_t document_token_limit = kPromptDocumentTokenLimit);

struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  double temperature = 0.6;
  // Not sent over the wire; lets the mock backend size its output.
  int word_budget = 0;
};

// Body of an OpenAI-style chat-completion request.
ordered_json to_wire_json(const ChatRequest& request);
// Extracts choices[0].message.content; BackendError on other shapes.
std::string parse_completion_response(std::string_view body);

// Thrown by backends. Retryable failures are retried with backoff.
class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& message, bool retryable)
      : std::runtime_error(message), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

// Echo-style stand-in for a real model: the first `word_budget` whitespace
// separated words of the document portion, joined by single spaces and
// terminated with a period. `fail_hook(request, attempt)` returning true
// makes that attempt fail with a retryable error.
class MockBackend final : public CompletionBackend {
 public:
  using FailHook = std::function<bool(const ChatRequest&, int attempt)>;

  explicit MockBackend(std::uint64_t seed = 0, FailHook fail_hook = nullptr);
  std::string complete(const ChatRequest& request) override;

  std::size_t calls() const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  FailHook fail_hook_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
  std::unordered_map<std::string, int> attempts_by_prompt_;
};

// POSTs to an HTTP(S) chat-completion endpoint. Status 408/429/5xx and
// transport errors are retryable; other non-2xx statuses are not.
class HttpChatBackend final : public CompletionBackend {
 public:
  HttpChatBackend(std::string endpoint_url, std::string api_key, std::chrono::seconds timeout);
  std::string complete(const ChatRequest& request) override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

enum class BackendKind { kLive, kMock };

struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  // Name of the environment variable holding the API key; never the key.
  std::string api_key_env = "OPENAI_API_KEY";
  std::string model = "llama-2-7b-chat";
  double temperature = 0.6;
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{30000};
  std::chrono::seconds timeout{120};
  unsigned max_in_flight = 4;
  std::uint64_t mock_seed = 0;
  std::optional<std::filesystem::path> cache_dir;
};

BackendConfig backend_config_from_json(const ordered_json& obj);
ordered_json to_json(const BackendConfig& config);

// Builds the backend named by the config; for kLive the API key is read from
// the environment variable named by api_key_env (empty when unset).
std::shared_ptr<CompletionBackend> make_backend(const BackendConfig& config);

struct CachedCompletion {
  std::string prompt_hash;
  std::string summary;
  int attempts = 1;
};

// Content-addressed completion store: <dir>/<hash[0:2]>/<hash>.json.
// Writes go through a single mutex and an atomic rename.
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir);

  std::optional<CachedCompletion> get(const std::string& prompt_hash) const;
  // kCacheError on any write failure.
  void put(const CachedCompletion& entry);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& prompt_hash) const;

  std::filesystem::path dir_;
  mutable std::mutex write_mutex_;
};

// SHA-256 over (system, user, model, temperature); the user message already
// contains the truncated document.
std::string prompt_hash(const ChatRequest& request);

enum class GenerationSource { kLive, kMock, kCache };
std::string_view to_string(GenerationSource source) noexcept;

struct GenerationRecord {
  std::string doc_id;
  std::string prompt_hash;
  std::string summary;
  GenerationSource backend = GenerationSource::kMock;
  int attempts = 1;
};

struct RejectEntry {
  std::string id;
  std::string error;
};

struct CorpusGeneration {
  std::vector<SummaryRecord> records;
  std::vector<RejectEntry> rejects;
  std::size_t cache_hits = 0;
  std::size_t backend_calls = 0;
};

// Retry, cache and bounded-concurrency policy around a CompletionBackend.
class AbstractiveGenerator {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  AbstractiveGenerator(BackendConfig config, std::shared_ptr<CompletionBackend> backend,
                       Tokenizer tokenizer = Tokenizer::word());

  // Replaces std::this_thread::sleep_for between retries (tests).
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

  // kBackendUnavailable after the retry budget, kEmptyCompletion on a blank
  // completion, kCacheError when the cache cannot be written.
  GenerationRecord generate(const Document& doc, const PromptSpec& spec);
  GenerationRecord generate(std::string_view doc_id, std::string_view text, const PromptSpec& spec);

  // Output order matches input order. Per-document failures become rejects;
  // only cache-store failures abort the whole call.
  CorpusGeneration generate_corpus(const std::vector<DocInput>& corpus, const PromptSpec& spec,
                                   unsigned max_in_flight);

  SummaryRecord to_ad_record(const DocInput& input, const GenerationRecord& generated) const;

  // Delay before retry number `retry` (1-based): base * 2^(retry-1), capped.
  std::chrono::milliseconds backoff_delay(int retry) const;

  std::size_t max_observed_in_flight() const { return max_observed_in_flight_.load(); }

 private:
  GenerationRecord call_backend(const std::string& doc_id, const ChatRequest& request,
                                const std::string& hash);
  std::shared_ptr<std::mutex> lock_for(const std::string& hash);

  BackendConfig config_;
  std::shared_ptr<CompletionBackend> backend_;
  Tokenizer tokenizer_;
  std::optional<CompletionCache> cache_;
  Sleeper sleeper_;
  std::mutex key_locks_mutex_;
  // One lock per prompt hash so identical prompts never reach the backend
  // concurrently; the second caller then finds the cached completion.
  std::unordered_map<std::string, std::shared_ptr<std::mutex>> key_locks_;
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> max_observed_in_flight_{0};
};

}  // namespace sumforge
