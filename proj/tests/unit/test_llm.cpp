#include "test_support.hpp"

#include "sumforge/digest.hpp"
#include "sumforge/errors.hpp"
#include "sumforge/llm.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

using namespace sumforge;
using testing_support::TempDir;

namespace {

BackendConfig mock_config() {
  BackendConfig c;
  c.base_delay = std::chrono::milliseconds(1);
  return c;
}

std::unique_ptr<AbstractiveGenerator> quiet(BackendConfig c, std::shared_ptr<CompletionBackend> b) {
  auto g = std::make_unique<AbstractiveGenerator>(std::move(c), std::move(b));
  g->set_sleeper([](std::chrono::milliseconds) {});
  return g;
}

std::string long_text(std::size_t words) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) s += "w" + std::to_string(i % 97) + " ";
  return s;
}

}  // namespace

TEST(Prompt, Substitution) {
  PromptSpec spec;
  spec.sent_num = 2;
  spec.word_num = 50;
  const auto p = render_prompt(spec, "Some article text.");
  EXPECT_TRUE(p.user.ends_with("in 2 sentences around 50 words.")) << p.user;
  EXPECT_EQ(p.user.find("[sent num]"), std::string::npos);
  EXPECT_EQ(p.user.find("[word num]"), std::string::npos);
  EXPECT_EQ(p.user.rfind("Some article text.\n\n", 0), 0u);
}

TEST(Prompt, DefaultSystemPrompt) {
  EXPECT_EQ(PromptSpec{}.system_prompt,
            "Generate a concise and coherent summary towards the given article and don't generate anything else. "
            "Make sure the summary is clear, informative, and well-structured.");
  EXPECT_EQ(PromptSpec{}.user_template, "Summarize the article in [sent num] sentences around [word num] words.");
}

TEST(Prompt, TruncatesTo2048Tokens) {
  const auto p = render_prompt(PromptSpec{}, long_text(3000));
  EXPECT_EQ(Tokenizer::word().count(p.document_portion), 2048u);
}

TEST(Prompt, TemplateErrors) {
  PromptSpec missing;
  missing.user_template = "Summarize in [sent num] sentences.";
  EXPECT_THROW(render_prompt(missing, "x"), Error);
  PromptSpec dup;
  dup.user_template = "[sent num] [sent num] [word num]";
  try {
    render_prompt(dup, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTemplateError);
  }
  PromptSpec zero;
  zero.word_num = 0;
  EXPECT_THROW(render_prompt(zero, "x"), Error);
}

TEST(Prompt, DatasetSpecificSpecHonored) {
  PromptSpec one;
  one.user_template = "Summarize the article in [sent num] sentence around [word num] words.";
  one.sent_num = 1;
  one.word_num = 20;
  EXPECT_NE(render_prompt(one, "doc").instruction.find("in 1 sentence around 20 words."), std::string::npos);
}

TEST(Wire, RequestAndResponse) {
  ChatRequest r{"m", "sys", "usr", 0.6, 10};
  const auto body = to_wire_json(r);
  EXPECT_EQ(dump_line(body),
            "{\"model\":\"m\",\"messages\":[{\"role\":\"system\",\"content\":\"sys\"},{\"role\":\"user\",\"content\":"
            "\"usr\"}],\"temperature\":0.6}");
  EXPECT_EQ(parse_completion_response("{\"choices\":[{\"message\":{\"content\":\"hi\"}}]}"), "hi");
  EXPECT_THROW(parse_completion_response("{\"choices\":[]}"), BackendError);
  EXPECT_THROW(parse_completion_response("nope"), BackendError);
}

TEST(PromptHash, SensitiveToEachField) {
  const ChatRequest base{"m", "s", "u", 0.6, 5};
  auto h = prompt_hash(base);
  EXPECT_EQ(h.size(), 64u);
  EXPECT_EQ(h, prompt_hash(base));
  auto r = base;
  r.model = "m2";
  EXPECT_NE(prompt_hash(r), h);
  r = base;
  r.temperature = 0.7;
  EXPECT_NE(prompt_hash(r), h);
  r = base;
  r.user = "u2";
  EXPECT_NE(prompt_hash(r), h);
  r = base;
  r.system = "s2";
  EXPECT_NE(prompt_hash(r), h);
}

TEST(Mock, DeterministicEcho) {
  MockBackend a(3), b(3);
  ChatRequest r{"m", "s", "one two, three four five\n\nSummarize.", 0.6, 3};
  EXPECT_EQ(a.complete(r), "one two, three.");
  EXPECT_EQ(a.complete(r), b.complete(r));
}

TEST(Generate, CacheHitKeepsAttempts) {
  TempDir tmp;
  auto c = mock_config();
  c.cache_dir = tmp.path() / "cache";
  int fails = 2;
  auto backend = std::make_shared<MockBackend>(1, [&](const ChatRequest&, int) { return fails-- > 0; });
  auto gen = quiet(c, backend);
  const auto first = gen->generate("d", "Alpha beta gamma delta.", PromptSpec{});
  EXPECT_EQ(first.attempts, 3);
  EXPECT_EQ(first.backend, GenerationSource::kMock);
  const auto second = gen->generate("d", "Alpha beta gamma delta.", PromptSpec{});
  EXPECT_EQ(second.backend, GenerationSource::kCache);
  EXPECT_EQ(second.attempts, 3);
  EXPECT_EQ(second.summary, first.summary);
  EXPECT_EQ(backend->calls(), 3u);

  // A fresh generator sharing the cache never reaches the backend.
  auto other = std::make_shared<MockBackend>(1);
  auto gen2 = quiet(c, other);
  EXPECT_EQ(gen2->generate("d", "Alpha beta gamma delta.", PromptSpec{}).backend, GenerationSource::kCache);
  EXPECT_EQ(other->calls(), 0u);
}

TEST(Generate, RetryBudgetAndBackoff) {
  auto c = mock_config();
  c.max_attempts = 4;
  c.base_delay = std::chrono::milliseconds(100);
  c.max_delay = std::chrono::milliseconds(250);
  std::vector<long> delays;
  AbstractiveGenerator gen(c, std::make_shared<MockBackend>(0, [](const ChatRequest&, int) { return true; }));
  gen.set_sleeper([&](std::chrono::milliseconds d) { delays.push_back(static_cast<long>(d.count())); });
  try {
    gen.generate("d", "text", PromptSpec{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendUnavailable);
  }
  EXPECT_EQ(delays, (std::vector<long>{100, 200, 250}));
}

TEST(Generate, EmptyCompletion) {
  class Blank final : public CompletionBackend {
   public:
    std::string complete(const ChatRequest&) override { return "  \n"; }
  };
  auto gen = quiet(mock_config(), std::make_shared<Blank>());
  try {
    gen->generate("d", "text", PromptSpec{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCompletion);
  }
}

TEST(GenerateCorpus, RejectsPartitionInput) {
  std::vector<DocInput> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back({"d" + std::to_string(i), "Doc number " + std::to_string(i) + " text."});
  auto backend = std::make_shared<MockBackend>(
      0, [](const ChatRequest& r, int) { return r.user.find("number 4 ") != std::string::npos; });
  auto c = mock_config();
  c.max_attempts = 2;
  auto gen = quiet(c, backend);
  const auto out = gen->generate_corpus(corpus, PromptSpec{}, 3);
  ASSERT_EQ(out.records.size(), 9u);
  ASSERT_EQ(out.rejects.size(), 1u);
  EXPECT_EQ(out.rejects[0].id, "d4");
  for (std::size_t i = 0, k = 0; i < corpus.size(); ++i) {
    if (corpus[i].id == "d4") continue;
    EXPECT_EQ(out.records[k].doc_id, corpus[i].id);
    EXPECT_EQ(out.records[k++].tier, Tier::kAD);
  }
  EXPECT_LE(gen->max_observed_in_flight(), 3u);
}

TEST(GenerateCorpus, ConcurrencyBounded) {
  class Slow final : public CompletionBackend {
   public:
    std::string complete(const ChatRequest& r) override {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      return "ok " + std::to_string(r.user.size()) + ".";
    }
  };
  std::vector<DocInput> corpus;
  for (int i = 0; i < 24; ++i) corpus.push_back({"d" + std::to_string(i), std::string(static_cast<std::size_t>(i + 1), 'z')});
  auto gen = quiet(mock_config(), std::make_shared<Slow>());
  const auto out = gen->generate_corpus(corpus, PromptSpec{}, 2);
  EXPECT_EQ(out.records.size(), 24u);
  EXPECT_LE(gen->max_observed_in_flight(), 2u);
  EXPECT_GE(gen->max_observed_in_flight(), 1u);
}

TEST(GenerateCorpus, TenDocsNoRejects) {
  std::vector<DocInput> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back({"d" + std::to_string(i), "Some words here " + std::to_string(i)});
  auto gen = quiet(mock_config(), std::make_shared<MockBackend>(0));
  const auto out = gen->generate_corpus(corpus, PromptSpec{}, 4);
  EXPECT_EQ(out.records.size(), 10u);
  EXPECT_TRUE(out.rejects.empty());
}

TEST(Cache, StoreFailureAborts) {
  TempDir tmp;
  testing_support::write_text(tmp / "blocker", "file");
  auto c = mock_config();
  c.cache_dir = tmp / "blocker";
  auto gen = quiet(c, std::make_shared<MockBackend>(0));
  try {
    gen->generate_corpus({{"a", "text"}}, PromptSpec{}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCacheError);
  }
}

TEST(Cache, RoundTrip) {
  TempDir tmp;
  CompletionCache cache(tmp / "c");
  const std::string h = sha256_hex("x");
  EXPECT_FALSE(cache.get(h));
  cache.put({h, "summary", 2});
  const auto hit = cache.get(h);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->summary, "summary");
  EXPECT_EQ(hit->attempts, 2);
  EXPECT_TRUE(std::filesystem::exists(tmp / "c" / h.substr(0, 2) / (h + ".json")));
}

TEST(Config, JsonRoundTrip) {
  auto c = backend_config_from_json(ordered_json::parse(
      R"({"backend":"live","endpoint":"http://h:1/v1/chat/completions","model":"x","temperature":0.2,"max_attempts":3})"));
  EXPECT_EQ(c.kind, BackendKind::kLive);
  EXPECT_EQ(c.model, "x");
  EXPECT_EQ(c.max_attempts, 3);
  const auto again = backend_config_from_json(to_json(c));
  EXPECT_EQ(dump_line(to_json(again)), dump_line(to_json(c)));
  EXPECT_THROW(backend_config_from_json(ordered_json::parse(R"({"backend":"other"})")), Error);
  EXPECT_THROW(backend_config_from_json(ordered_json::parse(R"({"max_attempts":0})")), Error);
}

TEST(Http, LocalServerRetriesThenSucceeds) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  std::string seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 503;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":" A short summary. "}}]})",
                    "application/json");
  });
  server.Post("/bad", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  auto c = mock_config();
  c.kind = BackendKind::kLive;
  auto gen = quiet(c, std::make_shared<HttpChatBackend>(base + "/v1/chat/completions", "k123", std::chrono::seconds(5)));
  const auto r = gen->generate("d", "Article body.", PromptSpec{});
  EXPECT_EQ(r.summary, "A short summary.");
  EXPECT_EQ(r.attempts, 2);
  EXPECT_EQ(r.backend, GenerationSource::kLive);
  EXPECT_EQ(seen_auth, "Bearer k123");
  const auto body = ordered_json::parse(seen_body);
  EXPECT_EQ(body["temperature"], 0.6);
  EXPECT_EQ(body["messages"][1]["content"].get<std::string>().rfind("Article body.\n\n", 0), 0u);

  HttpChatBackend bad(base + "/bad", "", std::chrono::seconds(5));
  try {
    bad.complete(ChatRequest{});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_FALSE(e.retryable());
  }
  server.stop();
  t.join();
}
