#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "lexreport/http_providers.hpp"
#include "lexreport/mock_providers.hpp"
#include "lexreport/prompts.hpp"
#include "lexreport/retrieval.hpp"
#include "lexreport/text.hpp"
#include "test_support.hpp"

namespace lexreport {
namespace {

using testing::code_of;

RetryPolicy recording_policy(int max_retries, std::vector<std::chrono::milliseconds>& sleeps) {
  RetryPolicy p;
  p.max_retries = max_retries;
  p.sleep = [&sleeps](std::chrono::milliseconds d) { sleeps.push_back(d); };
  return p;
}

TEST(Retry, TransientThenSuccess) {
  std::vector<std::chrono::milliseconds> sleeps;
  std::vector<std::string> log;
  int calls = 0;
  const auto out = with_retry(
      recording_policy(2, sleeps),
      [&]() -> std::string {
        if (++calls == 1) throw TransientFailure{"connection reset"};
        return "ok";
      },
      [&](std::string_view line) { log.emplace_back(line); });
  EXPECT_EQ(out, "ok");
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(std::count_if(log.begin(), log.end(), [](const auto& l) { return l.rfind("attempt ", 0) == 0 && l.find("failed") == std::string::npos; }), 2);
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000)}));
}

TEST(Retry, BackoffDoublesUntilExhausted) {
  std::vector<std::chrono::milliseconds> sleeps;
  int calls = 0;
  EXPECT_EQ(code_of([&] {
              with_retry(recording_policy(3, sleeps), [&]() -> std::string {
                ++calls;
                throw TransientFailure{"503"};
              });
            }),
            ErrorCode::ProviderUnavailable);
  EXPECT_EQ(calls, 4);
  using ms = std::chrono::milliseconds;
  EXPECT_EQ(sleeps, (std::vector<ms>{ms(1000), ms(2000), ms(4000)}));
}

TEST(Retry, ZeroRetriesFailsImmediately) {
  std::vector<std::chrono::milliseconds> sleeps;
  int calls = 0;
  EXPECT_EQ(code_of([&] {
              with_retry(recording_policy(0, sleeps), [&]() -> std::string {
                ++calls;
                throw TransientFailure{"down"};
              });
            }),
            ErrorCode::ProviderUnavailable);
  EXPECT_EQ(calls, 1);
  EXPECT_TRUE(sleeps.empty());
}

TEST(Retry, NonTransientErrorsPropagate) {
  std::vector<std::chrono::milliseconds> sleeps;
  int calls = 0;
  EXPECT_EQ(code_of([&] {
              with_retry(recording_policy(3, sleeps), [&]() -> std::string {
                ++calls;
                throw Error(ErrorCode::ResponseEmpty, "x");
              });
            }),
            ErrorCode::ResponseEmpty);
  EXPECT_EQ(calls, 1);
}

TEST(ProviderConfig, Validate) {
  ProviderConfig c;
  EXPECT_FALSE(code_of([&] { c.validate(); }));
  c.max_retries = -1;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidConfig);
  c.max_retries = 0;
  c.max_in_flight = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidConfig);
}

TEST(Limiter, NeverExceedsMaxInFlight) {
  ConcurrencyLimiter limiter(4);
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 16; ++t) {
      threads.emplace_back([&] {
        for (int i = 0; i < 20; ++i) {
          auto permit = limiter.acquire();
          const int now = ++in_flight;
          int prev = peak.load();
          while (now > prev && !peak.compare_exchange_weak(prev, now)) {
          }
          std::this_thread::sleep_for(std::chrono::microseconds(200));
          --in_flight;
        }
      });
    }
  }
  EXPECT_LE(peak.load(), 4);
  EXPECT_GE(peak.load(), 1);
  EXPECT_EQ(code_of([] { ConcurrencyLimiter bad(0); }), ErrorCode::InvalidConfig);
}

class CountingEmbedder : public Embedder {
 public:
  explicit CountingEmbedder(std::size_t returned_dim = 3) : dim_(returned_dim) {}
  std::vector<std::size_t> batch_sizes;
  std::size_t dim_;
  bool drop_one = false;

 protected:
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override {
    batch_sizes.push_back(texts.size());
    std::vector<EmbeddingVector> out;
    for (const auto& t : texts) out.push_back(EmbeddingVector(dim_, static_cast<float>(t.size())));
    if (drop_one) out.pop_back();
    return out;
  }
};

TEST(Embedder, ChunksIntoSubBatchesOf128) {
  CountingEmbedder e;
  std::vector<std::string> texts;
  for (int i = 0; i < 300; ++i) texts.push_back("text " + std::to_string(i));
  const auto out = e.embed(texts);
  EXPECT_EQ(out.size(), 300U);
  EXPECT_EQ(e.batch_sizes, (std::vector<std::size_t>{128, 128, 44}));
  EXPECT_EQ(e.batch_calls(), 3U);
  for (const auto& v : out) {
    double n = 0;
    for (float x : v) n += static_cast<double>(x) * x;
    EXPECT_NEAR(n, 1.0, 1e-6);
  }
  EXPECT_EQ(e.dimension(), 3U);
}

TEST(Embedder, RejectsBadInputsAndDimensions) {
  CountingEmbedder e;
  EXPECT_EQ(code_of([&] { e.embed(std::vector<std::string>{}); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([&] { e.embed(std::vector<std::string>{"a", " "}); }), ErrorCode::InvalidParams);
  e.embed_one("first");
  e.dim_ = 4;
  EXPECT_EQ(code_of([&] { e.embed_one("second"); }), ErrorCode::DimensionMismatch);
  CountingEmbedder fixed_dim;
  fixed_dim.drop_one = true;
  EXPECT_EQ(code_of([&] { fixed_dim.embed(std::vector<std::string>{"a", "b"}); }), ErrorCode::DimensionMismatch);
}

TEST(MockEmbed, Contract) {
  EXPECT_NEAR(cosine(mock_embed("a a"), mock_embed("a")), 1.0, 1e-6);
  const auto e0 = mock_embed(" ,;- ");
  ASSERT_EQ(e0.size(), kMockDimension);
  EXPECT_EQ(e0[0], 1.0F);
  EXPECT_EQ(std::count(e0.begin(), e0.end(), 0.0F), static_cast<long>(kMockDimension - 1));
  EXPECT_EQ(mock_embed("Forced, MEDICAL"), mock_embed("forced medical"));
  MockEmbedder m;
  const auto v = m.embed(std::vector<std::string>{"same text", "same text"});
  EXPECT_NEAR(cosine(v[0], v[1]), 1.0, 1e-6);
}

TEST(MockEmbed, Goldens) {
  // Values from tests/oracles/mock_oracle.py (independent Python implementation).
  const double c = cosine(mock_embed("forced medical intervention"), mock_embed("forced medical intervention torture"));
  EXPECT_NEAR(c, 0.866025404, 1e-6);
  EXPECT_GT(c, 0.8);
  // Mock keyphrase lines of two fixture paragraphs; their token sets are disjoint.
  const std::string a = "ventilation, natural, conditions, beds, bunk";
  const std::string b = "given, he, manner, never, taking";
  auto ta = text::tokenize(a);
  auto tb = text::tokenize(b);
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  std::vector<std::string> shared;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(shared));
  ASSERT_TRUE(shared.empty());
  EXPECT_LT(cosine(mock_embed(a), mock_embed(b)), 0.3);
}

TEST(MockChat, StageOutputs) {
  const auto& corpus = testing::fixture_corpus();
  MockChat chat{TokenStats(corpus)};
  ChatRequest judge;
  judge.user_prompt = "anything";
  judge.stage = Stage::Judge;
  EXPECT_EQ(chat.chat(judge), "4");

  EXPECT_EQ(chat.chat(prompts::reorganize_request("B\nA")), "A\nB");

  const auto content = chat.chat(prompts::content_request("Heading", "", "J1#3: first text\nJ2#7: second text"));
  for (const std::string tok : {"(J1#3)", "(J2#7)"}) {
    const auto first = content.find(tok);
    ASSERT_NE(first, std::string::npos) << content;
    EXPECT_EQ(content.find(tok, first + 1), std::string::npos);
  }

  ChatRequest none;
  none.user_prompt = "x";
  EXPECT_EQ(code_of([&] { chat.chat(none); }), ErrorCode::UnknownStage);
}

TEST(MockChat, KeyphrasesAreRarestTokens) {
  // Golden from tests/oracles/mock_oracle.py: document frequencies over the fixture.
  const auto& corpus = testing::fixture_corpus();
  MockChat chat{TokenStats(corpus)};
  const std::vector<std::string> one{corpus.get_paragraph({"001-57574", 7}).text};
  EXPECT_EQ(chat.chat(prompts::keyphrase_request(one)), "ventilation, natural, conditions, beds, bunk");
  const std::vector<std::string> two{corpus.get_paragraph({"001-57574", 7}).text,
                                     corpus.get_paragraph({"001-58026", 8}).text};
  EXPECT_EQ(chat.chat(prompts::keyphrase_request(two)),
            "ventilation, natural, conditions, beds, bunk\ngiven, he, manner, never, taking");
}

TEST(MockChat, Deterministic) {
  const auto& corpus = testing::fixture_corpus();
  MockChat a{TokenStats(corpus)};
  MockChat b{TokenStats(corpus)};
  const std::vector<std::string> texts{corpus.get_paragraph({"001-58026", 8}).text};
  EXPECT_EQ(a.chat(prompts::topic_label_request(texts)), b.chat(prompts::topic_label_request(texts)));
  EXPECT_EQ(a.chat(prompts::topic_label_request(texts)).rfind("topic: ", 0), 0U);
}

TEST(Tracing, RecordsStages) {
  auto trace = std::make_shared<CallTrace>();
  TracingChatProvider chat(std::make_shared<MockChat>(), trace);
  chat.chat(prompts::reorganize_request("A"));
  ChatRequest j;
  j.user_prompt = "x";
  j.stage = Stage::Judge;
  chat.chat(j);
  chat.chat(j);
  EXPECT_EQ(trace->total(), 3U);
  EXPECT_EQ(trace->count(Stage::Judge), 2U);
  EXPECT_EQ(trace->count(Stage::Reorganize), 1U);
  trace->clear();
  EXPECT_EQ(trace->total(), 0U);
}

// ---------------------------------------------------------------- HTTP clients

class FakeTransport : public HttpTransport {
 public:
  struct Call {
    std::string path;
    std::string body;
    HeaderList headers;
  };
  std::vector<HttpResponse> responses;
  std::vector<Call> calls;
  int fail_connections = 0;

  HttpResponse post_json(const std::string& path, const std::string& body, const HeaderList& headers) override {
    calls.push_back({path, body, headers});
    if (fail_connections > 0) {
      --fail_connections;
      throw TransientFailure{"connection refused"};
    }
    auto r = responses.front();
    if (responses.size() > 1) responses.erase(responses.begin());
    return r;
  }
};

std::string chat_body(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

RetryPolicy no_sleep() {
  RetryPolicy p;
  p.sleep = [](std::chrono::milliseconds) {};
  return p;
}

TEST(OpenAIChat, RequestShapeAndAuth) {
  ::setenv("LEXREPORT_TEST_KEY", "sk-secret", 1);
  auto t = std::make_shared<FakeTransport>();
  t->responses = {{200, chat_body("hello")}};
  ProviderConfig cfg;
  cfg.model_id = "m1";
  cfg.api_key_env_var = "LEXREPORT_TEST_KEY";
  cfg.verbose = true;
  std::vector<std::string> log;
  OpenAICompatibleChat chat(cfg, t, no_sleep(), [&](std::string_view l) { log.emplace_back(l); });
  ChatRequest req;
  req.system_prompt = "sys";
  req.user_prompt = "user";
  req.max_output_tokens = 77;
  EXPECT_EQ(chat.chat(req), "hello");
  ASSERT_EQ(t->calls.size(), 1U);
  EXPECT_EQ(t->calls[0].path, "/chat/completions");
  const auto body = nlohmann::json::parse(t->calls[0].body);
  EXPECT_EQ(body["model"], "m1");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["max_tokens"], 77);
  ASSERT_EQ(body["messages"].size(), 2U);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "user");
  EXPECT_EQ(t->calls[0].headers, (HeaderList{{"Authorization", "Bearer sk-secret"}}));
  ASSERT_FALSE(log.empty());
  for (const auto& l : log) EXPECT_EQ(l.find("sk-secret"), std::string::npos);
  ::unsetenv("LEXREPORT_TEST_KEY");
}

TEST(OpenAIChat, RetriesServerErrorsNotClientErrors) {
  auto t = std::make_shared<FakeTransport>();
  t->responses = {{503, "busy"}, {429, "slow down"}, {200, chat_body("ok")}};
  ProviderConfig cfg;
  cfg.max_retries = 2;
  OpenAICompatibleChat chat(cfg, t, no_sleep());
  ChatRequest req;
  req.user_prompt = "u";
  EXPECT_EQ(chat.chat(req), "ok");
  EXPECT_EQ(t->calls.size(), 3U);

  auto t2 = std::make_shared<FakeTransport>();
  t2->responses = {{400, "bad request"}};
  OpenAICompatibleChat chat2(cfg, t2, no_sleep());
  EXPECT_EQ(code_of([&] { chat2.chat(req); }), ErrorCode::ProviderUnavailable);
  EXPECT_EQ(t2->calls.size(), 1U);

  auto t3 = std::make_shared<FakeTransport>();
  t3->fail_connections = 100;
  cfg.max_retries = 0;
  OpenAICompatibleChat chat3(cfg, t3, no_sleep());
  EXPECT_EQ(code_of([&] { chat3.chat(req); }), ErrorCode::ProviderUnavailable);
  EXPECT_EQ(t3->calls.size(), 1U);
}

TEST(OpenAIChat, EmptyResponses) {
  ProviderConfig cfg;
  ChatRequest req;
  req.user_prompt = "u";
  for (const std::string body : {chat_body("   "), std::string(R"({"choices":[]})"), std::string("not json"),
                                 std::string(R"({"choices":[{"message":{}}]})")}) {
    auto t = std::make_shared<FakeTransport>();
    t->responses = {{200, body}};
    OpenAICompatibleChat chat(cfg, t, no_sleep());
    EXPECT_EQ(code_of([&] { chat.chat(req); }), ErrorCode::ResponseEmpty) << body;
  }
}

TEST(OpenAIEmbedder, ParsesAndReordersByIndex) {
  auto t = std::make_shared<FakeTransport>();
  t->responses = {{200, R"({"data":[{"index":1,"embedding":[0,2]},{"index":0,"embedding":[3,4]}]})"}};
  ProviderConfig cfg;
  cfg.model_id = "emb";
  OpenAICompatibleEmbedder e(cfg, t, no_sleep());
  const auto v = e.embed(std::vector<std::string>{"first", "second"});
  ASSERT_EQ(v.size(), 2U);
  EXPECT_FLOAT_EQ(v[0][0], 0.6F);
  EXPECT_FLOAT_EQ(v[0][1], 0.8F);
  EXPECT_FLOAT_EQ(v[1][1], 1.0F);
  const auto body = nlohmann::json::parse(t->calls[0].body);
  EXPECT_EQ(body["input"], (nlohmann::json{"first", "second"}));
  EXPECT_EQ(t->calls[0].path, "/embeddings");
}

TEST(OpenAIEmbedder, MalformedAndMismatched) {
  ProviderConfig cfg;
  auto t = std::make_shared<FakeTransport>();
  t->responses = {{200, R"({"data":[{"embedding":"oops"}]})"}};
  OpenAICompatibleEmbedder e(cfg, t, no_sleep());
  EXPECT_EQ(code_of([&] { e.embed_one("x"); }), ErrorCode::ResponseEmpty);

  auto t2 = std::make_shared<FakeTransport>();
  t2->responses = {{200, R"({"data":[{"embedding":[1,0,0]}]})"}, {200, R"({"data":[{"embedding":[1,0]}]})"}};
  OpenAICompatibleEmbedder e2(cfg, t2, no_sleep());
  e2.embed_one("x");
  EXPECT_EQ(code_of([&] { e2.embed_one("y"); }), ErrorCode::DimensionMismatch);
}

TEST(HttpTransport, TalksToLocalServer) {
  httplib::Server server;
  std::atomic<int> chat_hits{0};
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++chat_hits;
    seen_auth = req.get_header_value("Authorization");
    const auto body = nlohmann::json::parse(req.body);
    if (chat_hits == 1) {
      res.status = 500;
      return;
    }
    res.set_content(chat_body("echo: " + body["messages"].back()["content"].get<std::string>()), "application/json");
  });
  server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    for (std::size_t i = 0; i < body["input"].size(); ++i) {
      data.push_back({{"index", i}, {"embedding", {1.0, static_cast<double>(i)}}});
    }
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::jthread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ProviderConfig cfg;
  cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/";
  cfg.timeout = std::chrono::seconds(5);
  auto transport = make_http_transport(cfg.endpoint_url, cfg.timeout);
  OpenAICompatibleChat chat(cfg, transport, no_sleep());
  ChatRequest req;
  req.user_prompt = "ping";
  EXPECT_EQ(chat.chat(req), "echo: ping");
  EXPECT_EQ(chat_hits.load(), 2);
  EXPECT_EQ(seen_auth, "");

  OpenAICompatibleEmbedder emb(cfg, transport, no_sleep());
  const auto v = emb.embed(std::vector<std::string>{"a", "b", "c"});
  ASSERT_EQ(v.size(), 3U);
  EXPECT_NEAR(v[2][1], 2.0 / std::sqrt(5.0), 1e-6);
  server.stop();
}

TEST(HttpTransport, UnreachableHostIsTransient) {
  auto transport = make_http_transport("http://127.0.0.1:1", std::chrono::seconds(1));
  EXPECT_THROW(transport->post_json("/x", "{}", {}), TransientFailure);
}

}  // namespace
}  // namespace lexreport
