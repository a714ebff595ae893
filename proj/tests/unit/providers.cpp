#include <doctest.h>

#include "golden_prompts.hpp"
#include "personaflow/errors.hpp"
#include "personaflow/providers.hpp"
#include "personaflow/stage_parse.hpp"

using namespace personaflow;

namespace {

/// Answers from a queue; an empty entry throws a transport error.
class QueueProvider final : public TextProvider {
 public:
  std::vector<std::string> answers;
  std::vector<PromptBundle> seen;
  Completion complete(const PromptBundle& b) override {
    seen.push_back(b);
    auto next = answers.at(seen.size() - 1);
    if (next.empty()) throw Error(ErrorCode::kIo, "connection reset");
    return {next, {10, 5}};
  }
  std::string name() const override { return "queue"; }
};

class CannedTransport final : public HttpTransport {
 public:
  HttpResponse response;
  HttpRequest last;
  HttpResponse send(const HttpRequest& r) override {
    last = r;
    return response;
  }
};

PromptBundle insights_bundle() { return render_prompt(Stage::kUserInsights, pftest::canonical_context()); }

const char* kInsights =
    R"({"user_types":["a"],"primary_use_cases":["b"],"user_needs":["c"],"pain_points":["d"],"community_insights":"e","persona_recommendations":["f"]})";

}  // namespace

TEST_SUITE("providers") {
  TEST_CASE("mock provider without a fixture is a provider error") {
    auto mock = std::make_shared<MockTextProvider>();
    LlmClient llm(mock, nullptr, nullptr);
    try {
      llm.complete(insights_bundle(), "j1");
      FAIL("expected ProviderError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kProviderError);
    }
    CHECK(llm.ledger()->text_calls("j1") == 1);
    mock->add(insights_bundle().fixture_key, kInsights);
    CHECK(llm.complete(insights_bundle(), "j1") == kInsights);
  }

  TEST_CASE("recorded fixture directory loads") {
    MockTextProvider mock(pftest::kFixtures / "mock");
    CHECK(mock.size() > 40);
  }

  TEST_CASE("unparseable answer gets one repair re-ask") {
    auto q = std::make_shared<QueueProvider>();
    q->answers = {"I think the users are musicians.", kInsights};
    LlmClient llm(q, nullptr, nullptr);
    const auto out = llm.complete_parsed(insights_bundle(), "j", [](const std::string& raw) { return parse_user_insights(raw); });
    CHECK(out.user_types == std::vector<std::string>{"a"});
    REQUIRE(q->seen.size() == 2);
    CHECK(q->seen[1].user_text.find(kRepairInstruction) != std::string::npos);

    auto bad = std::make_shared<QueueProvider>();
    bad->answers = {"nope", "still nope"};
    LlmClient llm2(bad, nullptr, nullptr);
    try {
      llm2.complete_parsed(insights_bundle(), "j", [](const std::string& raw) { return parse_user_insights(raw); });
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParseError);
    }
    CHECK(bad->seen.size() == 2);
  }

  TEST_CASE("transport failures are retried once and counted") {
    auto q = std::make_shared<QueueProvider>();
    q->answers = {"", kInsights};
    LlmClient llm(q, nullptr, nullptr);
    CHECK(llm.complete(insights_bundle(), "j") == kInsights);
    const auto calls = llm.ledger()->calls_for("j");
    REQUIRE(calls.size() == 2);
    CHECK_FALSE(calls[0].succeeded);
    CHECK(calls[1].succeeded);

    auto down = std::make_shared<QueueProvider>();
    down->answers = {"", ""};
    LlmClient llm2(down, nullptr, nullptr);
    CHECK_THROWS_AS(llm2.complete(insights_bundle(), "j"), Error);
  }

  TEST_CASE("scripted provider picks the first matching rule") {
    ScriptedTextProvider s({{Stage::kUserInsights, "no such text", "first"},
                            {Stage::kUserInsights, "", "second"},
                            {Stage::kUserInsights, "", "third"}});
    CHECK(s.complete(insights_bundle()).text == "second");
    CHECK_THROWS_AS(s.complete(render_prompt(Stage::kMerge, pftest::canonical_context())), Error);
  }

  TEST_CASE("chat completions request and response") {
    auto t = std::make_shared<CannedTransport>();
    t->response.status = 200;
    t->response.body = R"({"choices":[{"message":{"content":"hello"}}],"usage":{"prompt_tokens":12,"completion_tokens":3}})";
    ChatProviderConfig cfg;
    cfg.endpoint = "https://llm.example/v1/";
    cfg.api_key = "k";
    ChatCompletionsProvider chat(t, cfg);
    const auto c = chat.complete(insights_bundle());
    CHECK(c.text == "hello");
    CHECK(c.tokens.input == 12);
    CHECK(t->last.url == "https://llm.example/v1/chat/completions");
    CHECK(t->last.headers["Authorization"] == "Bearer k");
    const auto body = Json::parse(t->last.body);
    CHECK(body["messages"].size() == 2);

    t->response.status = 503;
    try {
      chat.complete(insights_bundle());
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kIo);
    }
    t->response.status = 401;
    try {
      chat.complete(insights_bundle());
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kProviderError);
    }
  }

  TEST_CASE("ledger cost") {
    CallLedger ledger;
    ledger.record({"a", Stage::kMerge, false, {100, 50}, true, {}, {}});
    ledger.record({"a", Stage::kHeadshot, true, {}, true, {}, {}});
    ledger.record({"b", Stage::kMerge, false, {10, 10}, true, {}, {}});
    TokenPrices p{0.01, 0.02, 0.5};
    CHECK(ledger.cost(p, "a") == doctest::Approx(2.5));
    CHECK(ledger.cost(p) == doctest::Approx(2.8));
    CHECK(ledger.image_calls("a") == 1);
  }
}
