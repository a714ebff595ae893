#include <doctest.h>

#include "golden_prompts.hpp"
#include "personaflow/errors.hpp"

using namespace personaflow;

TEST_SUITE("prompts") {
  TEST_CASE("rendered prompts equal the golden files") {
    const auto results = pftest::compare_goldens();
    CHECK(results.size() == 15);
    for (const auto& r : results) {
      INFO(r.name);
      CHECK(r.equal);
    }
  }

  TEST_CASE("missing placeholder is reported, empty values are fine") {
    auto ctx = pftest::canonical_context();
    ctx.erase("readme_text");
    try {
      render_prompt(Stage::kLinkDiscovery, ctx);
      FAIL("expected MissingPlaceholder");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMissingPlaceholder);
    }
    ctx["readme_text"] = "";
    CHECK_NOTHROW(render_prompt(Stage::kLinkDiscovery, ctx));
  }

  TEST_CASE("values containing placeholder syntax are not expanded twice") {
    auto ctx = pftest::canonical_context();
    ctx["readme_text"] = "literal [owner/repo] and {{owner_repo}}";
    const auto b = render_prompt(Stage::kLinkDiscovery, ctx);
    CHECK(b.user_text.find("literal [owner/repo] and {{owner_repo}}") != std::string::npos);
  }

  TEST_CASE("fixture key is stage plus stable context hash") {
    const auto ctx = pftest::canonical_context();
    const auto a = render_prompt(Stage::kIssueMapping, ctx);
    const auto b = render_prompt(Stage::kIssueMapping, ctx);
    CHECK(a.fixture_key == b.fixture_key);
    CHECK(a.fixture_key.rfind("issue_mapping:", 0) == 0);
    auto changed = ctx;
    changed["issue_text"] += " ";
    CHECK(render_prompt(Stage::kIssueMapping, changed).fixture_key != a.fixture_key);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
  }

  TEST_CASE("headshot template follows the occupation hash") {
    auto ctx = pftest::canonical_context();
    const int expected = static_cast<int>(fnv1a64(ctx["occupation"]) % kHeadshotTemplateCount);
    CHECK(headshot_template_index(ctx["occupation"]) == expected);
    const auto b = render_prompt(Stage::kHeadshot, ctx);
    CHECK(b.user_text ==
          pftest::read_file(pftest::kGolden / ("headshot." + std::to_string(expected) + ".user.txt")));
    ctx["template_index"] = "3";
    CHECK_THROWS_AS(render_prompt(Stage::kHeadshot, ctx), Error);
  }

  TEST_CASE("repair prompt appends the instruction once") {
    const auto b = render_prompt(Stage::kUserInsights, pftest::canonical_context());
    const auto r = with_repair_instruction(b);
    CHECK(r.user_text.find(kRepairInstruction) != std::string::npos);
    CHECK(r.fixture_key == b.fixture_key + ":repair");
  }

  TEST_CASE("issue text format") {
    IssueRecord i;
    i.title = "Export fails";
    i.body = "Stack trace";
    i.labels = {"bug", "export"};
    const auto t = format_issue(i);
    CHECK(t.find("Title: Export fails") != std::string::npos);
    CHECK(t.find("Body: Stack trace") != std::string::npos);
    CHECK(t.find("Labels: bug, export") != std::string::npos);
  }

  TEST_CASE("mapping personas get 1-based ids") {
    auto a = pftest::sample_persona("A One");
    auto b = pftest::sample_persona("B Two");
    const auto j = Json::parse(format_personas_for_mapping({a, b}));
    REQUIRE(j.size() == 2);
    CHECK(j[0]["id"] == 1);
    CHECK(j[1]["id"] == 2);
    CHECK(j[1]["name"] == "B Two");
  }
}
