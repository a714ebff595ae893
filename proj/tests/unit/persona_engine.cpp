#include <doctest.h>

#include "personaflow/errors.hpp"
#include "personaflow/persona_engine.hpp"
#include "support.hpp"

using namespace personaflow;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST_SUITE("persona_engine") {
  TEST_CASE("persona count range") {
    CHECK_NOTHROW(check_persona_count(1));
    CHECK_NOTHROW(check_persona_count(10));
    CHECK(code_of([] { check_persona_count(0); }) == ErrorCode::kInvalidParams);
    CHECK(code_of([] { check_persona_count(11); }) == ErrorCode::kInvalidParams);
  }

  TEST_CASE("patch edits content and marks the persona edited") {
    auto p = pftest::sample_persona();
    p.id = "p1";
    p.avatar = parameterized_avatar(p);
    const auto later = now_utc();
    const auto out = apply_patch(p, {{"goals", {"Print setlists"}}, {"age", 22}}, later);
    CHECK(out.edited);
    CHECK(out.age == 22);  // edited personas are no longer bound by the generated-age window
    CHECK(out.goals == std::vector<std::string>{"Print setlists"});
    CHECK(out.id == "p1");
    CHECK(out.provenance == Provenance::kAiGenerated);
    CHECK(out.updated_at >= later);
  }

  TEST_CASE("patch rejects bookkeeping fields, wrong types and empty lists") {
    const auto p = pftest::sample_persona();
    CHECK(code_of([&] { apply_patch(p, {{"id", "p9"}}, now_utc()); }) == ErrorCode::kInvalidPatch);
    CHECK(code_of([&] { apply_patch(p, {{"provenance", "manual"}}, now_utc()); }) == ErrorCode::kInvalidPatch);
    CHECK(code_of([&] { apply_patch(p, {{"age", "old"}}, now_utc()); }) == ErrorCode::kInvalidPatch);
    CHECK(code_of([&] { apply_patch(p, {{"goals", Json::array()}}, now_utc()); }) == ErrorCode::kInvalidPatch);
    CHECK(code_of([&] { apply_patch(p, Json::array(), now_utc()); }) == ErrorCode::kInvalidPatch);
  }

  TEST_CASE("renaming refreshes a parameterized avatar") {
    auto p = pftest::sample_persona();
    p.avatar = parameterized_avatar(p);
    const auto out = apply_patch(p, {{"name", "Robin Vale"}}, now_utc());
    CHECK(out.avatar.seed_inputs.at("name") == "Robin Vale");
    CHECK(out.avatar.locator != p.avatar.locator);
  }

  TEST_CASE("custom personas are manual with full confidence") {
    const Json fields = {{"name", "Sam Lee"},          {"age", 19},
                         {"occupation", "Student"},    {"goals", {"Pass exams"}},
                         {"pain_points", {"Cost"}},    {"provenance", "merged"},
                         {"source_persona_ids", {"p1"}}};
    const auto p = make_custom_persona(fields, now_utc());
    CHECK(p.provenance == Provenance::kManual);
    CHECK(p.confidence_score == 1.0);
    CHECK(p.source_persona_ids.empty());
    CHECK(p.avatar.kind == AvatarKind::kParameterizedUrl);
    CHECK(code_of([] { make_custom_persona({{"age", 30}}, now_utc()); }) == ErrorCode::kInvalidPersona);
    CHECK(code_of([] { make_custom_persona({{"name", "X"}, {"age", 30}}, now_utc()); }) == ErrorCode::kInvalidPersona);
  }

  TEST_CASE("parameterized avatar is deterministic") {
    const auto p = pftest::sample_persona();
    CHECK(parameterized_avatar(p) == parameterized_avatar(p));
    auto q = p;
    q.experience_level = ExperienceLevel::kExpert;
    CHECK(parameterized_avatar(q).locator != parameterized_avatar(p).locator);
  }

  TEST_CASE("failed image generation falls back to the parameterized url") {
    LlmClient llm(nullptr, std::make_shared<FailingImageProvider>(), nullptr);
    std::vector<std::string> warnings;
    const auto p = pftest::sample_persona();
    const auto a = assign_avatar(llm, p, AvatarMode::kGeneratedImage, "j", warnings);
    CHECK(a == parameterized_avatar(p));
    CHECK(warnings.size() == 1);
    CHECK(llm.ledger()->image_calls("j") == 1);

    LlmClient ok(nullptr, std::make_shared<MockImageProvider>(), nullptr);
    const auto g = assign_avatar(ok, p, AvatarMode::kGeneratedImage, "j", warnings);
    CHECK(g.kind == AvatarKind::kGeneratedImage);
    CHECK(warnings.size() == 1);

    const auto u = assign_avatar(ok, p, AvatarMode::kParameterizedUrl, "k", warnings);
    CHECK(u.kind == AvatarKind::kParameterizedUrl);
    CHECK(ok.ledger()->image_calls("k") == 0);
  }

  TEST_CASE("headshot context fills every placeholder") {
    const auto ctx = headshot_context(pftest::sample_persona());
    for (const auto& key : required_placeholders(Stage::kHeadshot)) CHECK(ctx.count(key) == 1);
    CHECK_NOTHROW(render_prompt(Stage::kHeadshot, ctx));
  }
}
