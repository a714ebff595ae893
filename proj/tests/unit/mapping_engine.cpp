#include <doctest.h>

#include "override_model.hpp"
#include "personaflow/errors.hpp"
#include "personaflow/mapping_engine.hpp"
#include "support.hpp"

using namespace personaflow;

namespace {

const std::set<std::string> kActive = {"p1", "p2", "p3"};

IssuePersonaMapping ai_mapping() {
  IssuePersonaMapping m;
  m.issue_number = 4;
  Association a;
  a.persona_id = "p1";
  a.relevance_score = 0.9;
  a.rationale = "fits";
  m.associations.push_back(a);
  a.persona_id = "p2";
  a.relevance_score = 0.65;
  m.associations.push_back(a);
  m.primary_persona_id = "p1";
  m.confidence = 0.9;
  return m;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST_SUITE("mapping_engine") {
  TEST_CASE("manual add and remove") {
    auto m = override_associations(ai_mapping(), {"p3"}, {"p1"}, kActive, kActive);
    REQUIRE(m.associations.size() == 3);
    CHECK(m.associations[0].tombstoned);
    CHECK(m.associations[2].origin == AssociationOrigin::kManual);
    CHECK(m.associations[2].relevance_score == 1.0);
    CHECK(m.associations[2].rationale == kManualRationale);
    CHECK(m.primary_persona_id == "p3");
  }

  TEST_CASE("override errors leave the mapping alone") {
    const auto m = ai_mapping();
    CHECK(code_of([&] { override_associations(m, {"p9"}, {}, kActive, kActive); }) == ErrorCode::kUnknownPersona);
    CHECK(code_of([&] { override_associations(m, {}, {"p9"}, kActive, kActive); }) == ErrorCode::kUnknownPersona);
    CHECK(code_of([&] { override_associations(m, {"p1"}, {}, kActive, kActive); }) == ErrorCode::kConflictingRequest);
    CHECK(code_of([&] { override_associations(m, {}, {"p3"}, kActive, kActive); }) == ErrorCode::kConflictingRequest);
    CHECK(code_of([&] { override_associations(m, {"p3"}, {"p3"}, kActive, kActive); }) ==
          ErrorCode::kConflictingRequest);
    // Archived persona: known but inactive, cannot be added.
    CHECK(code_of([&] { override_associations(m, {"p3"}, {}, kActive, {"p1", "p2"}); }) == ErrorCode::kUnknownPersona);
  }

  TEST_CASE("removing the primary moves it to the next strongest") {
    const auto m = override_associations(ai_mapping(), {}, {"p1"}, kActive, kActive);
    CHECK(m.primary_persona_id == "p2");
    CHECK(m.confidence == doctest::Approx(0.65));
    const auto none = override_associations(m, {}, {"p2"}, kActive, kActive);
    CHECK_FALSE(none.primary_persona_id);
    CHECK_FALSE(has_visible(none, kActive));
  }

  TEST_CASE("re-map keeps manual and removed decisions") {
    auto m = override_associations(ai_mapping(), {"p3"}, {"p2"}, kActive, kActive);
    IssuePersonaMapping fresh;
    fresh.issue_number = 4;
    for (const auto& id : {"p1", "p2", "p3"}) {
      Association a;
      a.persona_id = id;
      a.relevance_score = 0.7;
      a.rationale = "again";
      fresh.associations.push_back(a);
    }
    const auto merged = merge_remap(m, fresh, kActive);
    std::map<std::string, Association> by_id;
    for (const auto& a : merged.associations) by_id[a.persona_id] = a;
    CHECK(by_id["p3"].origin == AssociationOrigin::kManual);
    CHECK(by_id["p2"].tombstoned);
    CHECK(by_id["p1"].relevance_score == doctest::Approx(0.7));
  }

  TEST_CASE("unmatched-band associations are hidden") {
    auto m = ai_mapping();
    m.associations[1].relevance_score = 0.39;
    CHECK(is_visible(m.associations[0], kActive));
    CHECK_FALSE(is_visible(m.associations[1], kActive));
    CHECK_FALSE(is_visible(m.associations[0], {"p2"}));
  }

  TEST_CASE("every add/remove/re-map sequence up to length 5 matches the model") {
    const auto run = pftest::run_override_model(5);
    INFO(run.first_mismatch);
    CHECK(run.mismatches == 0);
    CHECK(run.steps > 10000);
  }

  TEST_CASE("mapping needs personas") {
    MappingEngine engine(nullptr, true);
    CHECK(engine.offline());
    IssueRecord issue;
    issue.number = 1;
    CHECK(code_of([&] { engine.map_issue(issue, {}, "j"); }) == ErrorCode::kInvalidParams);
  }
}
