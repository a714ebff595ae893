#include <doctest.h>

#include "personaflow/errors.hpp"
#include "rubric_oracle.hpp"
#include "support.hpp"

using namespace personaflow;

TEST_SUITE("rubric") {
  TEST_CASE("all 1024 flag vectors agree with the oracle") {
    const auto s = pftest::sweep_rubric();
    CHECK(s.mismatches == 0);
    CHECK(s.hits_zero > 0);
    CHECK(s.hits_hundred > 0);
  }

  TEST_CASE("worked example: goal, pain point, workflow, technical mismatch") {
    EvidenceFlags f;
    f.set(static_cast<int>(Evidence::kGoalMentionsFeature));
    f.set(static_cast<int>(Evidence::kPainPointDescribes));
    f.set(static_cast<int>(Evidence::kPrimaryWorkflow));
    f.set(static_cast<int>(Evidence::kTechnicalMismatch));
    const auto r = rubric_score(f);
    CHECK(r.points == 25);
    CHECK(r.breakdown.size() == 4);
    CHECK(rubric_to_confidence(r.points) == doctest::Approx(0.25));
  }

  TEST_CASE("weights follow the table") {
    for (int i = 0; i < kEvidenceCount; ++i) CHECK(evidence_weight(static_cast<Evidence>(i)) == pftest::kOracleWeights[i]);
    CHECK_THROWS_AS(rubric_to_confidence(101), Error);
  }

  TEST_CASE("offline scorer matches overlapping personas only") {
    auto musician = pftest::sample_persona("Mia Stone");
    musician.occupation = "Music Teacher";
    musician.goals = {"Upload sheet music for students"};
    musician.pain_points = {"Uploads of large PDF sheet files fail"};
    auto accountant = pftest::sample_persona("Tom Reed");
    accountant.occupation = "Accountant";
    accountant.goals = {"File quarterly taxes"};
    accountant.pain_points = {"Bank statements in odd formats"};
    musician.id = "p1";
    accountant.id = "p2";
    IssueRecord issue;
    issue.number = 3;
    issue.title = "Uploading large PDF sheet fails";
    issue.body = "When I upload sheet music for my students the upload fails for big files.";
    const auto m = offline_map_issue(issue, {musician, accountant});
    CHECK(validate_mapping(m, {"p1", "p2"}).empty());
    REQUIRE(m.primary_persona_id);
    CHECK(*m.primary_persona_id == "p1");
    for (const auto& a : m.associations) CHECK(a.persona_id != "p2");
  }

  TEST_CASE("content tokens") {
    const auto t = content_tokens("The Uploads of the sheets");
    CHECK(std::find(t.begin(), t.end(), "upload") != t.end());
    CHECK(std::find(t.begin(), t.end(), "the") == t.end());
  }
}
