#include <doctest.h>

#include "analytics_fixture.hpp"

using namespace personaflow;

TEST_SUITE("analytics") {
  TEST_CASE("fully mapped store reports complete coverage") {
    pftest::AnalyticsFixture f;
    const auto s = f.summary();
    CHECK(s.total_issues == 10);
    CHECK(s.active_personas == 5);
    CHECK(s.mapped_issues == 10);
    CHECK(s.coverage_rate == 1.0);
    CHECK(s.repo_stars == 42);
    CHECK(s.label_distribution.at("bug") == 5);
    CHECK(s.label_distribution.at(std::string(kNoLabelBucket)) == 5);
    for (const auto& id : f.persona_ids) CHECK(s.persona_coverage.at(id) == 2);
  }

  TEST_CASE("removing associations from half the issues halves coverage") {
    pftest::AnalyticsFixture f;
    f.unmap_first(5);
    const auto s = f.summary();
    CHECK(s.mapped_issues == 5);
    CHECK(s.unmapped_issues == 5);
    CHECK(s.coverage_rate == 0.5);
  }

  TEST_CASE("archived personas stop counting") {
    pftest::AnalyticsFixture f;
    auto p = f.store.get_persona(f.persona_ids[1])->value;
    p.archived = true;
    f.store.update_persona(p);
    const auto s = f.summary();
    CHECK(s.active_personas == 4);
    CHECK(s.mapped_issues == 8);
    CHECK(s.persona_coverage.count(f.persona_ids[1]) == 0);
  }

  TEST_CASE("empty repository") {
    RepositoryRef r;
    const auto s = compute_summary(r, {pftest::sample_persona()}, {}, {});
    CHECK(s.coverage_rate == 0.0);
    CHECK(s.persona_coverage.empty());
  }
}
