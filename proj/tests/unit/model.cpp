#include <doctest.h>

#include "personaflow/errors.hpp"
#include "support.hpp"

using namespace personaflow;

TEST_SUITE("model") {
  TEST_CASE("band boundaries are inclusive at the lower edge") {
    CHECK(band_of(1.0) == ConfidenceBand::kHigh);
    CHECK(band_of(0.8) == ConfidenceBand::kHigh);
    CHECK(band_of(0.7999) == ConfidenceBand::kMedium);
    CHECK(band_of(0.6) == ConfidenceBand::kMedium);
    CHECK(band_of(0.5999) == ConfidenceBand::kLow);
    CHECK(band_of(0.4) == ConfidenceBand::kLow);
    CHECK(band_of(0.3999) == ConfidenceBand::kUnmatched);
    CHECK(band_of(0.0) == ConfidenceBand::kUnmatched);
    CHECK_THROWS_AS(band_of(1.01), Error);
    CHECK_THROWS_AS(band_of(-0.1), Error);
  }

  TEST_CASE("ai persona age window applies only to unedited ai output") {
    auto p = pftest::sample_persona("Young Person", 24);
    CHECK_FALSE(validate_persona(p).empty());
    p.edited = true;
    CHECK(validate_persona(p).empty());
    p.edited = false;
    p.provenance = Provenance::kManual;
    CHECK(validate_persona(p).empty());
    p.provenance = Provenance::kAiGenerated;
    p.age = 25;
    CHECK(validate_persona(p).empty());
    p.age = 66;
    CHECK_FALSE(validate_persona(p).empty());
  }

  TEST_CASE("merged personas need two distinct sources") {
    auto p = pftest::sample_persona();
    p.provenance = Provenance::kMerged;
    p.source_persona_ids = {"p1"};
    CHECK_FALSE(validate_persona(p).empty());
    p.source_persona_ids = {"p1", "p1"};
    CHECK_FALSE(validate_persona(p).empty());
    p.source_persona_ids = {"p1", "p2"};
    CHECK(validate_persona(p).empty());
  }

  TEST_CASE("mapping primary must be matched and ai associations need rationale") {
    IssuePersonaMapping m;
    m.issue_number = 7;
    Association a;
    a.persona_id = "p1";
    a.relevance_score = 0.9;
    a.rationale = "fits";
    m.associations.push_back(a);
    m.primary_persona_id = "p1";
    m.confidence = 0.9;
    CHECK(validate_mapping(m, {"p1"}).empty());
    m.primary_persona_id = "p2";
    CHECK_FALSE(validate_mapping(m).empty());
    m.primary_persona_id = "p1";
    m.associations[0].rationale = " ";
    CHECK_FALSE(validate_mapping(m).empty());
    m.associations[0].rationale = "fits";
    CHECK_FALSE(validate_mapping(m, {"p9"}).empty());
  }

  TEST_CASE("json round trip preserves every field") {
    auto p = pftest::sample_persona();
    p.id = "p3";
    p.tags = {"music"};
    p.avatar.locator = "https://example.test/a.png";
    p.avatar.seed_inputs = {{"name", "Dana Park"}};
    p.created_at = *parse_timestamp("2026-01-31T08:15:00.123Z");
    p.updated_at = p.created_at;
    Json j = p;
    CHECK(j.get<Persona>() == p);

    SyncRequest r;
    r.mode = SyncMode::kByDateRange;
    r.since = parse_timestamp("2025-01-01");
    r.until = parse_timestamp("2025-02-01T00:00:00+02:00");
    Json rj = r;
    CHECK(rj.get<SyncRequest>() == r);
  }

  TEST_CASE("timestamps format in utc with milliseconds") {
    const auto t = parse_timestamp("2026-01-31T10:15:00.5+02:00");
    REQUIRE(t);
    CHECK(format_timestamp(*t) == "2026-01-31T08:15:00.500Z");
    CHECK_FALSE(parse_timestamp("yesterday"));
  }

  TEST_CASE("enum names round trip") {
    for (int i = 0; i < enum_size<JobStage>(); ++i) {
      const auto s = static_cast<JobStage>(i);
      CHECK(parse_enum<JobStage>(to_string(s)) == s);
    }
    CHECK_FALSE(parse_enum<SyncMode>("sometimes"));
  }

  TEST_CASE("error codes map to http statuses") {
    CHECK(http_status_for(ErrorCode::kUnknownPersona) == 404);
    CHECK(http_status_for(ErrorCode::kStaleVersion) == 409);
    CHECK(http_status_for(ErrorCode::kRateLimited) == 429);
    CHECK(http_status_for(ErrorCode::kProviderError) == 502);
    CHECK(http_status_for(ErrorCode::kInvalidParams) == 400);
    CHECK(parse_error_code("BusyRepository") == ErrorCode::kBusyRepository);
    CHECK_FALSE(parse_error_code("Nope"));
  }

  TEST_CASE("sync request validation") {
    SyncRequest r;
    CHECK_NOTHROW(validate_sync_request(r));
    r.mode = SyncMode::kByIds;
    CHECK_THROWS_AS(validate_sync_request(r), Error);
    r.ids = {3};
    CHECK_NOTHROW(validate_sync_request(r));
    r.labels = {"bug"};
    CHECK_THROWS_AS(validate_sync_request(r), Error);
  }

  TEST_CASE("invalid utf8 is replaced") {
    const std::string bad = "ok \xff\xfe end";
    const auto clean = sanitize_utf8(bad);
    CHECK(clean.find("\xEF\xBF\xBD") != std::string::npos);
    CHECK_NOTHROW(dump_json(Json{{"t", bad}}));
  }
}
