#include <doctest.h>

#include <unistd.h>

#include <filesystem>

#include "personaflow/errors.hpp"
#include "personaflow/store.hpp"
#include "support.hpp"

using namespace personaflow;

namespace {

std::filesystem::path temp_db(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pf_store_" + name + "_" + std::to_string(::getpid()) + ".db");
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST_SUITE("store") {
  TEST_CASE("every write bumps the version and stale writes fail") {
    Store s(":memory:");
    const auto v1 = s.put("note", "n1", "r", {{"a", 1}});
    const auto v2 = s.put("note", "n1", "r", {{"a", 2}}, v1);
    CHECK(v2 > v1);
    try {
      s.put("note", "n1", "r", {{"a", 3}}, v1);
      FAIL("expected StaleVersion");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kStaleVersion);
    }
    CHECK(s.get("note", "n1")->body["a"] == 2);
  }

  TEST_CASE("tombstones hide records but keep them") {
    Store s(":memory:");
    s.put("note", "n1", "r", {{"a", 1}});
    CHECK(s.tombstone("note", "n1"));
    CHECK_FALSE(s.get("note", "n1"));
    CHECK(s.get("note", "n1", true));
    CHECK(s.list("note", "r").empty());
    CHECK(s.list("note", "r", true).size() == 1);
    CHECK_FALSE(s.tombstone("note", "missing"));
  }

  TEST_CASE("personas get sequential opaque ids") {
    Store s(":memory:");
    RepositoryRef r;
    r.owner = "o";
    r.name = "n";
    s.put_repo(r);
    const auto a = s.insert_persona(r.id(), pftest::sample_persona("A A"));
    const auto b = s.insert_persona(r.id(), pftest::sample_persona("B B"));
    CHECK(a.id == "p1");
    CHECK(b.id == "p2");
    CHECK(s.persona_repo("p2") == r.id());
    auto got = s.get_persona("p1");
    REQUIRE(got);
    got->value.archived = true;
    s.update_persona(got->value, got->version);
    CHECK(s.list_personas(r.id()).size() == 1);
    CHECK(s.list_personas(r.id(), true).size() == 2);
    CHECK_THROWS_AS(s.update_persona(got->value, got->version), Error);
  }

  TEST_CASE("issue upsert ignores sync-time-only changes") {
    Store s(":memory:");
    IssueRecord i;
    i.number = 5;
    i.title = "t";
    i.synced_at = now_utc();
    CHECK(s.upsert_issue("o:n", i));
    i.synced_at += std::chrono::seconds(5);
    CHECK_FALSE(s.upsert_issue("o:n", i));
    i.title = "t2";
    CHECK(s.upsert_issue("o:n", i));
    CHECK(s.get_issue("o:n", 5)->title == "t2");
  }

  TEST_CASE("issues list newest first") {
    Store s(":memory:");
    for (int n = 1; n <= 3; ++n) {
      IssueRecord i;
      i.number = n;
      i.created_at = *parse_timestamp("2025-01-01") + std::chrono::hours(n);
      s.upsert_issue("o:n", i);
    }
    const auto all = s.list_issues("o:n");
    REQUIRE(all.size() == 3);
    CHECK(all[0].number == 3);
  }

  TEST_CASE("data survives a reopen") {
    const auto path = temp_db("reopen");
    {
      Store s(path.string());
      RepositoryRef r;
      r.owner = "o";
      r.name = "n";
      r.stars = 9;
      s.put_repo(r);
      s.insert_persona(r.id(), pftest::sample_persona());
      s.put_artifact(r.id(), "corpus", {{"x", 1}});
    }
    {
      Store s(path.string());
      CHECK(s.get_repo("o:n")->stars == 9);
      CHECK(s.list_personas("o:n").size() == 1);
      CHECK((*s.get_artifact("o:n", "corpus"))["x"] == 1);
      CHECK(s.insert_persona("o:n", pftest::sample_persona()).id == "p2");
    }
    std::filesystem::remove(path);
  }

  TEST_CASE("unreadable path is an io error") {
    try {
      Store s("/nonexistent-dir/x/y.db");
      FAIL("expected Io");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kIo);
    }
  }
}
