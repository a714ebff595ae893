#pragma once

// Replaying a sync (with mapping) against unchanged hosting data must leave
// the store exactly as the first run left it.

#include <random>

#include "support.hpp"

namespace pftest {

struct SyncReplay {
  int requests = 0;
  int violations = 0;
  std::string first_violation;
};

inline personaflow::SyncRequest random_sync_request(std::mt19937& rng) {
  using namespace personaflow;
  SyncRequest r;
  r.mode = static_cast<SyncMode>(rng() % 4);
  r.limit = 1 + static_cast<std::int64_t>(rng() % 40);
  r.state = rng() % 4 == 0 ? IssueState::kClosed : IssueState::kOpen;
  const auto base = *parse_timestamp("2024-07-01");
  switch (r.mode) {
    case SyncMode::kAllNew: break;
    case SyncMode::kByIds:
      for (int i = 0, n = 1 + static_cast<int>(rng() % 5); i < n; ++i) r.ids.push_back(55 + static_cast<int>(rng() % 50));
      break;
    case SyncMode::kByLabels: r.labels = {rng() % 2 ? "bug" : "ui"}; break;
    case SyncMode::kByDateRange:
      r.since = base + std::chrono::days(rng() % 200);
      if (rng() % 2) r.until = *r.since + std::chrono::days(rng() % 200);
      break;
  }
  return r;
}

inline bool same_state(const personaflow::RepoSnapshot& a, const personaflow::RepoSnapshot& b) {
  return a.repo == b.repo && a.issues == b.issues && a.mappings == b.mappings && a.personas == b.personas;
}

inline SyncReplay run_sync_replay(int requests, unsigned seed) {
  using namespace personaflow;
  SyncReplay out;
  std::mt19937 rng(seed);
  for (int i = 0; i < requests; ++i) {
    auto config = fixture_config(HostKind::kFixture, false);
    Engine engine(config);
    // Every request starts from a store that already holds some history.
    auto connector_ref = RepositoryRef{};
    connector_ref.owner = "octo-org";
    connector_ref.name = "widget";
    engine.store().put_repo(connector_ref);
    const std::string repo_id = connector_ref.id();
    engine.create_persona(repo_id, {{"name", "Quinn Ray"}, {"age", 35}, {"occupation", "Widget Tracker"},
                                    {"goals", {"Track widgets with ui tools"}}, {"pain_points", {"bug reports lost"}}});
    if (rng() % 2) {
      SyncRequest warm;
      warm.limit = 5 + static_cast<std::int64_t>(rng() % 10);
      engine.sync_issues(repo_id, warm);
    }
    const auto request = random_sync_request(rng);
    ++out.requests;
    const auto first = run_job(engine, engine.submit_sync(repo_id, request).job_id);
    const auto after_first = engine.snapshot(repo_id);
    const auto second = run_job(engine, engine.submit_sync(repo_id, request).job_id);
    const auto changed_again = engine.sync_issues(repo_id, request);
    const auto after_second = engine.snapshot(repo_id);
    const bool ok = first.stage == second.stage && changed_again == 0 && same_state(after_first, after_second);
    if (!ok) {
      ++out.violations;
      if (out.first_violation.empty()) out.first_violation = Json(request).dump();
    }
  }
  return out;
}

}  // namespace pftest
