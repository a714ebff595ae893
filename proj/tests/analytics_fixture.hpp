#pragma once

// A store holding 10 issues and 5 personas where every issue is mapped.

#include <set>

#include "personaflow/analytics.hpp"
#include "personaflow/mapping_engine.hpp"
#include "personaflow/store.hpp"
#include "support.hpp"

namespace pftest {

struct AnalyticsFixture {
  personaflow::Store store{":memory:"};
  personaflow::RepositoryRef repo;
  std::vector<std::string> persona_ids;

  AnalyticsFixture() {
    using namespace personaflow;
    repo.owner = "octo-org";
    repo.name = "widget";
    repo.stars = 42;
    store.put_repo(repo);
    for (int i = 0; i < 5; ++i) {
      auto p = store.insert_persona(repo.id(), sample_persona("Persona " + std::to_string(i), 30 + i));
      persona_ids.push_back(p.id);
    }
    for (int n = 1; n <= 10; ++n) {
      IssueRecord issue;
      issue.number = n;
      issue.title = "Issue " + std::to_string(n);
      issue.labels = n % 2 ? std::vector<std::string>{"bug"} : std::vector<std::string>{};
      issue.created_at = *parse_timestamp("2025-01-01") + std::chrono::hours(n);
      issue.updated_at = issue.created_at;
      store.upsert_issue(repo.id(), issue);
      IssuePersonaMapping m;
      m.issue_number = n;
      Association a;
      a.persona_id = persona_ids[static_cast<std::size_t>(n % 5)];
      a.relevance_score = 0.85;
      a.rationale = "seeded";
      m.associations.push_back(a);
      m.primary_persona_id = a.persona_id;
      m.confidence = a.relevance_score;
      store.put_mapping(repo.id(), m);
    }
  }

  personaflow::AnalyticsSummary summary() const {
    const auto snap = store.snapshot(repo.id());
    return personaflow::compute_summary(snap.repo, snap.personas, snap.issues, snap.mappings);
  }

  /// Removes every visible association of issues 1..count.
  void unmap_first(int count) {
    using namespace personaflow;
    const std::set<std::string> active(persona_ids.begin(), persona_ids.end());
    for (int n = 1; n <= count; ++n) {
      auto current = store.get_mapping(repo.id(), n);
      std::vector<std::string> remove;
      for (const auto& a : current->value.associations)
        if (is_visible(a, active)) remove.push_back(a.persona_id);
      const auto updated = override_associations(current->value, {}, remove, active, active);
      store.put_mapping(repo.id(), updated, current->version);
    }
  }
};

}  // namespace pftest
