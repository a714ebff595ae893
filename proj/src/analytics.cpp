#include "personaflow/analytics.hpp"

#include <set>

#include "personaflow/mapping_engine.hpp"

namespace personaflow {

AnalyticsSummary compute_summary(const RepositoryRef& repo, const std::vector<Persona>& personas,
                                 const std::vector<IssueRecord>& issues,
                                 const std::map<std::int64_t, IssuePersonaMapping>& mappings) {
  AnalyticsSummary s;
  s.repo_stars = repo.stars;
  std::set<std::string> active;
  for (const auto& p : personas) {
    if (p.archived) continue;
    active.insert(p.id);
    if (!issues.empty()) s.persona_coverage[p.id] = 0;
  }
  s.active_personas = static_cast<std::int64_t>(active.size());
  s.total_issues = static_cast<std::int64_t>(issues.size());

  for (const auto& issue : issues) {
    if (issue.labels.empty()) {
      ++s.label_distribution[std::string(kNoLabelBucket)];
    } else {
      for (const auto& label : std::set<std::string>(issue.labels.begin(), issue.labels.end())) {
        ++s.label_distribution[label];
      }
    }
    const auto it = mappings.find(issue.number);
    if (it == mappings.end() || !has_visible(it->second, active)) continue;
    ++s.mapped_issues;
    std::set<std::string> counted;
    for (const auto& a : it->second.associations) {
      if (is_visible(a, active) && counted.insert(a.persona_id).second) ++s.persona_coverage[a.persona_id];
    }
  }
  s.unmapped_issues = s.total_issues - s.mapped_issues;
  s.coverage_rate = s.total_issues > 0 ? static_cast<double>(s.mapped_issues) / static_cast<double>(s.total_issues) : 0.0;
  return s;
}

}  // namespace personaflow
