#pragma once

#include <map>
#include <vector>

#include "personaflow/model.hpp"

namespace personaflow {

inline constexpr std::string_view kNoLabelBucket = "(none)";

/// Dashboard aggregates over one repository snapshot. Mappings are keyed by
/// issue number; archived personas and hidden associations count for nothing.
AnalyticsSummary compute_summary(const RepositoryRef& repo, const std::vector<Persona>& personas,
                                 const std::vector<IssueRecord>& issues,
                                 const std::map<std::int64_t, IssuePersonaMapping>& mappings);

}  // namespace personaflow
