#include "personaflow/mapping_engine.hpp"

#include <algorithm>

#include "personaflow/errors.hpp"
#include "personaflow/prompts.hpp"
#include "personaflow/rubric.hpp"
#include "personaflow/stage_parse.hpp"

namespace personaflow {

namespace {

Association* find(IssuePersonaMapping& m, const std::string& persona_id) {
  for (auto& a : m.associations) {
    if (a.persona_id == persona_id) return &a;
  }
  return nullptr;
}

}  // namespace

bool is_visible(const Association& a, const std::set<std::string>& active_persona_ids) {
  return !a.tombstoned && active_persona_ids.count(a.persona_id) &&
         band_of(std::clamp(a.relevance_score, 0.0, 1.0)) != ConfidenceBand::kUnmatched;
}

bool has_visible(const IssuePersonaMapping& m, const std::set<std::string>& active_persona_ids) {
  return std::any_of(m.associations.begin(), m.associations.end(),
                     [&](const Association& a) { return is_visible(a, active_persona_ids); });
}

void refresh_primary(IssuePersonaMapping& m, const std::set<std::string>& active) {
  if (m.primary_persona_id) {
    const auto* current = find(m, *m.primary_persona_id);
    if (current && is_visible(*current, active)) return;
  }
  const Association* best = nullptr;
  for (const auto& a : m.associations) {
    if (is_visible(a, active) && (!best || a.relevance_score > best->relevance_score)) best = &a;
  }
  if (best) {
    m.primary_persona_id = best->persona_id;
    m.confidence = best->relevance_score;
  } else {
    m.primary_persona_id.reset();
    m.confidence = 0.0;
  }
}

IssuePersonaMapping override_associations(IssuePersonaMapping m, const std::vector<std::string>& add,
                                          const std::vector<std::string>& remove,
                                          const std::set<std::string>& known, const std::set<std::string>& active) {
  const std::set<std::string> add_set(add.begin(), add.end());
  const std::set<std::string> remove_set(remove.begin(), remove.end());
  for (const auto& id : add_set) {
    if (!known.count(id) || !active.count(id)) throw Error(ErrorCode::kUnknownPersona, "unknown persona " + id);
  }
  for (const auto& id : remove_set) {
    if (!known.count(id)) throw Error(ErrorCode::kUnknownPersona, "unknown persona " + id);
  }
  for (const auto& id : add_set) {
    if (remove_set.count(id)) throw Error(ErrorCode::kConflictingRequest, id + " is both added and removed");
  }
  for (const auto& id : remove_set) {
    const auto* a = find(m, id);
    if (!a || !is_visible(*a, active)) {
      throw Error(ErrorCode::kConflictingRequest, id + " is not associated with issue " + std::to_string(m.issue_number));
    }
  }
  for (const auto& id : add_set) {
    const auto* a = find(m, id);
    if (a && is_visible(*a, active)) {
      throw Error(ErrorCode::kConflictingRequest, id + " is already associated with issue " + std::to_string(m.issue_number));
    }
  }

  for (const auto& id : remove_set) find(m, id)->tombstoned = true;
  for (const auto& id : add) {
    if (!add_set.count(id)) continue;
    Association manual;
    manual.persona_id = id;
    manual.origin = AssociationOrigin::kManual;
    manual.relevance_score = 1.0;
    manual.impact_level = ImpactLevel::kMedium;
    manual.rationale = std::string(kManualRationale);
    if (auto* existing = find(m, id)) {
      *existing = manual;
    } else {
      m.associations.push_back(manual);
    }
  }
  refresh_primary(m, active);
  return m;
}

IssuePersonaMapping merge_remap(const IssuePersonaMapping& existing, IssuePersonaMapping fresh,
                                const std::set<std::string>& active) {
  IssuePersonaMapping out = fresh;
  out.associations.clear();
  // Human decisions first: manual associations and removals keep their place.
  for (const auto& a : existing.associations) {
    if (a.origin == AssociationOrigin::kManual || a.tombstoned) out.associations.push_back(a);
  }
  for (auto& a : fresh.associations) {
    if (!find(out, a.persona_id)) out.associations.push_back(std::move(a));
  }
  refresh_primary(out, active);
  return out;
}

bool tombstone_persona(IssuePersonaMapping& m, const std::string& persona_id, const std::set<std::string>& active) {
  auto* a = find(m, persona_id);
  if (!a || a->tombstoned) return false;
  a->tombstoned = true;
  refresh_primary(m, active);
  return true;
}

IssuePersonaMapping MappingEngine::map_issue(const IssueRecord& issue, const std::vector<Persona>& personas,
                                             const std::string& job_id) {
  if (personas.empty()) throw Error(ErrorCode::kInvalidParams, "no active personas to map against");
  if (offline_) return offline_map_issue(issue, personas);
  std::vector<std::string> ids;
  for (const auto& p : personas) ids.push_back(p.id);
  const auto prompt = render_prompt(Stage::kIssueMapping, {{"issue_text", format_issue(issue)},
                                                           {"personas_json", format_personas_for_mapping(personas)}});
  return llm_->complete_parsed(prompt, job_id, [&](const std::string& raw) {
    return parse_issue_mapping(raw, ids, issue.number);
  });
}

}  // namespace personaflow
