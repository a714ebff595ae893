#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "personaflow/model.hpp"
#include "personaflow/providers.hpp"

namespace personaflow {

/// Shown in views and counted by analytics: not tombstoned, persona active,
/// relevance in a band above unmatched.
bool is_visible(const Association& a, const std::set<std::string>& active_persona_ids);
/// True when the mapping has at least one visible association.
bool has_visible(const IssuePersonaMapping& m, const std::set<std::string>& active_persona_ids);

inline constexpr std::string_view kManualRationale = "manually associated";

/// Applies a manual add/remove request to a mapping (which may be empty).
///   add: persona must be active and not already visible; it becomes a
///        manual association with relevance 1.0.
///   remove: persona must be visible; its association is tombstoned.
/// Throws kUnknownPersona or kConflictingRequest; the input is unchanged on error.
IssuePersonaMapping override_associations(IssuePersonaMapping mapping, const std::vector<std::string>& add,
                                          const std::vector<std::string>& remove,
                                          const std::set<std::string>& known_persona_ids,
                                          const std::set<std::string>& active_persona_ids);

/// Folds a fresh automatic mapping into an existing one. Manual associations
/// and removed (tombstoned) ones win over the fresh suggestions; earlier AI
/// suggestions are replaced.
IssuePersonaMapping merge_remap(const IssuePersonaMapping& existing, IssuePersonaMapping fresh,
                                const std::set<std::string>& active_persona_ids);

/// Tombstones every association of `persona_id`. Returns true if anything changed.
bool tombstone_persona(IssuePersonaMapping& m, const std::string& persona_id,
                       const std::set<std::string>& active_persona_ids);

/// Points primary/confidence at the strongest visible association when the
/// current primary is no longer visible.
void refresh_primary(IssuePersonaMapping& m, const std::set<std::string>& active_persona_ids);

class MappingEngine {
 public:
  /// Without a text provider every mapping comes from the offline rubric.
  explicit MappingEngine(std::shared_ptr<LlmClient> llm, bool offline = false)
      : llm_(std::move(llm)), offline_(offline || !llm_ || !llm_->has_text_provider()) {}

  /// One completion (or the offline scorer). Throws kInvalidParams with no personas.
  IssuePersonaMapping map_issue(const IssueRecord& issue, const std::vector<Persona>& personas,
                                const std::string& job_id);

  bool offline() const { return offline_; }

 private:
  std::shared_ptr<LlmClient> llm_;
  bool offline_;
};

}  // namespace personaflow
