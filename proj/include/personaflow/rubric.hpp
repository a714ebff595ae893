#pragma once

#include <array>
#include <bitset>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "personaflow/model.hpp"

namespace personaflow {

/// Evidence components of the mapping rubric, in scoring-table order.
enum class Evidence {
  kGoalMentionsFeature,     // +20
  kPainPointDescribes,      // +20
  kPrimaryWorkflow,         // +15
  kBlocksGoal,              // +15
  kTechLevelMatch,          // +10
  kContextExplainsUrgency,  // +10
  kToneAlignment,           // +10
  kEasyWorkaround,          // -20
  kTechnicalMismatch,       // -30
  kRarelyUsesFeature,       // -40
};

inline constexpr int kEvidenceCount = 10;
using EvidenceFlags = std::bitset<kEvidenceCount>;

int evidence_weight(Evidence e);
std::string_view to_string(Evidence e);

struct RubricScore {
  int points = 0;
  /// Triggered components only, by name.
  std::map<std::string, int> breakdown;
};

/// clamp(sum of triggered weights, 0, 100).
RubricScore rubric_score(EvidenceFlags flags);
/// points / 100. Throws kInvalidArgument outside [0,100].
double rubric_to_confidence(int points);

/// Below this the offline scorer reports no match.
inline constexpr int kOfflineMatchPoints = 40;

/// Text-overlap heuristics used when no provider is configured.
EvidenceFlags derive_evidence(const IssueRecord& issue, const Persona& persona);
RubricScore rubric_score(const IssueRecord& issue, const Persona& persona);

/// Full offline mapping: every persona scored, those at or above 40 points matched.
IssuePersonaMapping offline_map_issue(const IssueRecord& issue, const std::vector<Persona>& personas);

/// Lowercased content words (stopwords dropped, plural 's' trimmed).
std::vector<std::string> content_tokens(std::string_view text);

}  // namespace personaflow
