#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "personaflow/model.hpp"

namespace personaflow {

enum class Stage {
  kLinkDiscovery,
  kUserInsights,
  kDomainAnalysis,
  kPersonaGeneration,
  kHeadshot,
  kMerge,
  kIssueMapping,
};

std::string_view to_string(Stage stage);
template <> constexpr int enum_size<Stage>() { return 7; }

/// Placeholder values keyed by name (see required_placeholders).
using PromptContext = std::map<std::string, std::string>;

struct PromptBundle {
  Stage stage = Stage::kLinkDiscovery;
  std::string system_text;
  std::string user_text;
  std::string expected_schema;
  /// "<stage>:<hash of placeholder values>"; the mock provider looks fixtures up by it.
  std::string fixture_key;
};

/// Placeholder names the stage template needs. Optional extras:
///   persona_generation: existing_personas   merge: guidance   headshot: template_index
std::vector<std::string> required_placeholders(Stage stage);

/// Substitutes placeholders into the stage template; nothing else is altered.
/// Throws kMissingPlaceholder when a required key is absent (empty values are legal).
PromptBundle render_prompt(Stage stage, const PromptContext& context);

/// The re-ask sent once after an unparseable completion.
PromptBundle with_repair_instruction(const PromptBundle& bundle);
inline constexpr std::string_view kRepairInstruction = "Return only valid JSON matching the requested format.";

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);
/// Stable across runs and platforms: FNV-1a over the sorted key/value pairs.
std::string context_hash(const PromptContext& context);

/// Number of headshot templates; selection is fnv1a64(occupation) % this.
inline constexpr int kHeadshotTemplateCount = 3;
int headshot_template_index(std::string_view occupation);

// Placeholder value formatting shared by the pipeline stages.
std::string format_corpus(const ResourceCorpus& corpus);
std::string format_repository_content(const ResourceCorpus& corpus, const UserInsights& insights);
std::string format_issue(const IssueRecord& issue);
/// Personas as a JSON array with 1-based integer ids, the ids the mapping output refers to.
std::string format_personas_for_mapping(const std::vector<Persona>& personas);
std::string format_personas_for_merge(const std::vector<Persona>& personas);
std::string format_existing_personas(const std::vector<Persona>& personas);

}  // namespace personaflow
