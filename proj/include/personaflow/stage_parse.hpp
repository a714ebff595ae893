#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "personaflow/model.hpp"
#include "personaflow/prompts.hpp"

namespace personaflow {

/// Finds the first balanced {...} in `raw` that parses as JSON, skipping
/// surrounding prose and code fences.
std::optional<Json> extract_json_object(std::string_view raw);

LinkPlan parse_link_plan(std::string_view raw);
UserInsights parse_user_insights(std::string_view raw);
DomainAnalysis parse_domain_analysis(std::string_view raw);
/// Personas with provenance ai_generated, validated with the generated-persona rules.
std::vector<Persona> parse_personas(std::string_view raw);
/// The single unified persona of a merge response (provenance left for the caller).
Persona parse_merged_persona(std::string_view raw);
/// `persona_ids` maps the 1-based ids shown in the prompt back to stored ids.
IssuePersonaMapping parse_issue_mapping(std::string_view raw, const std::vector<std::string>& persona_ids,
                                        std::int64_t issue_number);

struct ParseOptions {
  std::vector<std::string> persona_ids;  // issue_mapping only
  std::int64_t issue_number = 0;         // issue_mapping only
};

using StageOutput =
    std::variant<LinkPlan, UserInsights, DomainAnalysis, std::vector<Persona>, Persona, IssuePersonaMapping>;

/// Never throws anything but Error(kParseError).
StageOutput parse_stage_output(Stage stage, std::string_view raw, const ParseOptions& options = {});

}  // namespace personaflow
