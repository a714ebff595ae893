#pragma once

#include <string_view>

namespace personaflow::templates {

extern const std::string_view kLinkDiscoverySystem;
extern const std::string_view kLinkDiscoveryUser;
extern const std::string_view kUserInsightsSystem;
extern const std::string_view kUserInsightsUser;
extern const std::string_view kDomainAnalysisSystem;
extern const std::string_view kDomainAnalysisUser;
extern const std::string_view kPersonaGenerationSystem;
extern const std::string_view kPersonaGenerationUser;
extern const std::string_view kMergeSystem;
extern const std::string_view kMergeUser;
extern const std::string_view kIssueMappingSystem;
extern const std::string_view kIssueMappingUser;
extern const std::string_view kHeadshot[3];

}  // namespace personaflow::templates
