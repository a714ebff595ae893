#pragma once

// Domain types shared by the pipeline, the store, the API and the CLI.
// Wire names follow the snake_case fields of the prompt output schemas.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace personaflow {

using Json = nlohmann::json;
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

Timestamp now_utc();
/// RFC 3339, UTC, millisecond precision: 2026-01-31T08:15:00.000Z
std::string format_timestamp(Timestamp t);
/// Accepts RFC 3339 with optional fraction and 'Z' or +hh:mm offset, or a bare date.
std::optional<Timestamp> parse_timestamp(std::string_view text);

struct RepositoryRef {
  std::string host = "github.com";
  std::string owner;
  std::string name;
  std::int64_t stars = 0;
  std::int64_t forks = 0;
  std::int64_t open_issue_count = 0;
  std::string default_branch = "main";

  std::string full_name() const { return owner + "/" + name; }
  /// Store/API key for the repository; ':' never appears in owner or name.
  std::string id() const { return owner + ":" + name; }
  bool operator==(const RepositoryRef&) const = default;
};

enum class ExperienceLevel { kBeginner, kIntermediate, kAdvanced, kExpert };
enum class Provenance { kAiGenerated, kManual, kMerged };
enum class AvatarKind { kGeneratedImage, kParameterizedUrl };

struct AvatarRef {
  AvatarKind kind = AvatarKind::kParameterizedUrl;
  std::string locator;
  std::map<std::string, std::string> seed_inputs;
  bool operator==(const AvatarRef&) const = default;
};

struct Persona {
  std::string id;
  std::string name;
  int age = 0;
  std::string occupation;
  std::string location;
  std::string quote;
  std::string tagline;
  std::string background;
  std::vector<std::string> personality_traits;
  std::vector<std::string> goals;
  std::vector<std::string> pain_points;
  std::vector<std::string> technical_skills;
  ExperienceLevel experience_level = ExperienceLevel::kIntermediate;
  double confidence_score = 0.0;
  Provenance provenance = Provenance::kAiGenerated;
  bool edited = false;
  bool archived = false;
  std::vector<std::string> source_persona_ids;
  std::vector<std::string> tags;
  AvatarRef avatar;
  Timestamp created_at{};
  Timestamp updated_at{};

  bool operator==(const Persona&) const = default;
};

enum class SourceKind { kReadme, kInternalLink, kExternalLink, kUserProvided };

struct ResourceDocument {
  SourceKind source_kind = SourceKind::kReadme;
  std::string locator;
  std::string expected_content;
  std::string user_relevance;
  int priority = 5;
  std::string content_text;
  Timestamp fetched_at{};
  bool operator==(const ResourceDocument&) const = default;
};

struct ResourceCorpus {
  RepositoryRef repo;
  std::vector<ResourceDocument> documents;
  std::int64_t total_chars = 0;
  bool truncated = false;
  std::vector<std::string> warnings;
  bool operator==(const ResourceCorpus&) const = default;
};

struct UserInsights {
  std::vector<std::string> user_types;
  std::vector<std::string> primary_use_cases;
  std::vector<std::string> user_needs;
  std::vector<std::string> pain_points;
  std::string community_insights;
  std::vector<std::string> persona_recommendations;
  bool operator==(const UserInsights&) const = default;
};

struct DomainAnalysis {
  struct Feature {
    std::string name;
    std::string description;
    bool operator==(const Feature&) const = default;
  };
  struct Characteristic {
    std::string trait;
    std::string context;
    bool operator==(const Characteristic&) const = default;
  };
  std::string domain_summary;
  std::vector<Feature> key_features;
  std::vector<Characteristic> user_characteristics;
  std::vector<std::string> additional_insights;
  bool operator==(const DomainAnalysis&) const = default;
};

struct LinkPlan {
  struct Link {
    SourceKind kind = SourceKind::kExternalLink;  // internal_link or external_link
    std::string locator;
    std::string expected_content;
    std::string user_relevance;
    int priority = 1;
    bool operator==(const Link&) const = default;
  };
  std::vector<Link> internal;
  std::vector<Link> external;
  std::string reasoning;
  bool operator==(const LinkPlan&) const = default;
};

enum class IssueState { kOpen, kClosed };

struct IssueRecord {
  std::int64_t number = 0;
  std::string title;
  std::string body;
  std::vector<std::string> labels;
  IssueState state = IssueState::kOpen;
  Timestamp created_at{};
  Timestamp updated_at{};
  Timestamp synced_at{};
  bool operator==(const IssueRecord&) const = default;
};

enum class AssociationOrigin { kAiSuggested, kManual };
enum class ImpactLevel { kHigh, kMedium, kLow };
enum class IssueType { kBug, kFeature, kEnhancement };
enum class TechnicalLevel { kBeginner, kIntermediate, kAdvanced };

struct Association {
  std::string persona_id;
  AssociationOrigin origin = AssociationOrigin::kAiSuggested;
  double relevance_score = 0.0;
  std::vector<std::string> matched_goals;
  std::vector<std::string> matched_pain_points;
  std::string use_case_fit;
  ImpactLevel impact_level = ImpactLevel::kMedium;
  std::string rationale;
  bool tombstoned = false;
  bool operator==(const Association&) const = default;
};

struct AnalysisNotes {
  IssueType issue_type = IssueType::kBug;
  TechnicalLevel technical_level = TechnicalLevel::kIntermediate;
  std::vector<std::string> urgency_indicators;
  bool operator==(const AnalysisNotes&) const = default;
};

struct IssuePersonaMapping {
  std::int64_t issue_number = 0;
  std::vector<Association> associations;
  std::optional<std::string> primary_persona_id;
  double confidence = 0.0;
  std::string reasoning;
  AnalysisNotes analysis_notes;
  bool operator==(const IssuePersonaMapping&) const = default;
};

enum class ConfidenceBand { kHigh, kMedium, kLow, kUnmatched };

/// high >= 0.8 > medium >= 0.6 > low >= 0.4 > unmatched. Throws kInvalidArgument outside [0,1].
ConfidenceBand band_of(double confidence);

struct AnalyticsSummary {
  std::int64_t total_issues = 0;
  std::int64_t mapped_issues = 0;
  std::int64_t unmapped_issues = 0;
  std::int64_t active_personas = 0;
  double coverage_rate = 0.0;
  std::int64_t repo_stars = 0;
  std::map<std::string, std::int64_t> label_distribution;
  std::map<std::string, std::int64_t> persona_coverage;
  bool operator==(const AnalyticsSummary&) const = default;
};

enum class SyncMode { kAllNew, kByIds, kByLabels, kByDateRange };

struct SyncRequest {
  SyncMode mode = SyncMode::kAllNew;
  std::vector<std::int64_t> ids;
  std::vector<std::string> labels;
  std::optional<Timestamp> since;
  std::optional<Timestamp> until;
  std::int64_t limit = 20;
  IssueState state = IssueState::kOpen;
  bool operator==(const SyncRequest&) const = default;
};

/// Throws kInvalidParams when mode-specific fields are missing or stray.
void validate_sync_request(const SyncRequest& request);

enum class JobKind { kGeneration, kMapping, kSync };
enum class JobStage {
  kQueued,
  kFetchReadme,
  kExternalDocs,
  kAnalyzeDomain,
  kGeneratePersonas,
  kSyncIssues,
  kMapIssues,
  kDone,
  kFailed,
};

bool is_terminal(JobStage stage);

struct JobSnapshot {
  std::string job_id;
  JobKind kind = JobKind::kGeneration;
  std::string repo_id;
  JobStage stage = JobStage::kQueued;
  int percent = 0;
  std::optional<std::string> error;
  std::optional<Timestamp> started_at;
  std::optional<Timestamp> finished_at;
  std::vector<std::string> warnings;
  bool operator==(const JobSnapshot&) const = default;
};

// Enum <-> wire string. Parsers return nullopt for unknown text.
std::string_view to_string(ExperienceLevel v);
std::string_view to_string(Provenance v);
std::string_view to_string(AvatarKind v);
std::string_view to_string(SourceKind v);
std::string_view to_string(IssueState v);
std::string_view to_string(AssociationOrigin v);
std::string_view to_string(ImpactLevel v);
std::string_view to_string(IssueType v);
std::string_view to_string(TechnicalLevel v);
std::string_view to_string(ConfidenceBand v);
std::string_view to_string(SyncMode v);
std::string_view to_string(JobKind v);
std::string_view to_string(JobStage v);

template <typename E>
constexpr int enum_size();
template <> constexpr int enum_size<ExperienceLevel>() { return 4; }
template <> constexpr int enum_size<Provenance>() { return 3; }
template <> constexpr int enum_size<AvatarKind>() { return 2; }
template <> constexpr int enum_size<SourceKind>() { return 4; }
template <> constexpr int enum_size<IssueState>() { return 2; }
template <> constexpr int enum_size<AssociationOrigin>() { return 2; }
template <> constexpr int enum_size<ImpactLevel>() { return 3; }
template <> constexpr int enum_size<IssueType>() { return 3; }
template <> constexpr int enum_size<TechnicalLevel>() { return 3; }
template <> constexpr int enum_size<ConfidenceBand>() { return 4; }
template <> constexpr int enum_size<SyncMode>() { return 4; }
template <> constexpr int enum_size<JobKind>() { return 3; }
template <> constexpr int enum_size<JobStage>() { return 9; }

template <typename E>
std::optional<E> parse_enum(std::string_view text) {
  for (int i = 0; i < enum_size<E>(); ++i) {
    const auto value = static_cast<E>(i);
    if (to_string(value) == text) return value;
  }
  return std::nullopt;
}

// Persona and mapping validation. Violations are data, not errors.
std::vector<std::string> validate_persona(const Persona& p);
/// Checks mapping invariants; `known_persona_ids` empty skips the reference check.
std::vector<std::string> validate_mapping(const IssuePersonaMapping& m,
                                          const std::vector<std::string>& known_persona_ids = {});

/// AI-output rules apply to generated and merged personas that nobody has edited.
inline bool uses_ai_rules(const Persona& p) {
  return p.provenance != Provenance::kManual && !p.edited;
}

/// Replaces invalid UTF-8 sequences with U+FFFD so any fetched text can be serialized.
std::string sanitize_utf8(std::string_view text);

// nlohmann adapters (defined in model_json.cpp).
void to_json(Json& j, const RepositoryRef& v);
void from_json(const Json& j, RepositoryRef& v);
void to_json(Json& j, const AvatarRef& v);
void from_json(const Json& j, AvatarRef& v);
void to_json(Json& j, const Persona& v);
void from_json(const Json& j, Persona& v);
void to_json(Json& j, const ResourceDocument& v);
void from_json(const Json& j, ResourceDocument& v);
void to_json(Json& j, const ResourceCorpus& v);
void from_json(const Json& j, ResourceCorpus& v);
void to_json(Json& j, const UserInsights& v);
void from_json(const Json& j, UserInsights& v);
void to_json(Json& j, const DomainAnalysis& v);
void from_json(const Json& j, DomainAnalysis& v);
void to_json(Json& j, const LinkPlan& v);
void from_json(const Json& j, LinkPlan& v);
void to_json(Json& j, const IssueRecord& v);
void from_json(const Json& j, IssueRecord& v);
void to_json(Json& j, const Association& v);
void from_json(const Json& j, Association& v);
void to_json(Json& j, const AnalysisNotes& v);
void from_json(const Json& j, AnalysisNotes& v);
void to_json(Json& j, const IssuePersonaMapping& v);
void from_json(const Json& j, IssuePersonaMapping& v);
void to_json(Json& j, const AnalyticsSummary& v);
void from_json(const Json& j, AnalyticsSummary& v);
void to_json(Json& j, const SyncRequest& v);
void from_json(const Json& j, SyncRequest& v);
void to_json(Json& j, const JobSnapshot& v);
void from_json(const Json& j, JobSnapshot& v);

/// Serializes with invalid UTF-8 replaced instead of throwing.
std::string dump_json(const Json& j, int indent = -1);

}  // namespace personaflow
