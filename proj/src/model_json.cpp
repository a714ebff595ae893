#include <string>

#include "personaflow/errors.hpp"
#include "personaflow/model.hpp"

namespace personaflow {

namespace {

template <typename E>
E enum_field(const Json& j, const char* key) {
  const auto text = j.at(key).get<std::string>();
  if (auto v = parse_enum<E>(text)) return *v;
  throw Error(ErrorCode::kInvalidArgument, std::string(key) + ": unknown value '" + text + "'");
}

template <typename E>
E enum_field_or(const Json& j, const char* key, E fallback) {
  return j.contains(key) && !j.at(key).is_null() ? enum_field<E>(j, key) : fallback;
}

Timestamp time_field_or(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return Timestamp{};
  const auto text = j.at(key).get<std::string>();
  if (auto t = parse_timestamp(text)) return *t;
  throw Error(ErrorCode::kInvalidArgument, std::string(key) + ": not an RFC 3339 timestamp");
}

std::optional<Timestamp> opt_time_field(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return time_field_or(j, key);
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

Json opt_time(const std::optional<Timestamp>& t) { return t ? Json(format_timestamp(*t)) : Json(nullptr); }

}  // namespace

void to_json(Json& j, const RepositoryRef& v) {
  j = Json{{"host", v.host},   {"owner", v.owner},
           {"name", v.name},   {"stars", v.stars},
           {"forks", v.forks}, {"open_issue_count", v.open_issue_count},
           {"default_branch", v.default_branch}, {"id", v.id()}};
}
void from_json(const Json& j, RepositoryRef& v) {
  v.host = get_or<std::string>(j, "host", "github.com");
  v.owner = j.at("owner").get<std::string>();
  v.name = j.at("name").get<std::string>();
  v.stars = get_or<std::int64_t>(j, "stars", 0);
  v.forks = get_or<std::int64_t>(j, "forks", 0);
  v.open_issue_count = get_or<std::int64_t>(j, "open_issue_count", 0);
  v.default_branch = get_or<std::string>(j, "default_branch", "main");
}

void to_json(Json& j, const AvatarRef& v) {
  j = Json{{"kind", to_string(v.kind)}, {"locator", v.locator}, {"seed_inputs", v.seed_inputs}};
}
void from_json(const Json& j, AvatarRef& v) {
  v.kind = enum_field_or(j, "kind", AvatarKind::kParameterizedUrl);
  v.locator = get_or<std::string>(j, "locator", "");
  v.seed_inputs = get_or<std::map<std::string, std::string>>(j, "seed_inputs", {});
}

void to_json(Json& j, const Persona& v) {
  j = Json{{"id", v.id},
           {"name", v.name},
           {"age", v.age},
           {"occupation", v.occupation},
           {"location", v.location},
           {"quote", v.quote},
           {"tagline", v.tagline},
           {"background", v.background},
           {"personality_traits", v.personality_traits},
           {"goals", v.goals},
           {"pain_points", v.pain_points},
           {"technical_skills", v.technical_skills},
           {"experience_level", to_string(v.experience_level)},
           {"confidence_score", v.confidence_score},
           {"provenance", to_string(v.provenance)},
           {"edited", v.edited},
           {"archived", v.archived},
           {"source_persona_ids", v.source_persona_ids},
           {"tags", v.tags},
           {"avatar", v.avatar},
           {"created_at", format_timestamp(v.created_at)},
           {"updated_at", format_timestamp(v.updated_at)}};
}
void from_json(const Json& j, Persona& v) {
  v.id = get_or<std::string>(j, "id", "");
  v.name = j.at("name").get<std::string>();
  v.age = j.at("age").get<int>();
  v.occupation = get_or<std::string>(j, "occupation", "");
  v.location = get_or<std::string>(j, "location", "");
  v.quote = get_or<std::string>(j, "quote", "");
  v.tagline = get_or<std::string>(j, "tagline", "");
  v.background = get_or<std::string>(j, "background", "");
  v.personality_traits = get_or<std::vector<std::string>>(j, "personality_traits", {});
  v.goals = get_or<std::vector<std::string>>(j, "goals", {});
  v.pain_points = get_or<std::vector<std::string>>(j, "pain_points", {});
  v.technical_skills = get_or<std::vector<std::string>>(j, "technical_skills", {});
  v.experience_level = enum_field_or(j, "experience_level", ExperienceLevel::kIntermediate);
  v.confidence_score = get_or<double>(j, "confidence_score", 0.0);
  v.provenance = enum_field_or(j, "provenance", Provenance::kAiGenerated);
  v.edited = get_or<bool>(j, "edited", false);
  v.archived = get_or<bool>(j, "archived", false);
  v.source_persona_ids = get_or<std::vector<std::string>>(j, "source_persona_ids", {});
  v.tags = get_or<std::vector<std::string>>(j, "tags", {});
  v.avatar = get_or<AvatarRef>(j, "avatar", {});
  v.created_at = time_field_or(j, "created_at");
  v.updated_at = time_field_or(j, "updated_at");
}

void to_json(Json& j, const ResourceDocument& v) {
  j = Json{{"source_kind", to_string(v.source_kind)},
           {"locator", v.locator},
           {"expected_content", v.expected_content},
           {"user_relevance", v.user_relevance},
           {"priority", v.priority},
           {"content_text", v.content_text},
           {"fetched_at", format_timestamp(v.fetched_at)}};
}
void from_json(const Json& j, ResourceDocument& v) {
  v.source_kind = enum_field<SourceKind>(j, "source_kind");
  v.locator = j.at("locator").get<std::string>();
  v.expected_content = get_or<std::string>(j, "expected_content", "");
  v.user_relevance = get_or<std::string>(j, "user_relevance", "");
  v.priority = get_or<int>(j, "priority", 5);
  v.content_text = get_or<std::string>(j, "content_text", "");
  v.fetched_at = time_field_or(j, "fetched_at");
}

void to_json(Json& j, const ResourceCorpus& v) {
  j = Json{{"repo", v.repo},
           {"documents", v.documents},
           {"total_chars", v.total_chars},
           {"truncated", v.truncated},
           {"warnings", v.warnings}};
}
void from_json(const Json& j, ResourceCorpus& v) {
  v.repo = j.at("repo").get<RepositoryRef>();
  v.documents = j.at("documents").get<std::vector<ResourceDocument>>();
  v.total_chars = get_or<std::int64_t>(j, "total_chars", 0);
  v.truncated = get_or<bool>(j, "truncated", false);
  v.warnings = get_or<std::vector<std::string>>(j, "warnings", {});
}

void to_json(Json& j, const UserInsights& v) {
  j = Json{{"user_types", v.user_types},
           {"primary_use_cases", v.primary_use_cases},
           {"user_needs", v.user_needs},
           {"pain_points", v.pain_points},
           {"community_insights", v.community_insights},
           {"persona_recommendations", v.persona_recommendations}};
}
void from_json(const Json& j, UserInsights& v) {
  v.user_types = j.at("user_types").get<std::vector<std::string>>();
  v.primary_use_cases = j.at("primary_use_cases").get<std::vector<std::string>>();
  v.user_needs = j.at("user_needs").get<std::vector<std::string>>();
  v.pain_points = j.at("pain_points").get<std::vector<std::string>>();
  v.community_insights = j.at("community_insights").get<std::string>();
  v.persona_recommendations = j.at("persona_recommendations").get<std::vector<std::string>>();
}

void to_json(Json& j, const DomainAnalysis& v) {
  Json features = Json::array(), traits = Json::array();
  for (const auto& f : v.key_features) features.push_back({{"name", f.name}, {"description", f.description}});
  for (const auto& c : v.user_characteristics) traits.push_back({{"trait", c.trait}, {"context", c.context}});
  j = Json{{"domain_summary", v.domain_summary},
           {"key_features", features},
           {"user_characteristics", traits},
           {"additional_insights", v.additional_insights}};
}
void from_json(const Json& j, DomainAnalysis& v) {
  v.domain_summary = j.at("domain_summary").get<std::string>();
  v.key_features.clear();
  for (const auto& f : j.at("key_features")) {
    v.key_features.push_back({f.at("name").get<std::string>(), get_or<std::string>(f, "description", "")});
  }
  v.user_characteristics.clear();
  for (const auto& c : get_or<Json>(j, "user_characteristics", Json::array())) {
    v.user_characteristics.push_back({c.at("trait").get<std::string>(), get_or<std::string>(c, "context", "")});
  }
  v.additional_insights = get_or<std::vector<std::string>>(j, "additional_insights", {});
}

void to_json(Json& j, const LinkPlan& v) {
  Json internal = Json::array(), external = Json::array();
  for (const auto& l : v.internal) {
    internal.push_back({{"path", l.locator},
                        {"expected_content", l.expected_content},
                        {"user_relevance", l.user_relevance},
                        {"priority", l.priority}});
  }
  for (const auto& l : v.external) {
    external.push_back({{"url", l.locator},
                        {"expected_content", l.expected_content},
                        {"user_relevance", l.user_relevance},
                        {"priority", l.priority}});
  }
  j = Json{{"internal_links", internal}, {"external_links", external}, {"reasoning", v.reasoning}};
}
void from_json(const Json& j, LinkPlan& v) {
  v = LinkPlan{};
  for (const auto& l : get_or<Json>(j, "internal_links", Json::array())) {
    v.internal.push_back({SourceKind::kInternalLink, l.at("path").get<std::string>(),
                          get_or<std::string>(l, "expected_content", ""),
                          get_or<std::string>(l, "user_relevance", ""), get_or<int>(l, "priority", 1)});
  }
  for (const auto& l : get_or<Json>(j, "external_links", Json::array())) {
    v.external.push_back({SourceKind::kExternalLink, l.at("url").get<std::string>(),
                          get_or<std::string>(l, "expected_content", ""),
                          get_or<std::string>(l, "user_relevance", ""), get_or<int>(l, "priority", 1)});
  }
  v.reasoning = get_or<std::string>(j, "reasoning", "");
}

void to_json(Json& j, const IssueRecord& v) {
  j = Json{{"number", v.number},
           {"title", v.title},
           {"body", v.body},
           {"labels", v.labels},
           {"state", to_string(v.state)},
           {"created_at", format_timestamp(v.created_at)},
           {"updated_at", format_timestamp(v.updated_at)},
           {"synced_at", format_timestamp(v.synced_at)}};
}
void from_json(const Json& j, IssueRecord& v) {
  v.number = j.at("number").get<std::int64_t>();
  v.title = get_or<std::string>(j, "title", "");
  v.body = get_or<std::string>(j, "body", "");
  v.labels = get_or<std::vector<std::string>>(j, "labels", {});
  v.state = enum_field_or(j, "state", IssueState::kOpen);
  v.created_at = time_field_or(j, "created_at");
  v.updated_at = time_field_or(j, "updated_at");
  v.synced_at = time_field_or(j, "synced_at");
}

void to_json(Json& j, const Association& v) {
  j = Json{{"persona_id", v.persona_id},
           {"origin", to_string(v.origin)},
           {"relevance_score", v.relevance_score},
           {"matched_goals", v.matched_goals},
           {"matched_pain_points", v.matched_pain_points},
           {"use_case_fit", v.use_case_fit},
           {"impact_level", to_string(v.impact_level)},
           {"rationale", v.rationale},
           {"tombstoned", v.tombstoned}};
}
void from_json(const Json& j, Association& v) {
  v.persona_id = j.at("persona_id").get<std::string>();
  v.origin = enum_field_or(j, "origin", AssociationOrigin::kAiSuggested);
  v.relevance_score = get_or<double>(j, "relevance_score", 0.0);
  v.matched_goals = get_or<std::vector<std::string>>(j, "matched_goals", {});
  v.matched_pain_points = get_or<std::vector<std::string>>(j, "matched_pain_points", {});
  v.use_case_fit = get_or<std::string>(j, "use_case_fit", "");
  v.impact_level = enum_field_or(j, "impact_level", ImpactLevel::kMedium);
  v.rationale = get_or<std::string>(j, "rationale", "");
  v.tombstoned = get_or<bool>(j, "tombstoned", false);
}

void to_json(Json& j, const AnalysisNotes& v) {
  j = Json{{"issue_type", to_string(v.issue_type)},
           {"technical_level", to_string(v.technical_level)},
           {"urgency_indicators", v.urgency_indicators}};
}
void from_json(const Json& j, AnalysisNotes& v) {
  v.issue_type = enum_field_or(j, "issue_type", IssueType::kBug);
  v.technical_level = enum_field_or(j, "technical_level", TechnicalLevel::kIntermediate);
  v.urgency_indicators = get_or<std::vector<std::string>>(j, "urgency_indicators", {});
}

void to_json(Json& j, const IssuePersonaMapping& v) {
  j = Json{{"issue_number", v.issue_number},
           {"associations", v.associations},
           {"primary_persona_id", v.primary_persona_id ? Json(*v.primary_persona_id) : Json(nullptr)},
           {"confidence", v.confidence},
           {"reasoning", v.reasoning},
           {"analysis_notes", v.analysis_notes}};
}
void from_json(const Json& j, IssuePersonaMapping& v) {
  v.issue_number = j.at("issue_number").get<std::int64_t>();
  v.associations = get_or<std::vector<Association>>(j, "associations", {});
  v.primary_persona_id = j.contains("primary_persona_id") && !j.at("primary_persona_id").is_null()
                             ? std::optional{j.at("primary_persona_id").get<std::string>()}
                             : std::nullopt;
  v.confidence = get_or<double>(j, "confidence", 0.0);
  v.reasoning = get_or<std::string>(j, "reasoning", "");
  v.analysis_notes = get_or<AnalysisNotes>(j, "analysis_notes", {});
}

void to_json(Json& j, const AnalyticsSummary& v) {
  j = Json{{"total_issues", v.total_issues},
           {"mapped_issues", v.mapped_issues},
           {"unmapped_issues", v.unmapped_issues},
           {"active_personas", v.active_personas},
           {"coverage_rate", v.coverage_rate},
           {"repo_stars", v.repo_stars},
           {"label_distribution", v.label_distribution},
           {"persona_coverage", v.persona_coverage}};
}
void from_json(const Json& j, AnalyticsSummary& v) {
  v.total_issues = j.at("total_issues").get<std::int64_t>();
  v.mapped_issues = get_or<std::int64_t>(j, "mapped_issues", 0);
  v.unmapped_issues = get_or<std::int64_t>(j, "unmapped_issues", 0);
  v.active_personas = j.at("active_personas").get<std::int64_t>();
  v.coverage_rate = j.at("coverage_rate").get<double>();
  v.repo_stars = get_or<std::int64_t>(j, "repo_stars", 0);
  v.label_distribution = get_or<std::map<std::string, std::int64_t>>(j, "label_distribution", {});
  v.persona_coverage = get_or<std::map<std::string, std::int64_t>>(j, "persona_coverage", {});
}

void to_json(Json& j, const SyncRequest& v) {
  j = Json{{"mode", to_string(v.mode)},   {"ids", v.ids},
           {"labels", v.labels},          {"since", opt_time(v.since)},
           {"until", opt_time(v.until)},  {"limit", v.limit},
           {"state", to_string(v.state)}};
}
void from_json(const Json& j, SyncRequest& v) {
  v.mode = enum_field_or(j, "mode", SyncMode::kAllNew);
  v.ids = get_or<std::vector<std::int64_t>>(j, "ids", {});
  v.labels = get_or<std::vector<std::string>>(j, "labels", {});
  v.since = opt_time_field(j, "since");
  v.until = opt_time_field(j, "until");
  v.limit = get_or<std::int64_t>(j, "limit", 20);
  v.state = enum_field_or(j, "state", IssueState::kOpen);
}

void to_json(Json& j, const JobSnapshot& v) {
  j = Json{{"job_id", v.job_id},
           {"kind", to_string(v.kind)},
           {"repo_id", v.repo_id},
           {"stage", to_string(v.stage)},
           {"percent", v.percent},
           {"error", v.error ? Json(*v.error) : Json(nullptr)},
           {"started_at", opt_time(v.started_at)},
           {"finished_at", opt_time(v.finished_at)},
           {"warnings", v.warnings}};
}
void from_json(const Json& j, JobSnapshot& v) {
  v.job_id = j.at("job_id").get<std::string>();
  v.kind = enum_field<JobKind>(j, "kind");
  v.repo_id = get_or<std::string>(j, "repo_id", "");
  v.stage = enum_field<JobStage>(j, "stage");
  v.percent = j.at("percent").get<int>();
  v.error = j.contains("error") && !j.at("error").is_null() ? std::optional{j.at("error").get<std::string>()}
                                                             : std::nullopt;
  v.started_at = opt_time_field(j, "started_at");
  v.finished_at = opt_time_field(j, "finished_at");
  v.warnings = get_or<std::vector<std::string>>(j, "warnings", {});
}

}  // namespace personaflow
