#include "personaflow/stage_parse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "personaflow/errors.hpp"
#include "personaflow/http.hpp"

namespace personaflow {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::kParseError, what); }

constexpr std::size_t kMaxCandidates = 256;

/// End index (inclusive) of the object starting at `start`, or npos when unbalanced.
std::size_t balanced_end(std::string_view s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      if (--depth == 0) return c == '}' ? i : std::string_view::npos;
      if (depth < 0) return std::string_view::npos;
    }
  }
  return std::string_view::npos;
}

std::string lower_trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

const Json& field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path + " is not an object");
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) fail(path + "." + key + " is missing");
  return *it;
}

std::string req_string(const Json& obj, const char* key, const std::string& path, bool nonempty = false) {
  const auto& v = field(obj, key, path);
  if (!v.is_string()) fail(path + "." + key + " is not a string");
  auto s = v.get<std::string>();
  if (nonempty && lower_trim(s).empty()) fail(path + "." + key + " is empty");
  return s;
}

std::string opt_string(const Json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key) || obj.at(key).is_null()) return {};
  return req_string(obj, key, path);
}

std::vector<std::string> string_list(const Json& v, const std::string& where) {
  if (!v.is_array()) fail(where + " is not an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) fail(where + "[" + std::to_string(i) + "] is not a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

std::vector<std::string> req_list(const Json& obj, const char* key, const std::string& path) {
  return string_list(field(obj, key, path), path + "." + key);
}

std::vector<std::string> opt_list(const Json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key) || obj.at(key).is_null()) return {};
  return req_list(obj, key, path);
}

double req_unit(const Json& obj, const char* key, const std::string& path) {
  const auto& v = field(obj, key, path);
  if (!v.is_number()) fail(path + "." + key + " is not a number");
  const double d = v.get<double>();
  if (!(d >= 0.0 && d <= 1.0)) fail(path + "." + key + " out of [0,1]");
  return d;
}

std::int64_t integer_of(const Json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e15) return static_cast<std::int64_t>(d);
  }
  if (v.is_string()) {
    const auto s = lower_trim(v.get<std::string>());
    if (!s.empty() && s.size() < 16 && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
      return std::stoll(s);
    }
  }
  fail(where + " is not an integer");
}

template <typename E>
E req_enum(const Json& obj, const char* key, const std::string& path) {
  const auto text = lower_trim(req_string(obj, key, path));
  if (auto e = parse_enum<E>(text)) return *e;
  fail(path + "." + key + " has unknown value '" + text + "'");
}

Json root_object(std::string_view raw) {
  if (raw.empty()) fail("response is empty");
  auto j = extract_json_object(raw);
  if (!j) fail("response contains no JSON object");
  return std::move(*j);
}

Persona persona_from(const Json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path + " is not an object");
  Persona p;
  p.name = req_string(obj, "name", path, true);
  const auto age = integer_of(field(obj, "age", path), path + ".age");
  if (age < 0 || age > 200) fail(path + ".age out of range");
  p.age = static_cast<int>(age);
  p.occupation = req_string(obj, "occupation", path, true);
  p.location = opt_string(obj, "location", path);
  p.quote = opt_string(obj, "quote", path);
  p.tagline = opt_string(obj, "tagline", path);
  p.background = opt_string(obj, "background", path);
  p.personality_traits = opt_list(obj, "personality_traits", path);
  p.goals = req_list(obj, "goals", path);
  p.pain_points = req_list(obj, "pain_points", path);
  p.technical_skills = opt_list(obj, "technical_skills", path);
  p.experience_level = req_enum<ExperienceLevel>(obj, "experience_level", path);
  p.tags = opt_list(obj, "tags", path);
  p.provenance = Provenance::kAiGenerated;
  return p;
}

void check_persona(const Persona& p, const std::string& path) {
  const auto violations = validate_persona(p);
  if (!violations.empty()) fail(path + ": " + violations.front());
}

template <typename F>
auto guarded(F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(std::string("malformed response: ") + e.what());
  }
}

}  // namespace

std::optional<Json> extract_json_object(std::string_view raw) {
  std::size_t tried = 0;
  for (std::size_t start = raw.find('{'); start != std::string_view::npos && tried < kMaxCandidates;
       start = raw.find('{', start + 1)) {
    const auto end = balanced_end(raw, start);
    if (end == std::string_view::npos) continue;
    ++tried;
    try {
      auto j = Json::parse(raw.substr(start, end - start + 1));
      if (j.is_object()) return j;
    } catch (const Json::exception&) {
    }
  }
  return std::nullopt;
}

LinkPlan parse_link_plan(std::string_view raw) {
  return guarded([&] {
    const auto root = root_object(raw);
    LinkPlan plan;
    auto links = [&](const char* key, SourceKind kind, const char* locator_key) {
      std::vector<LinkPlan::Link> out;
      if (!root.contains(key) || root.at(key).is_null()) return out;
      const auto& arr = root.at(key);
      if (!arr.is_array()) fail(std::string(key) + " is not an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = std::string(key) + "[" + std::to_string(i) + "]";
        LinkPlan::Link link;
        link.kind = kind;
        link.locator = req_string(arr[i], locator_key, path, true);
        link.expected_content = opt_string(arr[i], "expected_content", path);
        link.user_relevance = opt_string(arr[i], "user_relevance", path);
        const auto priority = integer_of(field(arr[i], "priority", path), path + ".priority");
        if (priority < 1 || priority > 5) fail(path + ".priority out of [1,5]");
        link.priority = static_cast<int>(priority);
        const bool absolute = parse_url(link.locator).has_value();
        if (kind == SourceKind::kExternalLink && !absolute) fail(path + ".url is not an absolute URL");
        if (kind == SourceKind::kInternalLink && (absolute || link.locator.find("://") != std::string::npos)) {
          fail(path + ".path is not repository-relative");
        }
        out.push_back(std::move(link));
      }
      return out;
    };
    plan.internal = links("internal_links", SourceKind::kInternalLink, "path");
    plan.external = links("external_links", SourceKind::kExternalLink, "url");
    plan.reasoning = req_string(root, "reasoning", "$", true);
    return plan;
  });
}

UserInsights parse_user_insights(std::string_view raw) {
  return guarded([&] {
    const auto root = root_object(raw);
    UserInsights u;
    u.user_types = req_list(root, "user_types", "$");
    u.primary_use_cases = req_list(root, "primary_use_cases", "$");
    u.user_needs = req_list(root, "user_needs", "$");
    u.pain_points = req_list(root, "pain_points", "$");
    u.community_insights = req_string(root, "community_insights", "$");
    u.persona_recommendations = req_list(root, "persona_recommendations", "$");
    return u;
  });
}

DomainAnalysis parse_domain_analysis(std::string_view raw) {
  return guarded([&] {
    const auto root = root_object(raw);
    DomainAnalysis d;
    d.domain_summary = req_string(root, "domain_summary", "$", true);
    const auto& features = field(root, "key_features", "$");
    if (!features.is_array()) fail("$.key_features is not an array");
    if (features.empty()) fail("$.key_features is empty");
    for (std::size_t i = 0; i < features.size(); ++i) {
      const std::string path = "$.key_features[" + std::to_string(i) + "]";
      d.key_features.push_back({req_string(features[i], "name", path, true), opt_string(features[i], "description", path)});
    }
    const auto& traits = field(root, "user_characteristics", "$");
    if (!traits.is_array()) fail("$.user_characteristics is not an array");
    for (std::size_t i = 0; i < traits.size(); ++i) {
      const std::string path = "$.user_characteristics[" + std::to_string(i) + "]";
      d.user_characteristics.push_back({req_string(traits[i], "trait", path, true), opt_string(traits[i], "context", path)});
    }
    d.additional_insights = opt_list(root, "additional_insights", "$");
    return d;
  });
}

std::vector<Persona> parse_personas(std::string_view raw) {
  return guarded([&] {
    const auto root = root_object(raw);
    const auto& arr = field(root, "personas", "$");
    if (!arr.is_array()) fail("$.personas is not an array");
    if (arr.empty()) fail("$.personas is empty");
    std::vector<Persona> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "$.personas[" + std::to_string(i) + "]";
      auto p = persona_from(arr[i], path);
      p.confidence_score = req_unit(arr[i], "confidence_score", path);
      check_persona(p, path);
      out.push_back(std::move(p));
    }
    return out;
  });
}

Persona parse_merged_persona(std::string_view raw) {
  return guarded([&] {
    auto root = root_object(raw);
    if (root.contains("merged_persona") && root.at("merged_persona").is_object()) {
      root = Json(root.at("merged_persona"));
    }
    auto p = persona_from(root, "$");
    if (root.contains("confidence_score") && !root.at("confidence_score").is_null()) {
      p.confidence_score = req_unit(root, "confidence_score", "$");
    }
    check_persona(p, "$");
    return p;
  });
}

IssuePersonaMapping parse_issue_mapping(std::string_view raw, const std::vector<std::string>& persona_ids,
                                        std::int64_t issue_number) {
  return guarded([&] {
    const auto root = root_object(raw);
    auto resolve = [&](const Json& v, const std::string& where) -> std::pair<std::int64_t, std::string> {
      const auto index = integer_of(v, where);
      if (index < 1 || index > static_cast<std::int64_t>(persona_ids.size())) {
        fail(where + " refers to unknown persona " + std::to_string(index));
      }
      return {index, persona_ids[static_cast<std::size_t>(index - 1)]};
    };

    IssuePersonaMapping m;
    m.issue_number = issue_number;
    const auto& matched = field(root, "matched_persona_ids", "$");
    if (!matched.is_array()) fail("$.matched_persona_ids is not an array");
    std::vector<std::pair<std::int64_t, std::string>> ids;
    std::set<std::int64_t> seen;
    for (std::size_t i = 0; i < matched.size(); ++i) {
      auto id = resolve(matched[i], "$.matched_persona_ids[" + std::to_string(i) + "]");
      if (!seen.insert(id.first).second) fail("$.matched_persona_ids has duplicate " + std::to_string(id.first));
      ids.push_back(std::move(id));
    }

    const bool has_primary = root.contains("primary_persona_id") && !root.at("primary_persona_id").is_null();
    if (has_primary) {
      const auto primary_index = integer_of(root.at("primary_persona_id"), "$.primary_persona_id");
      if (!seen.count(primary_index)) {
        if (!(ids.empty() && primary_index == 0)) fail("$.primary_persona_id is not among matched_persona_ids");
      } else {
        m.primary_persona_id = persona_ids[static_cast<std::size_t>(primary_index - 1)];
      }
    } else if (!ids.empty()) {
      fail("$.primary_persona_id is missing");
    }

    m.confidence = req_unit(root, "confidence", "$");
    m.reasoning = opt_string(root, "reasoning", "$");

    if (!ids.empty()) {
      const auto& rationales = field(root, "persona_rationales", "$");
      if (!rationales.is_object()) fail("$.persona_rationales is not an object");
      for (const auto& [index, persona_id] : ids) {
        const auto key = std::to_string(index);
        const std::string path = "$.persona_rationales." + key;
        if (!rationales.contains(key) || !rationales.at(key).is_object()) fail(path + " is missing");
        const auto& r = rationales.at(key);
        Association a;
        a.persona_id = persona_id;
        a.origin = AssociationOrigin::kAiSuggested;
        a.relevance_score = req_unit(r, "relevance_score", path);
        a.matched_goals = opt_list(r, "matched_goals", path);
        a.matched_pain_points = opt_list(r, "matched_pain_points", path);
        a.use_case_fit = opt_string(r, "use_case_fit", path);
        a.impact_level = req_enum<ImpactLevel>(r, "impact_level", path);
        a.rationale = req_string(r, "rationale", path, true);
        m.associations.push_back(std::move(a));
      }
    }

    const auto& notes = field(root, "analysis_notes", "$");
    m.analysis_notes.issue_type = req_enum<IssueType>(notes, "issue_type", "$.analysis_notes");
    m.analysis_notes.technical_level = req_enum<TechnicalLevel>(notes, "technical_level", "$.analysis_notes");
    m.analysis_notes.urgency_indicators = opt_list(notes, "urgency_indicators", "$.analysis_notes");

    const auto violations = validate_mapping(m);
    if (!violations.empty()) fail(violations.front());
    return m;
  });
}

StageOutput parse_stage_output(Stage stage, std::string_view raw, const ParseOptions& options) {
  switch (stage) {
    case Stage::kLinkDiscovery: return parse_link_plan(raw);
    case Stage::kUserInsights: return parse_user_insights(raw);
    case Stage::kDomainAnalysis: return parse_domain_analysis(raw);
    case Stage::kPersonaGeneration: return parse_personas(raw);
    case Stage::kMerge: return parse_merged_persona(raw);
    case Stage::kIssueMapping: return parse_issue_mapping(raw, options.persona_ids, options.issue_number);
    case Stage::kHeadshot: break;
  }
  fail("stage " + std::string(to_string(stage)) + " has no text output schema");
}

}  // namespace personaflow
