#include "personaflow/persona_engine.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "personaflow/errors.hpp"
#include "personaflow/http.hpp"
#include "personaflow/stage_parse.hpp"

namespace personaflow {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool mentions(std::string_view haystack, std::initializer_list<std::string_view> words) {
  const auto h = lower(haystack);
  return std::any_of(words.begin(), words.end(), [&](auto w) { return h.find(w) != std::string::npos; });
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

std::string_view avatar_style(ExperienceLevel level) {
  switch (level) {
    case ExperienceLevel::kBeginner: return "adventurer";
    case ExperienceLevel::kIntermediate: return "avataaars";
    case ExperienceLevel::kAdvanced: return "personas";
    case ExperienceLevel::kExpert: return "notionists";
  }
  return "avataaars";
}

Timestamp later_than(Timestamp previous, Timestamp now) {
  return now > previous ? now : previous + std::chrono::milliseconds(1);
}

const std::set<std::string>& editable_fields() {
  static const std::set<std::string> fields = {
      "name",   "age",        "occupation", "location",           "quote",
      "tagline", "background", "goals",     "personality_traits", "pain_points",
      "technical_skills", "experience_level", "confidence_score", "tags", "avatar"};
  return fields;
}

}  // namespace

void check_persona_count(int n) {
  if (n < kMinPersonaCount || n > kMaxPersonaCount) {
    throw Error(ErrorCode::kInvalidParams, "persona count must be between 1 and 10, got " + std::to_string(n));
  }
}

AvatarRef parameterized_avatar(const Persona& p) {
  AvatarRef ref;
  ref.kind = AvatarKind::kParameterizedUrl;
  ref.seed_inputs = {{"experience_level", std::string(to_string(p.experience_level))}, {"name", p.name}};
  ref.locator = "https://api.dicebear.com/7.x/" + std::string(avatar_style(p.experience_level)) +
                "/svg?seed=" + url_encode(p.name);
  return ref;
}

PromptContext headshot_context(const Persona& p) {
  const auto traits = join(p.personality_traits, " ");
  std::string expression = "a calm, confident expression";
  if (mentions(traits, {"friendly", "warm", "outgoing", "empathetic", "enthusiastic", "collaborative"})) {
    expression = "a warm, approachable smile";
  } else if (mentions(traits, {"analytical", "detail", "methodical", "focused", "pragmatic"})) {
    expression = "a focused, thoughtful expression";
  }

  std::string clothing;
  switch (p.experience_level) {
    case ExperienceLevel::kBeginner: clothing = "casual everyday clothing"; break;
    case ExperienceLevel::kIntermediate: clothing = "smart casual attire"; break;
    case ExperienceLevel::kAdvanced: clothing = "business casual attire"; break;
    case ExperienceLevel::kExpert: clothing = "tailored professional attire"; break;
  }

  std::string setting = "a bright, modern workspace";
  if (mentions(p.occupation, {"teacher", "educator", "professor", "instructor"})) {
    setting = "a classroom";
  } else if (mentions(p.occupation, {"student"})) {
    setting = "a university campus";
  } else if (mentions(p.occupation, {"music", "composer", "conductor", "musician"})) {
    setting = "a music studio";
  } else if (mentions(p.occupation, {"designer", "artist"})) {
    setting = "a creative studio";
  } else if (mentions(p.occupation, {"developer", "engineer", "integrator", "programmer"})) {
    setting = "a modern office with monitors";
  }

  return {{"gender_hint", "a person"},
          {"age", std::to_string(p.age)},
          {"occupation", p.occupation},
          {"expression", expression},
          {"clothing_style", clothing},
          {"setting", setting},
          {"photography_style", "natural light, shallow depth of field"}};
}

AvatarRef assign_avatar(LlmClient& llm, const Persona& p, AvatarMode mode, const std::string& job_id,
                        std::vector<std::string>& warnings) {
  if (mode == AvatarMode::kParameterizedUrl) return parameterized_avatar(p);
  try {
    const auto context = headshot_context(p);
    const auto bundle = render_prompt(Stage::kHeadshot, context);
    AvatarRef ref;
    ref.kind = AvatarKind::kGeneratedImage;
    ref.locator = llm.generate_image(bundle, job_id);
    ref.seed_inputs = context;
    ref.seed_inputs["template_index"] = std::to_string(headshot_template_index(p.occupation));
    if (ref.locator.empty()) throw Error(ErrorCode::kProviderError, "empty image locator");
    return ref;
  } catch (const std::exception& e) {
    warnings.push_back("headshot for " + p.name + " fell back to a generated avatar: " + e.what());
    return parameterized_avatar(p);
  }
}

Analysis PersonaEngine::analyze(const ResourceCorpus& corpus, const std::string& job_id) {
  Analysis out;
  const auto insights_prompt = render_prompt(
      Stage::kUserInsights, {{"owner_repo", corpus.repo.full_name()}, {"corpus_text", format_corpus(corpus)}});
  out.insights = llm_->complete_parsed(insights_prompt, job_id,
                                       [](const std::string& raw) { return parse_user_insights(raw); });
  const auto domain_prompt = render_prompt(
      Stage::kDomainAnalysis, {{"repository_content", format_repository_content(corpus, out.insights)}});
  out.domain = llm_->complete_parsed(domain_prompt, job_id,
                                     [](const std::string& raw) { return parse_domain_analysis(raw); });
  return out;
}

std::vector<Persona> PersonaEngine::generate_from_analysis(const DomainAnalysis& domain, int n,
                                                           const std::vector<Persona>& existing,
                                                           const std::string& job_id,
                                                           std::vector<std::string>& warnings) {
  check_persona_count(n);
  PromptContext context{{"n", std::to_string(n)}, {"domain_analysis_json", dump_json(Json(domain), 2)}};
  if (!existing.empty()) context["existing_personas"] = format_existing_personas(existing);
  const auto prompt = render_prompt(Stage::kPersonaGeneration, context);
  auto personas = llm_->complete_parsed(prompt, job_id, [n](const std::string& raw) {
    auto parsed = parse_personas(raw);
    if (static_cast<int>(parsed.size()) < n) {
      throw Error(ErrorCode::kParseError, "expected " + std::to_string(n) + " personas, got " +
                                              std::to_string(parsed.size()));
    }
    parsed.resize(static_cast<std::size_t>(n));
    return parsed;
  });
  const auto now = now_utc();
  for (auto& p : personas) {
    p.provenance = Provenance::kAiGenerated;
    p.created_at = p.updated_at = now;
    p.avatar = assign_avatar(*llm_, p, avatar_mode_, job_id, warnings);
  }
  return personas;
}

std::vector<Persona> PersonaEngine::generate_personas(const ResourceCorpus& corpus, int n, const std::string& job_id,
                                                      std::vector<std::string>& warnings) {
  check_persona_count(n);
  if (corpus.documents.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no documents");
  const auto analysis = analyze(corpus, job_id);
  return generate_from_analysis(analysis.domain, n, {}, job_id, warnings);
}

Persona PersonaEngine::merge(const std::vector<Persona>& sources, const std::optional<std::string>& guidance,
                             const std::string& job_id, std::vector<std::string>& warnings) {
  std::set<std::string> ids;
  for (const auto& s : sources) ids.insert(s.id);
  if (ids.size() < 2 || ids.size() != sources.size()) {
    throw Error(ErrorCode::kFewerThanTwo, "merge needs at least two distinct personas");
  }
  PromptContext context{{"n", std::to_string(sources.size())},
                        {"persona_descriptions", format_personas_for_merge(sources)}};
  if (guidance && !guidance->empty()) context["guidance"] = *guidance;
  const auto prompt = render_prompt(Stage::kMerge, context);
  auto merged =
      llm_->complete_parsed(prompt, job_id, [](const std::string& raw) { return parse_merged_persona(raw); });
  merged.provenance = Provenance::kMerged;
  merged.source_persona_ids.clear();
  for (const auto& s : sources) merged.source_persona_ids.push_back(s.id);
  merged.confidence_score =
      std::accumulate(sources.begin(), sources.end(), 0.0, [](double acc, const Persona& p) {
        return acc + p.confidence_score;
      }) / static_cast<double>(sources.size());
  merged.created_at = merged.updated_at = now_utc();
  merged.avatar = assign_avatar(*llm_, merged, avatar_mode_, job_id, warnings);
  return merged;
}

Persona apply_patch(const Persona& p, const Json& patch, Timestamp now) {
  if (!patch.is_object()) throw Error(ErrorCode::kInvalidPatch, "patch must be a JSON object");
  Json j = p;
  for (const auto& [key, value] : patch.items()) {
    if (key == "version") continue;
    if (!editable_fields().count(key)) throw Error(ErrorCode::kInvalidPatch, "field '" + key + "' is not editable");
    j[key] = value;
  }
  Persona out;
  try {
    out = j.get<Persona>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInvalidPatch, std::string("patch has a wrong type: ") + e.what());
  }
  out.edited = true;
  out.updated_at = later_than(p.updated_at, now);
  if (!patch.contains("avatar") && (patch.contains("name") || patch.contains("experience_level")) &&
      out.avatar.kind == AvatarKind::kParameterizedUrl) {
    out.avatar = parameterized_avatar(out);
  }
  if (const auto violations = validate_persona(out); !violations.empty()) {
    throw Error(ErrorCode::kInvalidPatch, join(violations, "; "));
  }
  return out;
}

Persona make_custom_persona(const Json& fields, Timestamp now) {
  if (!fields.is_object()) throw Error(ErrorCode::kInvalidPersona, "persona must be a JSON object");
  Persona p;
  try {
    Json j = fields;
    for (const char* key : {"id", "provenance", "source_persona_ids", "edited", "archived", "created_at", "updated_at"}) {
      j.erase(key);
    }
    if (!j.contains("name")) throw Error(ErrorCode::kInvalidPersona, "name is required");
    if (!j.contains("age")) throw Error(ErrorCode::kInvalidPersona, "age is required");
    p = j.get<Persona>();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidPersona) throw;
    throw Error(ErrorCode::kInvalidPersona, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInvalidPersona, std::string("invalid persona fields: ") + e.what());
  }
  p.provenance = Provenance::kManual;
  p.confidence_score = 1.0;
  p.created_at = p.updated_at = now;
  if (p.avatar.locator.empty()) p.avatar = parameterized_avatar(p);
  if (const auto violations = validate_persona(p); !violations.empty()) {
    throw Error(ErrorCode::kInvalidPersona, join(violations, "; "));
  }
  return p;
}

}  // namespace personaflow
