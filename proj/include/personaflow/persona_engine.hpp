#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "personaflow/model.hpp"
#include "personaflow/prompts.hpp"
#include "personaflow/providers.hpp"

namespace personaflow {

enum class AvatarMode { kParameterizedUrl, kGeneratedImage };

inline constexpr int kMinPersonaCount = 1;
inline constexpr int kMaxPersonaCount = 10;
/// Throws kInvalidParams unless 1 <= n <= 10.
void check_persona_count(int n);

/// Deterministic avatar URL seeded by {experience_level, name}; no provider call.
AvatarRef parameterized_avatar(const Persona& p);
/// Placeholder values for the headshot prompt derived from the persona.
PromptContext headshot_context(const Persona& p);
/// One image call in generated_image mode; any failure falls back to the
/// parameterized URL and appends a warning.
AvatarRef assign_avatar(LlmClient& llm, const Persona& p, AvatarMode mode, const std::string& job_id,
                        std::vector<std::string>& warnings);

struct Analysis {
  UserInsights insights;
  DomainAnalysis domain;
};

class PersonaEngine {
 public:
  PersonaEngine(std::shared_ptr<LlmClient> llm, AvatarMode avatar_mode)
      : llm_(std::move(llm)), avatar_mode_(avatar_mode) {}

  /// user_insights then domain_analysis: two completions.
  Analysis analyze(const ResourceCorpus& corpus, const std::string& job_id);

  /// One persona_generation completion plus avatars. `existing` personas are
  /// listed in the prompt so new ones differ from them.
  std::vector<Persona> generate_from_analysis(const DomainAnalysis& domain, int n, const std::vector<Persona>& existing,
                                              const std::string& job_id, std::vector<std::string>& warnings);

  /// Whole chain over a built corpus: analyze + generate_from_analysis.
  std::vector<Persona> generate_personas(const ResourceCorpus& corpus, int n, const std::string& job_id,
                                         std::vector<std::string>& warnings);

  /// One merge completion. Sources must be >= 2 distinct personas.
  Persona merge(const std::vector<Persona>& sources, const std::optional<std::string>& guidance,
                const std::string& job_id, std::vector<std::string>& warnings);

  AvatarMode avatar_mode() const { return avatar_mode_; }
  LlmClient& llm() { return *llm_; }

 private:
  std::shared_ptr<LlmClient> llm_;
  AvatarMode avatar_mode_;
};

/// Applies an edit. Only content fields may change; the result is marked
/// edited and validated with the manual rules. Throws kInvalidPatch.
Persona apply_patch(const Persona& p, const Json& patch, Timestamp now);

/// Builds a manual persona (confidence 1.0) from user fields. Throws kInvalidPersona.
Persona make_custom_persona(const Json& fields, Timestamp now);

}  // namespace personaflow
