#include "personaflow/prompts.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "personaflow/errors.hpp"
#include "templates.hpp"

namespace personaflow {

namespace {

using Token = std::pair<std::string_view, std::string_view>;  // literal in template, context key

constexpr std::string_view kMergeDescriptions =
    "[Detailed persona descriptions including name, age, occupation, location,\n"
    "quote, tagline, background, personality traits, goals, pain points,\n"
    "technical skills, experience level, and tags for each persona]";

std::vector<Token> tokens_for(Stage stage) {
  switch (stage) {
    case Stage::kLinkDiscovery:
      return {{"[owner/repo]", "owner_repo"}, {"[README text]", "readme_text"}};
    case Stage::kUserInsights:
      return {{"[owner/repo]", "owner_repo"},
              {"[Resource Corpus content with internal and external documentation]", "corpus_text"}};
    case Stage::kDomainAnalysis:
      return {{"[README and additional context]", "repository_content"}};
    case Stage::kPersonaGeneration:
      return {{"[N]", "n"}, {"[JSON domain analysis]", "domain_analysis_json"}};
    case Stage::kHeadshot:
      return {{"[gender hint]", "gender_hint"},         {"[age]", "age"},
              {"[occupation]", "occupation"},           {"[expression]", "expression"},
              {"[clothing style]", "clothing_style"},   {"[setting]", "setting"},
              {"[photography style]", "photography_style"}};
    case Stage::kMerge:
      return {{"[N]", "n"}, {kMergeDescriptions, "persona_descriptions"}};
    case Stage::kIssueMapping:
      return {{"[Title, Body, Labels]", "issue_text"}, {"[JSON personas]", "personas_json"}};
  }
  return {};
}

std::string substitute(std::string_view tpl, const std::vector<Token>& tokens, const PromptContext& context) {
  std::string out;
  out.reserve(tpl.size() * 2);
  std::size_t i = 0;
  while (i < tpl.size()) {
    bool replaced = false;
    if (tpl[i] == '[') {
      for (const auto& [literal, key] : tokens) {
        if (tpl.substr(i, literal.size()) == literal) {
          out += context.at(std::string(key));
          i += literal.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(tpl[i++]);
  }
  return out;
}

std::string schema_id(Stage stage) { return std::string(to_string(stage)) + ".v1"; }

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kLinkDiscovery: return "link_discovery";
    case Stage::kUserInsights: return "user_insights";
    case Stage::kDomainAnalysis: return "domain_analysis";
    case Stage::kPersonaGeneration: return "persona_generation";
    case Stage::kHeadshot: return "headshot";
    case Stage::kMerge: return "merge";
    case Stage::kIssueMapping: return "issue_mapping";
  }
  return "";
}

std::vector<std::string> required_placeholders(Stage stage) {
  std::vector<std::string> keys;
  for (const auto& [literal, key] : tokens_for(stage)) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.emplace_back(key);
  }
  return keys;
}

PromptBundle render_prompt(Stage stage, const PromptContext& context) {
  for (const auto& key : required_placeholders(stage)) {
    if (!context.count(key)) {
      throw Error(ErrorCode::kMissingPlaceholder,
                  "missing placeholder '" + key + "' for stage " + std::string(to_string(stage)));
    }
  }
  const auto tokens = tokens_for(stage);
  PromptBundle bundle;
  bundle.stage = stage;
  bundle.expected_schema = schema_id(stage);
  bundle.fixture_key = std::string(to_string(stage)) + ":" + context_hash(context);

  switch (stage) {
    case Stage::kLinkDiscovery:
      bundle.system_text = templates::kLinkDiscoverySystem;
      bundle.user_text = substitute(templates::kLinkDiscoveryUser, tokens, context);
      break;
    case Stage::kUserInsights:
      bundle.system_text = templates::kUserInsightsSystem;
      bundle.user_text = substitute(templates::kUserInsightsUser, tokens, context);
      break;
    case Stage::kDomainAnalysis:
      bundle.system_text = templates::kDomainAnalysisSystem;
      bundle.user_text = substitute(templates::kDomainAnalysisUser, tokens, context);
      break;
    case Stage::kPersonaGeneration:
      bundle.system_text = templates::kPersonaGenerationSystem;
      bundle.user_text = substitute(templates::kPersonaGenerationUser, tokens, context);
      if (auto it = context.find("existing_personas"); it != context.end() && !it->second.empty()) {
        bundle.user_text += "\n\nExisting personas (create personas distinct from these):\n" + it->second;
      }
      break;
    case Stage::kHeadshot: {
      int index = headshot_template_index(context.at("occupation"));
      if (auto it = context.find("template_index"); it != context.end()) {
        try {
          index = std::stoi(it->second);
        } catch (const std::exception&) {
          throw Error(ErrorCode::kInvalidArgument, "template_index is not a number");
        }
        if (index < 0 || index >= kHeadshotTemplateCount) {
          throw Error(ErrorCode::kInvalidArgument, "template_index out of range");
        }
      }
      bundle.user_text = substitute(templates::kHeadshot[index], tokens, context);
      break;
    }
    case Stage::kMerge:
      bundle.system_text = templates::kMergeSystem;
      bundle.user_text = substitute(templates::kMergeUser, tokens, context);
      if (auto it = context.find("guidance"); it != context.end() && !it->second.empty()) {
        bundle.user_text += "\n\nUser guidance: " + it->second;
      }
      break;
    case Stage::kIssueMapping:
      bundle.system_text = templates::kIssueMappingSystem;
      bundle.user_text = substitute(templates::kIssueMappingUser, tokens, context);
      break;
  }
  return bundle;
}

PromptBundle with_repair_instruction(const PromptBundle& bundle) {
  PromptBundle repaired = bundle;
  repaired.user_text += "\n\n";
  repaired.user_text += kRepairInstruction;
  repaired.fixture_key += ":repair";
  return repaired;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[value & 15];
    value >>= 4;
  }
  return out;
}

std::string context_hash(const PromptContext& context) {
  std::string canonical;
  for (const auto& [k, v] : context) {
    canonical += k;
    canonical += '\x1f';
    canonical += v;
    canonical += '\x1e';
  }
  return hex64(fnv1a64(canonical));
}

int headshot_template_index(std::string_view occupation) {
  return static_cast<int>(fnv1a64(occupation) % kHeadshotTemplateCount);
}

std::string format_corpus(const ResourceCorpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.documents) {
    if (!out.empty()) out += "\n\n";
    out += "=== " + std::string(to_string(doc.source_kind)) + ": " + doc.locator + " ===\n";
    out += doc.content_text;
  }
  return out;
}

std::string format_repository_content(const ResourceCorpus& corpus, const UserInsights& insights) {
  return format_corpus(corpus) + "\n\nUser insights: " + dump_json(Json(insights));
}

std::string format_issue(const IssueRecord& issue) {
  return "Title: " + issue.title + "\nBody: " + issue.body +
         "\nLabels: " + (issue.labels.empty() ? std::string("(none)") : join(issue.labels, ", "));
}

std::string format_personas_for_mapping(const std::vector<Persona>& personas) {
  Json array = Json::array();
  for (std::size_t i = 0; i < personas.size(); ++i) {
    const auto& p = personas[i];
    array.push_back({{"id", static_cast<int>(i + 1)},
                     {"name", p.name},
                     {"age", p.age},
                     {"occupation", p.occupation},
                     {"location", p.location},
                     {"quote", p.quote},
                     {"tagline", p.tagline},
                     {"background", p.background},
                     {"personality_traits", p.personality_traits},
                     {"goals", p.goals},
                     {"pain_points", p.pain_points},
                     {"technical_skills", p.technical_skills},
                     {"experience_level", to_string(p.experience_level)}});
  }
  return dump_json(array, 2);
}

std::string format_personas_for_merge(const std::vector<Persona>& personas) {
  std::ostringstream out;
  for (std::size_t i = 0; i < personas.size(); ++i) {
    const auto& p = personas[i];
    if (i) out << "\n\n";
    out << "Persona " << (i + 1) << ":\n"
        << "name: " << p.name << "\n"
        << "age: " << p.age << "\n"
        << "occupation: " << p.occupation << "\n"
        << "location: " << p.location << "\n"
        << "quote: " << p.quote << "\n"
        << "tagline: " << p.tagline << "\n"
        << "background: " << p.background << "\n"
        << "personality traits: " << join(p.personality_traits, "; ") << "\n"
        << "goals: " << join(p.goals, "; ") << "\n"
        << "pain points: " << join(p.pain_points, "; ") << "\n"
        << "technical skills: " << join(p.technical_skills, "; ") << "\n"
        << "experience level: " << to_string(p.experience_level) << "\n"
        << "tags: " << join(p.tags, "; ");
  }
  return out.str();
}

std::string format_existing_personas(const std::vector<Persona>& personas) {
  std::string out;
  for (const auto& p : personas) {
    if (!out.empty()) out += "\n";
    out += "- " + p.name + ": " + p.tagline;
  }
  return out;
}

}  // namespace personaflow
