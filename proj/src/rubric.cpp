#include "personaflow/rubric.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "personaflow/errors.hpp"

namespace personaflow {

namespace {

constexpr std::array<int, kEvidenceCount> kWeights = {20, 20, 15, 15, 10, 10, 10, -20, -30, -40};

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",     "an",    "and",   "are",   "as",    "at",    "be",    "but",   "by",    "can",   "do",
      "does",  "for",   "from",  "has",   "have",  "how",   "i",     "if",    "in",    "into",  "is",
      "it",    "its",   "me",    "my",    "no",    "not",   "of",    "on",    "or",    "our",   "so",
      "that",  "the",   "their", "them",  "then",  "there", "these", "they",  "this",  "to",    "too",
      "use",   "using", "was",   "we",    "when",  "where", "which", "while", "who",   "will",  "with",
      "would", "you",   "your",  "all",   "any",   "more",  "less",  "very",  "also",  "than",  "out",
      "up",    "via",   "get",   "one",   "other", "some",  "such",  "what",  "should", "could", "been",
      "being", "after", "before", "about", "just",  "like",  "need",  "needs", "through", "due", "lack",
      "ensure", "easily", "better", "new", "different"};
  return words;
}

std::string normalize(std::string word) {
  if (word.size() > 4 && word.ends_with("ies")) {
    word.replace(word.size() - 3, 3, "y");
  } else if (word.size() > 3 && word.back() == 's' && !word.ends_with("ss")) {
    word.pop_back();
  }
  return word;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool contains_any(const std::string& text, std::initializer_list<std::string_view> needles) {
  return std::any_of(needles.begin(), needles.end(), [&](auto n) { return text.find(n) != std::string::npos; });
}

/// Phrase from a goal or pain point matches when two of its content words occur
/// in the issue, or its only content word does.
bool phrase_matches(const std::string& phrase, const std::set<std::string>& issue_tokens) {
  const auto tokens = content_tokens(phrase);
  std::set<std::string> distinct;
  for (const auto& t : tokens) {
    if (t.size() >= 3) distinct.insert(t);
  }
  if (distinct.empty()) return false;
  const auto hits = std::count_if(distinct.begin(), distinct.end(), [&](const auto& t) { return issue_tokens.count(t); });
  return hits >= 2 || (distinct.size() == 1 && hits == 1);
}

enum class Level { kBeginner = 0, kIntermediate = 1, kAdvanced = 2 };

Level issue_level(const std::string& text) {
  if (contains_any(text, {"stack trace", "stacktrace", "exception", "segfault", "api", "memory", "thread", "```",
                          "docker", "compile", "build", "dll", "sdk", "config", "deploy", "server"})) {
    return Level::kAdvanced;
  }
  if (contains_any(text, {"how do i", "confusing", "where is", "can't find", "beginner", "tutorial"})) {
    return Level::kBeginner;
  }
  return Level::kIntermediate;
}

Level persona_level(ExperienceLevel e) {
  switch (e) {
    case ExperienceLevel::kBeginner: return Level::kBeginner;
    case ExperienceLevel::kIntermediate: return Level::kIntermediate;
    case ExperienceLevel::kAdvanced:
    case ExperienceLevel::kExpert: return Level::kAdvanced;
  }
  return Level::kIntermediate;
}

std::string issue_text(const IssueRecord& issue) {
  std::string labels;
  for (const auto& l : issue.labels) labels += " " + l;
  return lower(issue.title + "\n" + issue.body + "\n" + labels);
}

bool bug_like(const IssueRecord& issue, const std::string& text) {
  for (const auto& l : issue.labels) {
    if (lower(l).find("bug") != std::string::npos) return true;
  }
  return contains_any(text, {"error", "crash", "not work", "doesn't work", "dont work", "don't work", "fail",
                             "broken", "cannot", "can't", "unable", "not supported", "lost", "missing", "wrong"});
}

std::vector<std::string> urgency_indicators(const std::string& text) {
  std::vector<std::string> out;
  for (std::string_view w : {"urgent", "asap", "blocker", "blocking", "critical", "production", "data loss", "crash",
                             "lost", "deadline", "live performance"}) {
    if (text.find(w) != std::string::npos) out.emplace_back(w);
  }
  return out;
}

IssueType issue_type_of(const IssueRecord& issue, const std::string& text) {
  for (const auto& l : issue.labels) {
    const auto ll = lower(l);
    if (ll.find("bug") != std::string::npos) return IssueType::kBug;
    if (ll.find("feature") != std::string::npos) return IssueType::kFeature;
    if (ll.find("enhancement") != std::string::npos) return IssueType::kEnhancement;
  }
  if (bug_like(issue, text)) return IssueType::kBug;
  if (contains_any(text, {"add ", "support for", "would be nice", "feature", "please add"})) return IssueType::kFeature;
  return IssueType::kEnhancement;
}

}  // namespace

int evidence_weight(Evidence e) { return kWeights[static_cast<std::size_t>(e)]; }

std::string_view to_string(Evidence e) {
  switch (e) {
    case Evidence::kGoalMentionsFeature: return "goal_mentions_feature";
    case Evidence::kPainPointDescribes: return "pain_point_describes";
    case Evidence::kPrimaryWorkflow: return "primary_workflow";
    case Evidence::kBlocksGoal: return "blocks_goal";
    case Evidence::kTechLevelMatch: return "tech_level_match";
    case Evidence::kContextExplainsUrgency: return "context_explains_urgency";
    case Evidence::kToneAlignment: return "tone_alignment";
    case Evidence::kEasyWorkaround: return "easy_workaround";
    case Evidence::kTechnicalMismatch: return "technical_mismatch";
    case Evidence::kRarelyUsesFeature: return "rarely_uses_feature";
  }
  return "";
}

RubricScore rubric_score(EvidenceFlags flags) {
  RubricScore out;
  int sum = 0;
  for (int i = 0; i < kEvidenceCount; ++i) {
    if (!flags.test(static_cast<std::size_t>(i))) continue;
    const auto e = static_cast<Evidence>(i);
    sum += evidence_weight(e);
    out.breakdown[std::string(to_string(e))] = evidence_weight(e);
  }
  out.points = std::clamp(sum, 0, 100);
  return out;
}

double rubric_to_confidence(int points) {
  if (points < 0 || points > 100) {
    throw Error(ErrorCode::kInvalidArgument, "rubric points out of [0,100]: " + std::to_string(points));
  }
  return points / 100.0;
}

std::vector<std::string> content_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      auto w = normalize(lower(word));
      if (w.size() >= 2 && !stopwords().count(w)) out.push_back(std::move(w));
      word.clear();
    }
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      word.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

EvidenceFlags derive_evidence(const IssueRecord& issue, const Persona& persona) {
  EvidenceFlags f;
  const auto text = issue_text(issue);
  const auto tokens_vec = content_tokens(text);
  const std::set<std::string> tokens(tokens_vec.begin(), tokens_vec.end());

  const bool goal_hit =
      std::any_of(persona.goals.begin(), persona.goals.end(), [&](const auto& g) { return phrase_matches(g, tokens); });
  const bool pain_hit = std::any_of(persona.pain_points.begin(), persona.pain_points.end(),
                                    [&](const auto& p) { return phrase_matches(p, tokens); });
  const bool skill_hit = std::any_of(persona.technical_skills.begin(), persona.technical_skills.end(),
                                     [&](const auto& s) { return phrase_matches(s, tokens); }) ||
                         phrase_matches(persona.tagline, tokens);

  const auto level_gap = std::abs(static_cast<int>(issue_level(text)) - static_cast<int>(persona_level(persona.experience_level)));
  const bool technical_issue = issue_level(text) == Level::kAdvanced;
  const bool technical_persona = persona_level(persona.experience_level) == Level::kAdvanced;

  std::string profile = persona.occupation + " " + persona.background + " " + persona.tagline;
  for (const auto* list : {&persona.goals, &persona.pain_points, &persona.technical_skills}) {
    for (const auto& s : *list) profile += " " + s;
  }
  const auto profile_tokens = content_tokens(profile);
  const bool any_overlap = std::any_of(profile_tokens.begin(), profile_tokens.end(),
                                       [&](const auto& t) { return t.size() >= 4 && tokens.count(t); });

  f.set(static_cast<std::size_t>(Evidence::kGoalMentionsFeature), goal_hit);
  f.set(static_cast<std::size_t>(Evidence::kPainPointDescribes), pain_hit);
  f.set(static_cast<std::size_t>(Evidence::kPrimaryWorkflow), skill_hit);
  f.set(static_cast<std::size_t>(Evidence::kBlocksGoal), goal_hit && bug_like(issue, text));
  f.set(static_cast<std::size_t>(Evidence::kTechLevelMatch), level_gap == 0);
  f.set(static_cast<std::size_t>(Evidence::kContextExplainsUrgency),
        (goal_hit || pain_hit) && !urgency_indicators(text).empty());
  f.set(static_cast<std::size_t>(Evidence::kToneAlignment), technical_issue == technical_persona);
  f.set(static_cast<std::size_t>(Evidence::kEasyWorkaround), contains_any(text, {"workaround", "work around"}));
  f.set(static_cast<std::size_t>(Evidence::kTechnicalMismatch), level_gap >= 2);
  f.set(static_cast<std::size_t>(Evidence::kRarelyUsesFeature), !any_overlap);
  return f;
}

RubricScore rubric_score(const IssueRecord& issue, const Persona& persona) {
  return rubric_score(derive_evidence(issue, persona));
}

IssuePersonaMapping offline_map_issue(const IssueRecord& issue, const std::vector<Persona>& personas) {
  const auto text = issue_text(issue);
  const auto tokens_vec = content_tokens(text);
  const std::set<std::string> tokens(tokens_vec.begin(), tokens_vec.end());

  struct Scored {
    const Persona* persona;
    RubricScore score;
  };
  std::vector<Scored> matched;
  for (const auto& p : personas) {
    auto score = rubric_score(issue, p);
    if (score.points >= kOfflineMatchPoints) matched.push_back({&p, std::move(score)});
  }
  std::stable_sort(matched.begin(), matched.end(),
                   [](const Scored& a, const Scored& b) { return a.score.points > b.score.points; });

  IssuePersonaMapping m;
  m.issue_number = issue.number;
  for (const auto& [persona, score] : matched) {
    Association a;
    a.persona_id = persona->id;
    a.origin = AssociationOrigin::kAiSuggested;
    a.relevance_score = rubric_to_confidence(score.points);
    for (const auto& g : persona->goals) {
      if (phrase_matches(g, tokens)) a.matched_goals.push_back(g);
    }
    for (const auto& p : persona->pain_points) {
      if (phrase_matches(p, tokens)) a.matched_pain_points.push_back(p);
    }
    a.impact_level = score.points >= 80 ? ImpactLevel::kHigh : score.points >= 60 ? ImpactLevel::kMedium : ImpactLevel::kLow;
    std::string parts;
    for (const auto& [name, weight] : score.breakdown) {
      if (!parts.empty()) parts += ", ";
      parts += (weight > 0 ? "+" : "") + std::to_string(weight) + " " + name;
    }
    a.use_case_fit = persona->occupation;
    a.rationale = "Offline rubric score " + std::to_string(score.points) + "/100 (" + parts + ").";
    m.associations.push_back(std::move(a));
  }
  if (!m.associations.empty()) {
    m.primary_persona_id = m.associations.front().persona_id;
    m.confidence = m.associations.front().relevance_score;
    m.reasoning = "Matched by the offline evidence rubric; strongest match scored " +
                  std::to_string(matched.front().score.points) + " points.";
  } else {
    m.reasoning = "No persona reached " + std::to_string(kOfflineMatchPoints) + " rubric points.";
  }
  m.analysis_notes.issue_type = issue_type_of(issue, text);
  switch (issue_level(text)) {
    case Level::kBeginner: m.analysis_notes.technical_level = TechnicalLevel::kBeginner; break;
    case Level::kIntermediate: m.analysis_notes.technical_level = TechnicalLevel::kIntermediate; break;
    case Level::kAdvanced: m.analysis_notes.technical_level = TechnicalLevel::kAdvanced; break;
  }
  m.analysis_notes.urgency_indicators = urgency_indicators(text);
  return m;
}

}  // namespace personaflow
