#include "personaflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "personaflow/errors.hpp"

namespace personaflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedUrl: return "MalformedUrl";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kNoReadme: return "NoReadme";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingPlaceholder: return "MissingPlaceholder";
    case ErrorCode::kUnknownPersona: return "UnknownPersona";
    case ErrorCode::kFewerThanTwo: return "FewerThanTwo";
    case ErrorCode::kInvalidPatch: return "InvalidPatch";
    case ErrorCode::kInvalidPersona: return "InvalidPersona";
    case ErrorCode::kConflictingRequest: return "ConflictingRequest";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kBusyRepository: return "BusyRepository";
    case ErrorCode::kUnknownJob: return "UnknownJob";
    case ErrorCode::kUnknownRepository: return "UnknownRepository";
    case ErrorCode::kStaleVersion: return "StaleVersion";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Internal";
}

std::optional<ErrorCode> parse_error_code(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kInternal); ++i) {
    if (to_string(static_cast<ErrorCode>(i)) == text) return static_cast<ErrorCode>(i);
  }
  return std::nullopt;
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownPersona:
    case ErrorCode::kUnknownJob:
    case ErrorCode::kUnknownRepository:
      return 404;
    case ErrorCode::kBusyRepository:
    case ErrorCode::kStaleVersion:
    case ErrorCode::kConflictingRequest:
      return 409;
    case ErrorCode::kRateLimited:
      return 429;
    case ErrorCode::kProviderError:
    case ErrorCode::kParseError:
      return 502;
    case ErrorCode::kIo:
    case ErrorCode::kInternal:
      return 500;
    default:
      return 400;
  }
}

// ---------------------------------------------------------------------------
// Time

Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss<milliseconds> tod{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()), static_cast<int>(tod.subseconds().count()));
  return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  auto digits = [&](std::size_t pos, std::size_t n) -> std::optional<int> {
    if (pos + n > text.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  const auto y = digits(0, 4), mo = digits(5, 2), d = digits(8, 2);
  if (!y || !mo || !d || text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  Timestamp result = time_point_cast<milliseconds>(sys_days{ymd});
  if (text.size() == 10) return result;
  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') return std::nullopt;
  const auto h = digits(11, 2), mi = digits(14, 2), s = digits(17, 2);
  if (!h || !mi || !s || text[13] != ':' || text[16] != ':' || *h > 23 || *mi > 59 || *s > 60) {
    return std::nullopt;
  }
  result += hours{*h} + minutes{*mi} + seconds{*s};
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int ms = 0, count = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (count < 3) ms = ms * 10 + (text[pos] - '0');
      ++count;
      ++pos;
    }
    if (count == 0) return std::nullopt;
    for (int i = count; i < 3; ++i) ms *= 10;
    result += milliseconds{ms};
  }
  if (pos == text.size()) return std::nullopt;
  if (text[pos] == 'Z' || text[pos] == 'z') return pos + 1 == text.size() ? std::optional{result} : std::nullopt;
  if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size() && text[pos + 3] == ':') {
    const auto oh = digits(pos + 1, 2), om = digits(pos + 4, 2);
    if (!oh || !om) return std::nullopt;
    const minutes offset = hours{*oh} + minutes{*om};
    return text[pos] == '+' ? result - offset : result + offset;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Enums

std::string_view to_string(ExperienceLevel v) {
  switch (v) {
    case ExperienceLevel::kBeginner: return "beginner";
    case ExperienceLevel::kIntermediate: return "intermediate";
    case ExperienceLevel::kAdvanced: return "advanced";
    case ExperienceLevel::kExpert: return "expert";
  }
  return "";
}
std::string_view to_string(Provenance v) {
  switch (v) {
    case Provenance::kAiGenerated: return "ai_generated";
    case Provenance::kManual: return "manual";
    case Provenance::kMerged: return "merged";
  }
  return "";
}
std::string_view to_string(AvatarKind v) {
  return v == AvatarKind::kGeneratedImage ? "generated_image" : "parameterized_url";
}
std::string_view to_string(SourceKind v) {
  switch (v) {
    case SourceKind::kReadme: return "readme";
    case SourceKind::kInternalLink: return "internal_link";
    case SourceKind::kExternalLink: return "external_link";
    case SourceKind::kUserProvided: return "user_provided";
  }
  return "";
}
std::string_view to_string(IssueState v) { return v == IssueState::kOpen ? "open" : "closed"; }
std::string_view to_string(AssociationOrigin v) {
  return v == AssociationOrigin::kAiSuggested ? "ai_suggested" : "manual";
}
std::string_view to_string(ImpactLevel v) {
  switch (v) {
    case ImpactLevel::kHigh: return "high";
    case ImpactLevel::kMedium: return "medium";
    case ImpactLevel::kLow: return "low";
  }
  return "";
}
std::string_view to_string(IssueType v) {
  switch (v) {
    case IssueType::kBug: return "bug";
    case IssueType::kFeature: return "feature";
    case IssueType::kEnhancement: return "enhancement";
  }
  return "";
}
std::string_view to_string(TechnicalLevel v) {
  switch (v) {
    case TechnicalLevel::kBeginner: return "beginner";
    case TechnicalLevel::kIntermediate: return "intermediate";
    case TechnicalLevel::kAdvanced: return "advanced";
  }
  return "";
}
std::string_view to_string(ConfidenceBand v) {
  switch (v) {
    case ConfidenceBand::kHigh: return "high";
    case ConfidenceBand::kMedium: return "medium";
    case ConfidenceBand::kLow: return "low";
    case ConfidenceBand::kUnmatched: return "unmatched";
  }
  return "";
}
std::string_view to_string(SyncMode v) {
  switch (v) {
    case SyncMode::kAllNew: return "all_new";
    case SyncMode::kByIds: return "by_ids";
    case SyncMode::kByLabels: return "by_labels";
    case SyncMode::kByDateRange: return "by_date_range";
  }
  return "";
}
std::string_view to_string(JobKind v) {
  switch (v) {
    case JobKind::kGeneration: return "generation";
    case JobKind::kMapping: return "mapping";
    case JobKind::kSync: return "sync";
  }
  return "";
}
std::string_view to_string(JobStage v) {
  switch (v) {
    case JobStage::kQueued: return "queued";
    case JobStage::kFetchReadme: return "fetch_readme";
    case JobStage::kExternalDocs: return "external_docs";
    case JobStage::kAnalyzeDomain: return "analyze_domain";
    case JobStage::kGeneratePersonas: return "generate_personas";
    case JobStage::kSyncIssues: return "sync_issues";
    case JobStage::kMapIssues: return "map_issues";
    case JobStage::kDone: return "done";
    case JobStage::kFailed: return "failed";
  }
  return "";
}

bool is_terminal(JobStage stage) { return stage == JobStage::kDone || stage == JobStage::kFailed; }

ConfidenceBand band_of(double confidence) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence out of [0,1]");
  }
  if (confidence >= 0.8) return ConfidenceBand::kHigh;
  if (confidence >= 0.6) return ConfidenceBand::kMedium;
  if (confidence >= 0.4) return ConfidenceBand::kLow;
  return ConfidenceBand::kUnmatched;
}

void validate_sync_request(const SyncRequest& r) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidParams, what); };
  if (r.limit < 1) fail("limit must be >= 1");
  const bool ids = !r.ids.empty(), labels = !r.labels.empty(), dates = r.since || r.until;
  switch (r.mode) {
    case SyncMode::kAllNew:
      if (ids || labels || dates) fail("all_new takes no ids, labels or dates");
      break;
    case SyncMode::kByIds:
      if (!ids) fail("by_ids requires ids");
      if (labels || dates) fail("by_ids takes only ids");
      for (auto n : r.ids)
        if (n <= 0) fail("issue numbers must be positive");
      break;
    case SyncMode::kByLabels:
      if (!labels) fail("by_labels requires labels");
      if (ids || dates) fail("by_labels takes only labels");
      break;
    case SyncMode::kByDateRange:
      if (!dates) fail("by_date_range requires since and/or until");
      if (ids || labels) fail("by_date_range takes only dates");
      if (r.since && r.until && *r.since > *r.until) fail("since is after until");
      break;
  }
}

// ---------------------------------------------------------------------------
// Validation

namespace {
bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}
}  // namespace

std::vector<std::string> validate_persona(const Persona& p) {
  std::vector<std::string> v;
  if (blank(p.name)) v.emplace_back("name is empty");
  if (blank(p.occupation)) v.emplace_back("occupation is empty");
  if (p.age <= 0) {
    v.emplace_back("age must be positive");
  } else if (uses_ai_rules(p) && (p.age < 25 || p.age > 65)) {
    v.emplace_back("age out of [25,65]");
  }
  if (p.goals.empty()) v.emplace_back("goals is empty");
  if (p.pain_points.empty()) v.emplace_back("pain_points is empty");
  if (!(p.confidence_score >= 0.0 && p.confidence_score <= 1.0)) {
    v.emplace_back("confidence_score out of [0,1]");
  }
  std::set<std::string> distinct(p.source_persona_ids.begin(), p.source_persona_ids.end());
  if (p.provenance == Provenance::kMerged) {
    if (distinct.size() < 2 || distinct.size() != p.source_persona_ids.size()) {
      v.emplace_back("merged persona needs >= 2 distinct source ids");
    }
  } else if (!p.source_persona_ids.empty()) {
    v.emplace_back("source_persona_ids set on a non-merged persona");
  }
  return v;
}

std::vector<std::string> validate_mapping(const IssuePersonaMapping& m,
                                          const std::vector<std::string>& known) {
  std::vector<std::string> v;
  if (m.issue_number <= 0) v.emplace_back("issue_number must be positive");
  if (!(m.confidence >= 0.0 && m.confidence <= 1.0)) v.emplace_back("confidence out of [0,1]");
  std::set<std::string> seen;
  for (const auto& a : m.associations) {
    if (!seen.insert(a.persona_id).second) v.emplace_back("duplicate association for " + a.persona_id);
    if (!(a.relevance_score >= 0.0 && a.relevance_score <= 1.0)) {
      v.emplace_back("relevance_score out of [0,1] for " + a.persona_id);
    }
    if (a.origin == AssociationOrigin::kAiSuggested && blank(a.rationale)) {
      v.emplace_back("missing rationale for " + a.persona_id);
    }
    if (!known.empty() && std::find(known.begin(), known.end(), a.persona_id) == known.end()) {
      v.emplace_back("unknown persona " + a.persona_id);
    }
  }
  if (m.primary_persona_id && !seen.count(*m.primary_persona_id)) {
    v.emplace_back("primary_persona_id not among associations");
  }
  return v;
}

std::string sanitize_utf8(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    const auto c = static_cast<unsigned char>(in[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      len = 1;
      cp = c;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    }
    bool ok = len > 0 && i + len <= in.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(in[i + k]);
      if ((cc & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (ok) {
      // reject overlongs, surrogates and out-of-range code points
      static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) ok = false;
    }
    if (ok) {
      out.append(in.substr(i, len));
      i += len;
    } else {
      out.append("\xEF\xBF\xBD");
      ++i;
    }
  }
  return out;
}

std::string dump_json(const Json& j, int indent) {
  return j.dump(indent, ' ', false, Json::error_handler_t::replace);
}

}  // namespace personaflow
