#include "personaflow/api.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "personaflow/errors.hpp"
#include "personaflow/http.hpp"
#include "personaflow/mapping_engine.hpp"

namespace personaflow {

namespace {

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    const auto end = path.find('/', i);
    const auto seg = path.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i);
    out.push_back(url_decode(seg));
    if (end == std::string_view::npos) break;
    i = end + 1;
  }
  return out;
}

std::int64_t parse_number(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const auto n = std::stoll(text, &used);
    if (used == text.size()) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be an integer: " + text);
}

bool truthy(const std::map<std::string, std::string>& q, const std::string& key) {
  auto it = q.find(key);
  return it != q.end() && (it->second.empty() || it->second == "1" || it->second == "true");
}

std::optional<std::int64_t> expected_version(const Json& body, const std::map<std::string, std::string>& headers) {
  if (body.is_object() && body.contains("version") && !body.at("version").is_null()) {
    return body.at("version").get<std::int64_t>();
  }
  for (const auto& [k, v] : headers) {
    std::string key = k;
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    if (key != "if-match") continue;
    std::string tag = v;
    tag.erase(std::remove(tag.begin(), tag.end(), '"'), tag.end());
    return parse_number(tag, "If-Match");
  }
  return std::nullopt;
}

int percent_of(double confidence) { return static_cast<int>(std::lround(confidence * 100.0)); }

std::set<std::string> active_ids(const RepoSnapshot& snap) {
  std::set<std::string> out;
  for (const auto& p : snap.personas) {
    if (!p.archived) out.insert(p.id);
  }
  return out;
}

const Persona* find_persona(const RepoSnapshot& snap, const std::string& id) {
  for (const auto& p : snap.personas) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

Json association_view(const RepoSnapshot& snap, const Association& a) {
  Json j = a;
  const auto* p = find_persona(snap, a.persona_id);
  j["persona_name"] = p ? p->name : "";
  j["percent"] = percent_of(a.relevance_score);
  j["band"] = to_string(band_of(a.relevance_score));
  return j;
}

ConfidenceBand issue_band(const IssuePersonaMapping* m, const std::set<std::string>& active) {
  if (!m || !has_visible(*m, active)) return ConfidenceBand::kUnmatched;
  return band_of(m->confidence);
}

Json issue_summary(const RepoSnapshot& snap, const IssueRecord& issue, const IssuePersonaMapping* m,
                   const std::set<std::string>& active) {
  Json j{{"number", issue.number},
         {"title", issue.title},
         {"state", to_string(issue.state)},
         {"labels", issue.labels},
         {"created_at", format_timestamp(issue.created_at)}};
  Json badges = Json::array();
  if (m) {
    std::vector<const Association*> visible;
    for (const auto& a : m->associations) {
      if (is_visible(a, active)) visible.push_back(&a);
    }
    std::stable_sort(visible.begin(), visible.end(),
                     [](auto* a, auto* b) { return a->relevance_score > b->relevance_score; });
    for (const auto* a : visible) badges.push_back(association_view(snap, *a));
  }
  const bool mapped = !badges.empty();
  j["mapped"] = mapped;
  j["primary_persona_id"] = mapped && m->primary_persona_id ? Json(*m->primary_persona_id) : Json(nullptr);
  j["confidence"] = mapped ? m->confidence : 0.0;
  j["confidence_percent"] = mapped ? percent_of(m->confidence) : 0;
  j["confidence_band"] = to_string(issue_band(m, active));
  j["personas"] = std::move(badges);
  return j;
}

Json job_view(Engine& engine, const std::string& id) {
  Json j = engine.jobs().status(id);
  try {
    Json history = Json::array();
    for (auto s : engine.jobs().stage_history(id)) history.push_back(to_string(s));
    j["stage_history"] = std::move(history);
  } catch (const Error&) {
  }
  j["calls"] = {{"text", engine.ledger().text_calls(id)}, {"image", engine.ledger().image_calls(id)}};
  return j;
}

Json calls_view(Engine& engine, const std::string& id) {
  engine.jobs().status(id);
  Json out = Json::array();
  for (const auto& c : engine.ledger().calls_for(id)) {
    out.push_back({{"stage", to_string(c.stage)},
                   {"image", c.image},
                   {"succeeded", c.succeeded},
                   {"input_tokens", c.tokens.input},
                   {"output_tokens", c.tokens.output},
                   {"latency_ms", c.latency.count()},
                   {"error", c.error}});
  }
  return out;
}

Json submit_view(const SubmitResult& r) { return {{"job_id", r.job_id}, {"repo_id", r.repo_id}}; }

std::vector<std::string> string_list(const Json& body, const char* key) {
  if (!body.contains(key)) return {};
  return body.at(key).get<std::vector<std::string>>();
}

}  // namespace

Json error_body(ErrorCode code, std::string_view message) {
  return {{"error", {{"code", to_string(code)}, {"message", message}}}};
}

Json persona_view(const Versioned<Persona>& p) {
  Json j = p.value;
  j["version"] = p.version;
  return j;
}

Json issue_list_view(const RepoSnapshot& snap, std::string_view view, const std::map<std::string, std::string>& filters) {
  std::optional<IssueState> state;
  std::optional<ConfidenceBand> band;
  std::optional<std::string> persona;
  if (auto it = filters.find("state"); it != filters.end() && !it->second.empty() && it->second != "all") {
    state = parse_enum<IssueState>(it->second);
    if (!state) throw Error(ErrorCode::kInvalidArgument, "state must be open, closed or all");
  }
  if (auto it = filters.find("confidence_band"); it != filters.end() && !it->second.empty()) {
    band = parse_enum<ConfidenceBand>(it->second);
    if (!band) throw Error(ErrorCode::kInvalidArgument, "confidence_band must be high, medium, low or unmatched");
  }
  if (auto it = filters.find("persona_id"); it != filters.end() && !it->second.empty()) persona = it->second;
  const auto active = active_ids(snap);
  if (persona && !active.count(*persona)) throw Error(ErrorCode::kUnknownPersona, "unknown persona " + *persona);

  std::vector<Json> rows;
  for (const auto& issue : snap.issues) {
    const IssuePersonaMapping* m = nullptr;
    if (auto it = snap.mappings.find(issue.number); it != snap.mappings.end()) m = &it->second;
    if (state && issue.state != *state) continue;
    if (band && issue_band(m, active) != *band) continue;
    auto row = issue_summary(snap, issue, m, active);
    if (persona) {
      const auto& badges = row.at("personas");
      const bool hit = std::any_of(badges.begin(), badges.end(),
                                   [&](const Json& b) { return b.at("persona_id") == *persona; });
      if (!hit) continue;
    }
    rows.push_back(std::move(row));
  }

  if (view.empty() || view == "github") return {{"view", "github"}, {"count", rows.size()}, {"issues", rows}};
  if (view != "persona") throw Error(ErrorCode::kInvalidArgument, "view must be github or persona");

  Json groups = Json::array();
  for (const auto& p : snap.personas) {
    if (p.archived || (persona && p.id != *persona)) continue;
    std::vector<std::pair<double, Json>> members;
    for (const auto& row : rows) {
      for (const auto& b : row.at("personas")) {
        if (b.at("persona_id") != p.id) continue;
        Json item = row;
        item["relevance_score"] = b.at("relevance_score");
        item["percent"] = b.at("percent");
        item["band"] = b.at("band");
        item["origin"] = b.at("origin");
        item["rationale"] = b.at("rationale");
        members.emplace_back(b.at("relevance_score").get<double>(), std::move(item));
      }
    }
    std::stable_sort(members.begin(), members.end(), [](auto& a, auto& b) { return a.first > b.first; });
    Json issues = Json::array();
    for (auto& [score, item] : members) issues.push_back(std::move(item));
    groups.push_back({{"persona", {{"id", p.id}, {"name", p.name}, {"occupation", p.occupation}, {"avatar", p.avatar}}},
                      {"count", issues.size()},
                      {"issues", std::move(issues)}});
  }
  Json unassigned = Json::array();
  for (const auto& row : rows) {
    if (!row.at("mapped").get<bool>()) unassigned.push_back(row);
  }
  return {{"view", "persona"}, {"groups", std::move(groups)}, {"unassigned", std::move(unassigned)}};
}

Json issue_detail_view(const RepoSnapshot& snap, std::int64_t number, std::int64_t mapping_version) {
  const auto it = std::find_if(snap.issues.begin(), snap.issues.end(), [&](auto& i) { return i.number == number; });
  if (it == snap.issues.end()) throw Error(ErrorCode::kNotFound, "issue #" + std::to_string(number) + " is not synced");
  const auto active = active_ids(snap);
  const IssuePersonaMapping* m = nullptr;
  if (auto mit = snap.mappings.find(number); mit != snap.mappings.end()) m = &mit->second;
  Json j = issue_summary(snap, *it, m, active);
  j["issue"] = *it;
  if (m) {
    Json mapping = *m;
    Json visible = Json::array();
    for (const auto& a : m->associations) {
      if (is_visible(a, active)) visible.push_back(association_view(snap, a));
    }
    mapping["associations"] = std::move(visible);
    j["mapping"] = std::move(mapping);
  } else {
    j["mapping"] = nullptr;
  }
  j["mapping_version"] = mapping_version;
  return j;
}

ApiResponse Api::handle(std::string_view method, std::string_view target, std::string_view body,
                        const std::map<std::string, std::string>& headers) {
  try {
    const auto qpos = target.find('?');
    const auto path = split_path(target.substr(0, qpos));
    const auto query = qpos == std::string_view::npos ? std::map<std::string, std::string>{}
                                                      : parse_query(target.substr(qpos + 1));
    Json parsed = Json::object();
    if (body.find_first_not_of(" \t\r\n") != std::string_view::npos) {
      parsed = Json::parse(body.begin(), body.end(), nullptr, false);
      if (parsed.is_discarded()) throw Error(ErrorCode::kInvalidArgument, "request body is not valid JSON");
    }
    return dispatch(std::string(method), path, query, parsed, headers);
  } catch (const Error& e) {
    return {http_status_for(e.code()), error_body(e.code(), e.what())};
  } catch (const Json::exception& e) {
    return {400, error_body(ErrorCode::kInvalidArgument, e.what())};
  } catch (const std::exception& e) {
    return {500, error_body(ErrorCode::kInternal, e.what())};
  }
}

ApiResponse Api::dispatch(const std::string& method, const std::vector<std::string>& path,
                          const std::map<std::string, std::string>& query, const Json& body,
                          const std::map<std::string, std::string>& headers) {
  Engine& e = *engine_;
  const auto n = path.size();
  const auto is = [&](std::size_t i, std::string_view s) { return i < n && path[i] == s; };
  const auto not_allowed = [&]() -> ApiResponse {
    return {405, error_body(ErrorCode::kInvalidArgument, method + " is not supported on this resource")};
  };
  if (!body.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");

  if (n == 1 && is(0, "health")) return {200, {{"status", "ok"}}};

  if (is(0, "jobs") && n >= 2) {
    if (method != "GET") return not_allowed();
    if (n == 2) return {200, job_view(e, path[1])};
    if (n == 3 && is(2, "calls")) return {200, calls_view(e, path[1])};
  }

  if (is(0, "personas")) {
    if (n == 2 && path[1] == "merge") {
      if (method != "POST") return not_allowed();
      std::optional<std::string> guidance;
      if (body.contains("guidance") && !body.at("guidance").is_null()) guidance = body.at("guidance").get<std::string>();
      const auto merged = e.merge_personas(string_list(body, "ids"), guidance);
      return {201, persona_view(e.persona(merged.id))};
    }
    if (n == 2) {
      const auto& id = path[1];
      if (method == "GET") return {200, persona_view(e.persona(id))};
      if (method == "PUT" || method == "PATCH") {
        Json patch = body;
        const auto version = expected_version(body, headers);
        patch.erase("version");
        return {200, persona_view(e.edit_persona(id, patch, version))};
      }
      if (method == "DELETE") {
        e.archive_persona(id);
        return {200, persona_view(e.persona(id))};
      }
      return not_allowed();
    }
  }

  if (is(0, "repos")) {
    if (n == 1) {
      if (method == "GET") {
        Json out = Json::array();
        for (const auto& r : e.store().list_repos()) {
          Json j = r;
          j["id"] = r.id();
          out.push_back(std::move(j));
        }
        return {200, out};
      }
      if (method == "POST") {
        AnalyzeRequest r;
        r.url = body.at("url").get<std::string>();
        r.persona_count = body.value("persona_count", 4);
        r.external_urls = string_list(body, "external_urls");
        r.additional_context = body.value("additional_context", std::string());
        return {202, submit_view(e.submit_analysis(r))};
      }
      return not_allowed();
    }
    const auto& repo_id = path[1];
    if (n == 2) {
      if (method != "GET") return not_allowed();
      Json j = e.repo(repo_id);
      j["id"] = repo_id;
      return {200, j};
    }
    if (n == 3 && (is(2, "corpus") || is(2, "analysis"))) {
      if (method != "GET") return not_allowed();
      e.repo(repo_id);
      if (is(2, "corpus")) {
        auto corpus = e.store().get_artifact(repo_id, "corpus");
        if (!corpus) throw Error(ErrorCode::kNotFound, repo_id + " has no corpus yet");
        return {200, *corpus};
      }
      Json j = Json::object();
      for (const char* name : {"user_insights", "domain_analysis", "link_plan", "settings"}) {
        auto a = e.store().get_artifact(repo_id, name);
        j[name] = a ? *a : Json(nullptr);
      }
      return {200, j};
    }
    if (n == 3 && is(2, "analytics")) {
      if (method != "GET") return not_allowed();
      return {200, e.analytics(repo_id)};
    }
    if (n == 3 && is(2, "save")) {
      if (method != "POST") return not_allowed();
      return {202, submit_view(e.submit_sync(repo_id, SyncRequest{}))};
    }
    if (is(2, "personas")) {
      if (n == 3) {
        if (method == "GET") {
          Json out = Json::array();
          for (const auto& p : e.personas(repo_id, truthy(query, "include_archived"))) {
            out.push_back(persona_view(e.persona(p.id)));
          }
          return {200, out};
        }
        if (method == "POST") {
          const auto p = e.create_persona(repo_id, body);
          return {201, persona_view(e.persona(p.id))};
        }
        return not_allowed();
      }
      if (n == 4 && is(3, "generate")) {
        if (method != "POST") return not_allowed();
        return {202, submit_view(e.submit_more_personas(repo_id, body.value("count", 1)))};
      }
      if (n == 4 && is(3, "regenerate")) {
        if (method != "POST") return not_allowed();
        std::optional<int> count;
        if (body.contains("count") && !body.at("count").is_null()) count = body.at("count").get<int>();
        return {202, submit_view(e.submit_regenerate(repo_id, count))};
      }
    }
    if (is(2, "issues")) {
      if (n == 3) {
        if (method != "GET") return not_allowed();
        const auto view = query.count("view") ? query.at("view") : std::string("github");
        return {200, issue_list_view(e.snapshot(repo_id), view, query)};
      }
      if (n == 4 && is(3, "sync")) {
        if (method != "POST") return not_allowed();
        Json request = body;
        const bool force = request.value("force_remap_ai", false);
        request.erase("force_remap_ai");
        return {202, submit_view(e.submit_sync(repo_id, request.get<SyncRequest>(), force))};
      }
      if (n == 4 && is(3, "map")) {
        if (method != "POST") return not_allowed();
        return {202, submit_view(e.submit_mapping(repo_id, body.value("force_remap_ai", false)))};
      }
      const auto number = parse_number(path[3], "issue number");
      if (n == 4) {
        if (method != "GET") return not_allowed();
        e.issue(repo_id, number);
        const auto m = e.store().get_mapping(repo_id, number);
        return {200, issue_detail_view(e.snapshot(repo_id), number, m ? m->version : 0)};
      }
      if (n == 5 && is(4, "associations")) {
        if (method != "PUT" && method != "POST") return not_allowed();
        const auto updated = e.override_associations(repo_id, number, string_list(body, "add"),
                                                     string_list(body, "remove"), expected_version(body, headers));
        return {200, issue_detail_view(e.snapshot(repo_id), number, updated.version)};
      }
    }
  }
  throw Error(ErrorCode::kNotFound, "no route for " + method + " /" + [&] {
    std::string joined;
    for (const auto& s : path) joined += (joined.empty() ? "" : "/") + s;
    return joined;
  }());
}

}  // namespace personaflow
