#include "personaflow/repo_connector.hpp"

#include <algorithm>
#include <cmath>

#include "personaflow/errors.hpp"

namespace personaflow {

namespace {

bool valid_segment(std::string_view s) {
  if (s.empty() || s == "." || s == "..") return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

std::string trim_slashes(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

}  // namespace

RepoCoordinates parse_repo_url(std::string_view text) {
  const auto url = parse_url(text);
  if (!url) throw Error(ErrorCode::kMalformedUrl, "not a repository URL: " + std::string(text));
  std::string path = url->path.substr(0, url->path.find('?'));
  std::vector<std::string> segments;
  std::size_t start = 1;
  while (start < path.size()) {
    const auto slash = path.find('/', start);
    const auto seg = path.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
    if (!seg.empty()) segments.push_back(seg);
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  if (segments.size() < 2) {
    throw Error(ErrorCode::kMalformedUrl, "repository URL needs /owner/name: " + std::string(text));
  }
  RepoCoordinates c{url->host, segments[0], segments[1]};
  if (c.name.size() > 4 && c.name.substr(c.name.size() - 4) == ".git") c.name.resize(c.name.size() - 4);
  if (!valid_segment(c.owner) || !valid_segment(c.name)) {
    throw Error(ErrorCode::kMalformedUrl, "invalid owner or repository name in " + std::string(text));
  }
  return c;
}

IssueRecord issue_from_rest(const Json& j, Timestamp synced_at) {
  IssueRecord r;
  r.number = j.at("number").get<std::int64_t>();
  r.title = sanitize_utf8(j.value("title", ""));
  r.body = j.contains("body") && j.at("body").is_string() ? sanitize_utf8(j.at("body").get<std::string>()) : "";
  for (const auto& l : j.value("labels", Json::array())) {
    r.labels.push_back(l.is_string() ? l.get<std::string>() : l.value("name", ""));
  }
  r.state = j.value("state", "open") == "closed" ? IssueState::kClosed : IssueState::kOpen;
  r.created_at = parse_timestamp(j.value("created_at", "")).value_or(Timestamp{});
  r.updated_at = parse_timestamp(j.value("updated_at", "")).value_or(r.created_at);
  r.synced_at = synced_at;
  return r;
}

RepoConnector::RepoConnector(std::shared_ptr<HttpTransport> transport, ConnectorConfig config,
                             std::shared_ptr<RateBudget> budget, Sleeper sleeper)
    : transport_(std::move(transport)),
      config_(std::move(config)),
      budget_(std::move(budget)),
      sleeper_(std::move(sleeper)) {
  config_.api_base = trim_slashes(config_.api_base);
  config_.raw_base = trim_slashes(config_.raw_base);
}

HttpResponse RepoConnector::get(const std::string& url, const std::string& accept) {
  HttpRequest request;
  request.url = url;
  request.timeout = config_.timeout;
  request.headers["User-Agent"] = config_.user_agent;
  request.headers["Accept"] = accept;
  if (!config_.token.empty()) request.headers["Authorization"] = "Bearer " + config_.token;

  for (int attempt = 0;; ++attempt) {
    if (budget_) budget_->acquire();
    HttpResponse response = transport_->send(request);
    const bool limited = response.status == 429 ||
                         (response.status == 403 && response.header("x-ratelimit-remaining") == "0");
    if (!limited) return response;

    std::chrono::seconds retry_after{0};
    if (const auto h = response.header("retry-after"); !h.empty()) {
      try {
        retry_after = std::chrono::seconds{std::stol(h)};
      } catch (const std::exception&) {
      }
    }
    if (attempt >= config_.max_retries) {
      throw RateLimitedError("rate limited by host after " + std::to_string(attempt) + " retries", retry_after);
    }
    const auto backoff = config_.backoff_base * (1LL << attempt);
    sleeper_(retry_after.count() > 0 ? std::chrono::duration_cast<std::chrono::milliseconds>(retry_after)
                                     : std::chrono::duration_cast<std::chrono::milliseconds>(backoff));
  }
}

RepositoryRef RepoConnector::fetch_repo(std::string_view url) {
  const auto coords = parse_repo_url(url);
  const auto response = get(config_.api_base + "/repos/" + coords.owner + "/" + coords.name,
                            "application/vnd.github+json");
  if (response.status == 404) throw Error(ErrorCode::kNotFound, "repository not found: " + std::string(url));
  if (response.status != 200) {
    throw Error(ErrorCode::kIo, "repository metadata request failed with HTTP " + std::to_string(response.status));
  }
  Json j;
  try {
    j = Json::parse(response.body);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("repository metadata is not JSON: ") + e.what());
  }
  RepositoryRef ref;
  ref.host = coords.host;
  ref.owner = j.contains("owner") && j.at("owner").is_object() ? j.at("owner").value("login", coords.owner)
                                                                : coords.owner;
  ref.name = j.value("name", coords.name);
  ref.stars = j.value("stargazers_count", std::int64_t{0});
  ref.forks = j.value("forks_count", std::int64_t{0});
  ref.open_issue_count = j.value("open_issues_count", std::int64_t{0});
  ref.default_branch = j.value("default_branch", std::string("main"));
  return ref;
}

ResourceDocument RepoConnector::fetch_readme(const RepositoryRef& ref) {
  const auto response =
      get(config_.api_base + "/repos/" + ref.owner + "/" + ref.name + "/readme", "application/vnd.github.raw");
  if (response.status == 404) throw Error(ErrorCode::kNoReadme, ref.full_name() + " has no README");
  if (response.status != 200) {
    throw Error(ErrorCode::kIo, "README request failed with HTTP " + std::to_string(response.status));
  }
  ResourceDocument doc;
  doc.source_kind = SourceKind::kReadme;
  doc.locator = "README";
  doc.expected_content = "repository README";
  doc.user_relevance = "primary description of the project";
  doc.priority = 5;
  doc.content_text = response.body;
  doc.fetched_at = now_utc();
  return doc;
}

std::optional<std::string> RepoConnector::fetch_file(const RepositoryRef& ref, std::string_view path) {
  std::string rel(path);
  while (!rel.empty() && (rel.front() == '/' || rel.substr(0, 2) == "./")) rel.erase(0, rel.front() == '/' ? 1 : 2);
  std::string encoded;
  for (std::size_t start = 0; start <= rel.size();) {
    const auto slash = rel.find('/', start);
    encoded += (start ? "/" : "") + url_encode(rel.substr(start, slash - start));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  const auto response =
      get(config_.raw_base + "/" + ref.owner + "/" + ref.name + "/" + ref.default_branch + "/" + encoded, "*/*");
  if (response.status == 404) return std::nullopt;
  if (response.status != 200) {
    throw Error(ErrorCode::kIo, "file request failed with HTTP " + std::to_string(response.status));
  }
  return response.body;
}

std::vector<IssueRecord> RepoConnector::list_issues(const RepositoryRef& ref, const SyncRequest& request,
                                                    const std::function<bool(const IssueRecord&)>& keep,
                                                    const std::function<bool(const IssueRecord&)>& stop) {
  std::vector<IssueRecord> out;
  const auto synced = now_utc();
  const int per_page = static_cast<int>(std::clamp<std::int64_t>(request.limit, 1, 100));
  std::string labels;
  for (const auto& l : request.labels) labels += (labels.empty() ? "" : ",") + l;

  for (int page = 1;; ++page) {
    std::string url = config_.api_base + "/repos/" + ref.owner + "/" + ref.name +
                      "/issues?state=" + std::string(to_string(request.state)) +
                      "&sort=created&direction=desc&per_page=" + std::to_string(per_page) +
                      "&page=" + std::to_string(page);
    if (!labels.empty()) url += "&labels=" + url_encode(labels);
    const auto response = get(url, "application/vnd.github+json");
    if (response.status == 404) throw Error(ErrorCode::kNotFound, "repository not found: " + ref.full_name());
    if (response.status != 200) {
      throw Error(ErrorCode::kIo, "issue listing failed with HTTP " + std::to_string(response.status));
    }
    Json items;
    try {
      items = Json::parse(response.body);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kIo, std::string("issue listing is not JSON: ") + e.what());
    }
    if (!items.is_array()) throw Error(ErrorCode::kIo, "issue listing is not an array");
    for (const auto& item : items) {
      if (item.contains("pull_request")) continue;
      auto issue = issue_from_rest(item, synced);
      if (stop(issue)) return out;
      if (!keep(issue)) continue;
      out.push_back(std::move(issue));
      if (static_cast<std::int64_t>(out.size()) >= request.limit) return out;
    }
    if (static_cast<int>(items.size()) < per_page) return out;
  }
}

std::vector<IssueRecord> RepoConnector::fetch_issues(const RepositoryRef& ref, const SyncRequest& request,
                                                     std::optional<Timestamp> last_created) {
  validate_sync_request(request);
  switch (request.mode) {
    case SyncMode::kByIds: {
      std::vector<IssueRecord> out;
      const auto synced = now_utc();
      for (const auto number : request.ids) {
        const auto response = get(config_.api_base + "/repos/" + ref.owner + "/" + ref.name + "/issues/" +
                                      std::to_string(number),
                                  "application/vnd.github+json");
        if (response.status == 404) continue;
        if (response.status != 200) {
          throw Error(ErrorCode::kIo, "issue request failed with HTTP " + std::to_string(response.status));
        }
        const auto item = Json::parse(response.body);
        if (item.contains("pull_request")) continue;
        out.push_back(issue_from_rest(item, synced));
      }
      std::stable_sort(out.begin(), out.end(),
                       [](const IssueRecord& a, const IssueRecord& b) { return a.created_at > b.created_at; });
      if (static_cast<std::int64_t>(out.size()) > request.limit) out.resize(static_cast<std::size_t>(request.limit));
      return out;
    }
    case SyncMode::kAllNew:
      return list_issues(
          ref, request, [](const IssueRecord&) { return true; },
          [&](const IssueRecord& i) { return last_created && i.created_at <= *last_created; });
    case SyncMode::kByLabels:
      return list_issues(
          ref, request, [](const IssueRecord&) { return true; }, [](const IssueRecord&) { return false; });
    case SyncMode::kByDateRange:
      return list_issues(
          ref, request,
          [&](const IssueRecord& i) { return !request.until || i.created_at <= *request.until; },
          [&](const IssueRecord& i) { return request.since && i.created_at < *request.since; });
  }
  return {};
}

}  // namespace personaflow
