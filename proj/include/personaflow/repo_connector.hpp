#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "personaflow/http.hpp"
#include "personaflow/model.hpp"

namespace personaflow {

struct ConnectorConfig {
  std::string api_base = "https://api.github.com";
  std::string raw_base = "https://raw.githubusercontent.com";
  std::string token;  // optional bearer token
  std::string user_agent = "personaflow/1.0";
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::milliseconds timeout{10000};
};

struct RepoCoordinates {
  std::string host;
  std::string owner;
  std::string name;
};

/// "https://github.com/owner/name[.git][/...]" -> coordinates. Throws kMalformedUrl.
RepoCoordinates parse_repo_url(std::string_view url);

/// Read-only client for repository metadata, README and issues.
class RepoConnector {
 public:
  RepoConnector(std::shared_ptr<HttpTransport> transport, ConnectorConfig config,
                std::shared_ptr<RateBudget> budget = RateBudget::global(), Sleeper sleeper = real_sleeper());

  RepositoryRef fetch_repo(std::string_view url);
  /// Raw README bytes, whatever the markup format. Throws kNoReadme.
  ResourceDocument fetch_readme(const RepositoryRef& ref);
  /// Newest first, at most request.limit. `last_created` anchors all_new mode.
  std::vector<IssueRecord> fetch_issues(const RepositoryRef& ref, const SyncRequest& request,
                                        std::optional<Timestamp> last_created = std::nullopt);
  /// Raw file from the default branch. nullopt on 404.
  std::optional<std::string> fetch_file(const RepositoryRef& ref, std::string_view path);

  const ConnectorConfig& config() const { return config_; }

 private:
  HttpResponse get(const std::string& url, const std::string& accept);
  std::vector<IssueRecord> list_issues(const RepositoryRef& ref, const SyncRequest& request,
                                       const std::function<bool(const IssueRecord&)>& keep,
                                       const std::function<bool(const IssueRecord&)>& stop);

  std::shared_ptr<HttpTransport> transport_;
  ConnectorConfig config_;
  std::shared_ptr<RateBudget> budget_;
  Sleeper sleeper_;
};

/// Maps one issue object of the REST listing onto IssueRecord.
IssueRecord issue_from_rest(const Json& j, Timestamp synced_at);

}  // namespace personaflow
