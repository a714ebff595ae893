#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "personaflow/http.hpp"
#include "personaflow/model.hpp"
#include "personaflow/providers.hpp"
#include "personaflow/repo_connector.hpp"

namespace personaflow {

/// Visible text of an HTML page: drops scripts, styles and navigation
/// chrome, then keeps blocks whose text outweighs their markup.
std::string html_to_text(std::string_view html);

/// Number of Unicode code points in UTF-8 text (bytes that start a sequence).
std::int64_t count_chars(std::string_view text);
/// Longest prefix holding at most `max_chars` code points.
std::string truncate_chars(std::string_view text, std::int64_t max_chars);

struct CorpusLimits {
  std::int64_t per_document_chars = 40000;
  std::int64_t total_chars = 150000;
  std::size_t max_links = 5;
  int fetch_concurrency = 4;
  std::chrono::milliseconds fetch_timeout{10000};
  std::string user_agent = "personaflow-crawler/1.0 (+repository persona analysis)";
};

/// The links fetched from a plan: internal and external together, highest
/// priority first, ties kept in plan order (internal list before external).
std::vector<LinkPlan::Link> select_links(const LinkPlan& plan, std::size_t max_links);

class CorpusBuilder {
 public:
  CorpusBuilder(std::shared_ptr<RepoConnector> connector, std::shared_ptr<HttpTransport> web,
                CorpusLimits limits = {});

  /// One link_discovery completion over the README.
  LinkPlan discover_links(LlmClient& llm, const ResourceDocument& readme, const RepositoryRef& ref,
                          const std::string& job_id);

  /// Fetches a user-supplied URL as a user_provided document. Throws kIo on failure.
  ResourceDocument fetch_user_url(const std::string& url);

  /// Orders readme, user documents, then selected plan links; applies the caps.
  /// Failed link fetches become warnings. Throws kEmptyCorpus when nothing is left.
  ResourceCorpus build(const RepositoryRef& ref, const std::optional<ResourceDocument>& readme, const LinkPlan& plan,
                       const std::vector<ResourceDocument>& user_docs);

  const CorpusLimits& limits() const { return limits_; }

 private:
  std::string fetch_external(const std::string& url);

  std::shared_ptr<RepoConnector> connector_;
  std::shared_ptr<HttpTransport> web_;
  CorpusLimits limits_;
};

/// Caps document contents in order; used by build() and exposed for tests.
void apply_caps(ResourceCorpus& corpus, const CorpusLimits& limits);

}  // namespace personaflow
