#include "personaflow/corpus_builder.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include "personaflow/errors.hpp"
#include "personaflow/stage_parse.hpp"

namespace personaflow {

namespace {

bool looks_like_html(const HttpResponse& r) {
  if (r.header("content-type").find("html") != std::string::npos) return true;
  const auto first = r.body.find_first_not_of(" \t\r\n");
  return first != std::string::npos && r.body[first] == '<';
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

ResourceDocument from_link(const LinkPlan::Link& link, std::string content) {
  ResourceDocument doc;
  doc.source_kind = link.kind;
  doc.locator = link.locator;
  doc.expected_content = link.expected_content;
  doc.user_relevance = link.user_relevance;
  doc.priority = link.priority;
  doc.content_text = std::move(content);
  doc.fetched_at = now_utc();
  return doc;
}

}  // namespace

std::vector<LinkPlan::Link> select_links(const LinkPlan& plan, std::size_t max_links) {
  std::vector<LinkPlan::Link> all = plan.internal;
  all.insert(all.end(), plan.external.begin(), plan.external.end());
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.priority > b.priority; });
  if (all.size() > max_links) all.resize(max_links);
  return all;
}

void apply_caps(ResourceCorpus& corpus, const CorpusLimits& limits) {
  std::vector<ResourceDocument> kept;
  std::int64_t used = 0;
  for (auto& doc : corpus.documents) {
    const auto remaining = limits.total_chars - used;
    if (remaining <= 0) {
      corpus.truncated = true;
      corpus.warnings.push_back("dropped " + doc.locator + ": corpus character cap reached");
      continue;
    }
    auto chars = count_chars(doc.content_text);
    const auto allowed = std::min(limits.per_document_chars, remaining);
    if (chars > allowed) {
      doc.content_text = truncate_chars(doc.content_text, allowed);
      chars = allowed;
      corpus.truncated = true;
    }
    used += chars;
    kept.push_back(std::move(doc));
  }
  corpus.documents = std::move(kept);
  corpus.total_chars = used;
}

CorpusBuilder::CorpusBuilder(std::shared_ptr<RepoConnector> connector, std::shared_ptr<HttpTransport> web,
                             CorpusLimits limits)
    : connector_(std::move(connector)), web_(std::move(web)), limits_(std::move(limits)) {}

LinkPlan CorpusBuilder::discover_links(LlmClient& llm, const ResourceDocument& readme, const RepositoryRef& ref,
                                       const std::string& job_id) {
  if (readme.source_kind != SourceKind::kReadme) {
    throw Error(ErrorCode::kInvalidArgument, "link discovery needs the README document");
  }
  const auto bundle =
      render_prompt(Stage::kLinkDiscovery, {{"owner_repo", ref.full_name()}, {"readme_text", readme.content_text}});
  return llm.complete_parsed(bundle, job_id, [](const std::string& raw) { return parse_link_plan(raw); });
}

std::string CorpusBuilder::fetch_external(const std::string& url) {
  if (!parse_url(url)) throw Error(ErrorCode::kMalformedUrl, "not an absolute http(s) URL: " + url);
  HttpRequest request;
  request.url = url;
  request.timeout = limits_.fetch_timeout;
  request.headers["User-Agent"] = limits_.user_agent;
  request.headers["Accept"] = "text/html,text/plain;q=0.9,*/*;q=0.5";
  const auto response = web_->send(request);
  if (response.status != 200) {
    throw Error(ErrorCode::kIo, url + " returned HTTP " + std::to_string(response.status));
  }
  return looks_like_html(response) ? html_to_text(response.body) : response.body;
}

ResourceDocument CorpusBuilder::fetch_user_url(const std::string& url) {
  ResourceDocument doc;
  doc.source_kind = SourceKind::kUserProvided;
  doc.locator = url;
  doc.expected_content = "documentation supplied by the user";
  doc.user_relevance = "context the user asked to include";
  doc.priority = 5;
  doc.content_text = fetch_external(url);
  doc.fetched_at = now_utc();
  return doc;
}

ResourceCorpus CorpusBuilder::build(const RepositoryRef& ref, const std::optional<ResourceDocument>& readme,
                                    const LinkPlan& plan, const std::vector<ResourceDocument>& user_docs) {
  ResourceCorpus corpus;
  corpus.repo = ref;
  if (readme) corpus.documents.push_back(*readme);
  corpus.documents.insert(corpus.documents.end(), user_docs.begin(), user_docs.end());

  const auto links = select_links(plan, limits_.max_links);
  std::vector<std::optional<ResourceDocument>> fetched(links.size());
  std::vector<std::string> failures(links.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < links.size(); i = next++) {
      const auto& link = links[i];
      try {
        if (link.kind == SourceKind::kInternalLink) {
          auto path = link.locator.substr(0, link.locator.find('#'));
          auto body = connector_->fetch_file(ref, path);
          if (!body) {
            failures[i] = "internal link " + link.locator + " not found";
            continue;
          }
          if (ends_with(path, ".html") || ends_with(path, ".htm")) *body = html_to_text(*body);
          fetched[i] = from_link(link, std::move(*body));
        } else {
          fetched[i] = from_link(link, fetch_external(link.locator));
        }
      } catch (const std::exception& e) {
        failures[i] = "link " + link.locator + " skipped: " + e.what();
      }
    }
  };
  const auto threads = std::min<std::size_t>(links.size(), static_cast<std::size_t>(std::max(1, limits_.fetch_concurrency)));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < links.size(); ++i) {
    if (fetched[i]) corpus.documents.push_back(std::move(*fetched[i]));
    if (!failures[i].empty()) corpus.warnings.push_back(failures[i]);
  }
  apply_caps(corpus, limits_);
  if (std::all_of(corpus.documents.begin(), corpus.documents.end(),
                  [](const auto& d) { return blank(d.content_text); })) {
    throw Error(ErrorCode::kEmptyCorpus, "nothing to analyze for " + ref.full_name());
  }
  return corpus;
}

}  // namespace personaflow
