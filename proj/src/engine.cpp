#include "personaflow/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <set>
#include <thread>

#include "personaflow/analytics.hpp"
#include "personaflow/errors.hpp"

namespace personaflow {

namespace {

constexpr const char* kDirectJob = "direct";

std::set<std::string> ids_of(const std::vector<Persona>& personas) {
  std::set<std::string> out;
  for (const auto& p : personas) out.insert(p.id);
  return out;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

Json analyze_params(const AnalyzeRequest& r) {
  return {{"type", "analyze"},
          {"url", r.url},
          {"persona_count", r.persona_count},
          {"external_urls", r.external_urls},
          {"additional_context", r.additional_context}};
}

}  // namespace

EngineConfig engine_config_from_json(const Json& j) {
  EngineConfig c;
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "engine configuration must be a JSON object");
  try {
    c.db_path = j.value("db", c.db_path);
    c.workers = j.value("workers", c.workers);
    c.mapping_concurrency = j.value("mapping_concurrency", c.mapping_concurrency);
    c.provider_concurrency = j.value("provider_concurrency", c.provider_concurrency);
    c.resume_jobs = j.value("resume_jobs", c.resume_jobs);
    if (j.contains("host")) {
      const auto& h = j.at("host");
      const auto kind = h.value("kind", std::string("network"));
      if (kind == "network") {
        c.host = HostKind::kNetwork;
      } else if (kind == "fixture") {
        c.host = HostKind::kFixture;
      } else if (kind == "fixture_server") {
        c.host = HostKind::kFixtureServer;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown host kind " + kind);
      }
      c.fixture_root = h.value("root", std::string());
      c.connector.api_base = h.value("api_base", c.connector.api_base);
      c.connector.raw_base = h.value("raw_base", c.connector.raw_base);
      c.connector.token = h.value("token", c.connector.token);
      c.connector.max_retries = h.value("max_retries", c.connector.max_retries);
    }
    if (j.contains("provider")) {
      const auto& p = j.at("provider");
      const auto kind = p.value("kind", std::string("offline"));
      if (kind == "offline") {
        c.provider = ProviderKind::kOffline;
      } else if (kind == "mock") {
        c.provider = ProviderKind::kMock;
      } else if (kind == "live") {
        c.provider = ProviderKind::kLive;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown provider kind " + kind);
      }
      c.provider_fixtures = p.value("fixtures", std::string());
      c.live.endpoint = p.value("endpoint", c.live.endpoint);
      c.live.model = p.value("model", c.live.model);
      c.live.api_key = p.value("api_key", c.live.api_key);
      c.live.temperature = p.value("temperature", c.live.temperature);
      c.offline_mapping = p.value("offline_mapping", c.offline_mapping);
    }
    if (c.live.api_key.empty()) {
      if (const char* env = std::getenv("PERSONAFLOW_API_KEY")) c.live.api_key = env;
    }
    const auto images = j.value("images", std::string("none"));
    if (images == "none") {
      c.images = ImageProviderKind::kNone;
    } else if (images == "mock") {
      c.images = ImageProviderKind::kMock;
    } else if (images == "failing") {
      c.images = ImageProviderKind::kFailing;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown image provider " + images);
    }
    if (j.contains("prices")) {
      const auto& p = j.at("prices");
      c.prices.input_per_token = p.value("input_per_token", 0.0);
      c.prices.output_per_token = p.value("output_per_token", 0.0);
      c.prices.per_image = p.value("per_image", 0.0);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad engine configuration: ") + e.what());
  }
  return c;
}

Engine::Engine(EngineConfig config, EngineOverrides overrides) : config_(std::move(config)) {
  store_ = std::make_shared<Store>(config_.db_path);

  auto hosting = overrides.hosting;
  auto web = overrides.web;
  auto connector_config = config_.connector;
  if (!hosting) {
    switch (config_.host) {
      case HostKind::kNetwork:
        hosting = std::make_shared<NetworkTransport>();
        break;
      case HostKind::kFixture:
        fixture_host_ = std::make_shared<FixtureHost>(config_.fixture_root, connector_config.api_base,
                                                      connector_config.raw_base);
        hosting = std::make_shared<FixtureTransport>(fixture_host_);
        break;
      case HostKind::kFixtureServer:
        fixture_host_ = std::make_shared<FixtureHost>(config_.fixture_root);
        fixture_server_ = std::make_unique<FixtureServer>(fixture_host_);
        connector_config.api_base = fixture_server_->api_base();
        connector_config.raw_base = fixture_server_->raw_base();
        hosting = std::make_shared<ExternalProxyTransport>(std::make_shared<NetworkTransport>(),
                                                           fixture_server_->base_url());
        break;
    }
  }
  if (!web) web = config_.host == HostKind::kNetwork && !overrides.hosting ? std::make_shared<NetworkTransport>() : hosting;

  connector_ = std::make_shared<RepoConnector>(hosting, connector_config,
                                               overrides.budget ? overrides.budget : RateBudget::global(),
                                               overrides.sleeper ? overrides.sleeper : real_sleeper());
  corpus_ = std::make_shared<CorpusBuilder>(connector_, web, config_.corpus);

  auto text = overrides.text;
  if (!text) {
    switch (config_.provider) {
      case ProviderKind::kOffline: break;
      case ProviderKind::kMock: text = std::make_shared<MockTextProvider>(config_.provider_fixtures); break;
      case ProviderKind::kLive:
        text = std::make_shared<ChatCompletionsProvider>(std::make_shared<NetworkTransport>(), config_.live);
        break;
    }
  }
  auto image = overrides.image;
  if (!image) {
    switch (config_.images) {
      case ImageProviderKind::kNone: break;
      case ImageProviderKind::kMock: image = std::make_shared<MockImageProvider>(); break;
      case ImageProviderKind::kFailing: image = std::make_shared<FailingImageProvider>(); break;
    }
  }
  ledger_ = std::make_shared<CallLedger>();
  llm_ = std::make_shared<LlmClient>(text, image, ledger_, RetryPolicy{}, config_.provider_concurrency);
  personas_ = std::make_unique<PersonaEngine>(llm_, image ? AvatarMode::kGeneratedImage : AvatarMode::kParameterizedUrl);
  mapping_ = std::make_unique<MappingEngine>(llm_, config_.offline_mapping);
  jobs_ = std::make_unique<JobManager>(store_, config_.workers);
  if (config_.resume_jobs) jobs_->resume([this](const JobRecord& r) { return runner_for(r); });
}

Engine::~Engine() { jobs_.reset(); }

void Engine::require_repo(const std::string& repo_id) const {
  if (!store_->get_repo(repo_id)) throw Error(ErrorCode::kUnknownRepository, "unknown repository " + repo_id);
}

RepositoryRef Engine::repo(const std::string& repo_id) const {
  auto r = store_->get_repo(repo_id);
  if (!r) throw Error(ErrorCode::kUnknownRepository, "unknown repository " + repo_id);
  return *r;
}

DomainAnalysis Engine::stored_domain(const std::string& repo_id) const {
  auto j = store_->get_artifact(repo_id, "domain_analysis");
  if (!j) throw Error(ErrorCode::kInvalidParams, repo_id + " has not been analyzed yet");
  return j->get<DomainAnalysis>();
}

JobRunner Engine::runner_for(const JobRecord& record) {
  const auto& p = record.params;
  const auto type = p.value("type", std::string());
  if (type == "analyze") {
    AnalyzeRequest r;
    r.url = p.value("url", std::string());
    r.persona_count = p.value("persona_count", 4);
    r.external_urls = p.value("external_urls", std::vector<std::string>{});
    r.additional_context = p.value("additional_context", std::string());
    return [this, r](JobContext& ctx) { run_analysis(ctx, r); };
  }
  if (type == "more") {
    const int count = p.value("count", 1);
    return [this, count](JobContext& ctx) { run_more(ctx, count); };
  }
  if (type == "regenerate") {
    std::optional<int> count;
    if (p.contains("count") && !p.at("count").is_null()) count = p.at("count").get<int>();
    return [this, count](JobContext& ctx) { run_regenerate(ctx, count); };
  }
  if (type == "sync" || type == "map") {
    const bool sync = type == "sync";
    const auto request = sync ? p.at("request").get<SyncRequest>() : SyncRequest{};
    const bool force = p.value("force_remap_ai", false);
    const bool map = p.value("map", true);
    if (!sync) {
      return [this, force](JobContext& ctx) {
        ctx.enter(JobStage::kMapIssues);
        const auto outcome = map_unmapped(ctx.repo_id(), force, ctx.job_id(), &ctx);
        (void)outcome;
      };
    }
    return [this, request, map, force](JobContext& ctx) { run_sync(ctx, request, map, force); };
  }
  return {};
}

// ---------------------------------------------------------------------------
// Generation

SubmitResult Engine::submit_analysis(const AnalyzeRequest& request) {
  const auto coords = parse_repo_url(request.url);
  check_persona_count(request.persona_count);
  for (const auto& url : request.external_urls) {
    if (!parse_url(url)) throw Error(ErrorCode::kMalformedUrl, "external URL is not absolute http(s): " + url);
  }
  const auto repo_id = coords.owner + ":" + coords.name;
  const auto job = jobs_->submit(JobKind::kGeneration, repo_id, analyze_params(request),
                                 [this, request](JobContext& ctx) { run_analysis(ctx, request); });
  return {job, repo_id};
}

void Engine::run_analysis(JobContext& ctx, const AnalyzeRequest& request) {
  ctx.enter(JobStage::kFetchReadme);
  auto ref = connector_->fetch_repo(request.url);
  if (auto previous = store_->get_repo(ref.id()); !previous || !(*previous == ref)) store_->put_repo(ref);
  store_->put_artifact(ref.id(), "settings", analyze_params(request));
  ctx.progress(0.5);
  std::optional<ResourceDocument> readme;
  try {
    readme = connector_->fetch_readme(ref);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoReadme) throw;
    ctx.warn(e.what());
  }

  ctx.enter(JobStage::kExternalDocs);
  LinkPlan plan;
  if (readme) {
    plan = corpus_->discover_links(*llm_, *readme, ref, ctx.job_id());
    store_->put_artifact(ref.id(), "link_plan", Json(plan));
  }
  ctx.progress(0.4);
  std::vector<ResourceDocument> user_docs;
  for (const auto& url : request.external_urls) {
    try {
      user_docs.push_back(corpus_->fetch_user_url(url));
    } catch (const std::exception& e) {
      ctx.warn("user document " + url + " skipped: " + e.what());
    }
  }
  if (!blank(request.additional_context)) {
    ResourceDocument doc;
    doc.source_kind = SourceKind::kUserProvided;
    doc.locator = "additional_context";
    doc.expected_content = "context written by the user";
    doc.user_relevance = "the user's own description of the audience";
    doc.priority = 5;
    doc.content_text = request.additional_context;
    doc.fetched_at = now_utc();
    user_docs.push_back(std::move(doc));
  }
  const auto corpus = corpus_->build(ref, readme, plan, user_docs);
  for (const auto& w : corpus.warnings) ctx.warn(w);
  store_->put_artifact(ref.id(), "corpus", Json(corpus));

  ctx.enter(JobStage::kAnalyzeDomain);
  const auto analysis = personas_->analyze(corpus, ctx.job_id());
  ctx.progress(0.9);
  store_->put_artifact(ref.id(), "user_insights", Json(analysis.insights));
  store_->put_artifact(ref.id(), "domain_analysis", Json(analysis.domain));

  ctx.enter(JobStage::kGeneratePersonas);
  std::vector<std::string> warnings;
  auto fresh = personas_->generate_from_analysis(analysis.domain, request.persona_count, {}, ctx.job_id(), warnings);
  for (const auto& w : warnings) ctx.warn(w);
  std::vector<std::string> retire;
  for (const auto& p : store_->list_personas(ref.id())) {
    if (p.provenance == Provenance::kAiGenerated && !p.edited) retire.push_back(p.id);
  }
  store_personas(ref.id(), std::move(fresh), retire);
}

void Engine::store_personas(const std::string& repo_id, std::vector<Persona> fresh,
                            const std::vector<std::string>& retire) {
  std::lock_guard lock(store_->repo_mutex(repo_id));
  for (const auto& id : retire) {
    auto stored = store_->get_persona(id);
    if (!stored || stored->value.archived) continue;
    stored->value.archived = true;
    store_->update_persona(stored->value);
  }
  for (auto& p : fresh) store_->insert_persona(repo_id, std::move(p));
}

SubmitResult Engine::submit_more_personas(const std::string& repo_id, int count) {
  require_repo(repo_id);
  check_persona_count(count);
  stored_domain(repo_id);
  const auto job = jobs_->submit(JobKind::kGeneration, repo_id, {{"type", "more"}, {"count", count}},
                                 [this, count](JobContext& ctx) { run_more(ctx, count); });
  return {job, repo_id};
}

void Engine::run_more(JobContext& ctx, int count) {
  ctx.enter(JobStage::kGeneratePersonas);
  const auto domain = stored_domain(ctx.repo_id());
  std::vector<std::string> warnings;
  auto fresh = personas_->generate_from_analysis(domain, count, store_->list_personas(ctx.repo_id()), ctx.job_id(),
                                                 warnings);
  for (const auto& w : warnings) ctx.warn(w);
  store_personas(ctx.repo_id(), std::move(fresh), {});
}

SubmitResult Engine::submit_regenerate(const std::string& repo_id, std::optional<int> count) {
  require_repo(repo_id);
  stored_domain(repo_id);
  int n = 0;
  if (count) {
    n = *count;
  } else {
    for (const auto& p : store_->list_personas(repo_id)) {
      if (p.provenance == Provenance::kAiGenerated && !p.edited) ++n;
    }
    if (n == 0) throw Error(ErrorCode::kInvalidParams, "no unedited AI personas to regenerate");
  }
  check_persona_count(n);
  const auto job = jobs_->submit(JobKind::kGeneration, repo_id, {{"type", "regenerate"}, {"count", n}},
                                 [this, n](JobContext& ctx) { run_regenerate(ctx, n); });
  return {job, repo_id};
}

void Engine::run_regenerate(JobContext& ctx, std::optional<int> count) {
  ctx.enter(JobStage::kGeneratePersonas);
  const auto domain = stored_domain(ctx.repo_id());
  std::vector<Persona> kept;
  std::vector<std::string> retire;
  for (const auto& p : store_->list_personas(ctx.repo_id())) {
    if (p.provenance == Provenance::kAiGenerated && !p.edited) {
      retire.push_back(p.id);
    } else {
      kept.push_back(p);
    }
  }
  const int n = count.value_or(static_cast<int>(retire.size()));
  std::vector<std::string> warnings;
  auto fresh = personas_->generate_from_analysis(domain, n, kept, ctx.job_id(), warnings);
  for (const auto& w : warnings) ctx.warn(w);
  store_personas(ctx.repo_id(), std::move(fresh), retire);
}

// ---------------------------------------------------------------------------
// Issues

SubmitResult Engine::submit_sync(const std::string& repo_id, const SyncRequest& request, bool force_remap_ai) {
  require_repo(repo_id);
  validate_sync_request(request);
  if (store_->list_personas(repo_id).empty()) {
    throw Error(ErrorCode::kInvalidParams, repo_id + " has no active personas to map issues to");
  }
  Json params{{"type", "sync"}, {"request", request}, {"map", true}, {"force_remap_ai", force_remap_ai}};
  const auto job = jobs_->submit(JobKind::kSync, repo_id, params, [this, request, force_remap_ai](JobContext& ctx) {
    run_sync(ctx, request, true, force_remap_ai);
  });
  return {job, repo_id};
}

SubmitResult Engine::submit_mapping(const std::string& repo_id, bool force_remap_ai) {
  require_repo(repo_id);
  if (store_->list_personas(repo_id).empty()) {
    throw Error(ErrorCode::kInvalidParams, repo_id + " has no active personas to map issues to");
  }
  const auto job = jobs_->submit(JobKind::kMapping, repo_id, {{"type", "map"}, {"force_remap_ai", force_remap_ai}},
                                 [this, force_remap_ai](JobContext& ctx) {
                                   ctx.enter(JobStage::kMapIssues);
                                   map_unmapped(ctx.repo_id(), force_remap_ai, ctx.job_id(), &ctx);
                                 });
  return {job, repo_id};
}

void Engine::run_sync(JobContext& ctx, const SyncRequest& request, bool map, bool force) {
  ctx.enter(JobStage::kSyncIssues);
  const auto changed = sync_issues(ctx.repo_id(), request);
  (void)changed;
  if (!map) return;
  ctx.enter(JobStage::kMapIssues);
  map_unmapped(ctx.repo_id(), force, ctx.job_id(), &ctx);
}

int Engine::sync_issues(const std::string& repo_id, const SyncRequest& request) {
  validate_sync_request(request);
  auto ref = repo(repo_id);
  auto fresh_ref = connector_->fetch_repo("https://" + ref.host + "/" + ref.owner + "/" + ref.name);
  std::optional<Timestamp> last_created;
  for (const auto& issue : store_->list_issues(repo_id)) {
    if (!last_created || issue.created_at > *last_created) last_created = issue.created_at;
  }
  const auto issues = connector_->fetch_issues(fresh_ref, request, last_created);
  std::lock_guard lock(store_->repo_mutex(repo_id));
  if (!(fresh_ref == ref)) store_->put_repo(fresh_ref);
  int changed = 0;
  for (const auto& issue : issues) {
    if (store_->upsert_issue(repo_id, issue)) ++changed;
  }
  return changed;
}

MapOutcome Engine::map_unmapped(const std::string& repo_id, bool force_remap_ai, const std::string& job_id,
                                JobContext* ctx) {
  require_repo(repo_id);
  const auto active = store_->list_personas(repo_id);
  if (active.empty()) throw Error(ErrorCode::kInvalidParams, repo_id + " has no active personas to map issues to");
  const auto active_ids = ids_of(active);
  const auto mapped_already = store_->list_mappings(repo_id);
  std::vector<IssueRecord> todo;
  for (const auto& issue : store_->list_issues(repo_id)) {
    if (force_remap_ai || !mapped_already.count(issue.number)) todo.push_back(issue);
  }

  MapOutcome outcome;
  outcome.attempted = static_cast<int>(todo.size());
  std::mutex outcome_mutex;
  std::optional<ErrorCode> first_error;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      const auto& issue = todo[i];
      try {
        auto fresh = mapping_->map_issue(issue, active, job_id);
        {
          std::lock_guard lock(store_->repo_mutex(repo_id));
          auto existing = store_->get_mapping(repo_id, issue.number);
          auto result = existing ? merge_remap(existing->value, std::move(fresh), active_ids) : std::move(fresh);
          store_->put_mapping(repo_id, result);
        }
        std::lock_guard lock(outcome_mutex);
        ++outcome.mapped;
      } catch (const Error& e) {
        std::lock_guard lock(outcome_mutex);
        if (!first_error) first_error = e.code();
        outcome.failures.push_back("issue #" + std::to_string(issue.number) + ": " + e.what());
      }
      const auto done = ++finished;
      if (ctx) ctx->progress(static_cast<double>(done) / static_cast<double>(todo.size()));
    }
  };
  const auto threads =
      std::min<std::size_t>(todo.size(), static_cast<std::size_t>(std::max(1, config_.mapping_concurrency)));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::sort(outcome.failures.begin(), outcome.failures.end());
  if (ctx) {
    for (const auto& f : outcome.failures) ctx->warn(f);
  }
  if (outcome.attempted > 0 && outcome.mapped == 0) {
    throw Error(*first_error, "no issue could be mapped (" + std::to_string(outcome.failures.size()) + " failures)");
  }
  return outcome;
}

// ---------------------------------------------------------------------------
// Personas

std::vector<Persona> Engine::personas(const std::string& repo_id, bool include_archived) const {
  require_repo(repo_id);
  return store_->list_personas(repo_id, include_archived);
}

Versioned<Persona> Engine::persona(const std::string& persona_id) const {
  auto p = store_->get_persona(persona_id);
  if (!p) throw Error(ErrorCode::kUnknownPersona, "unknown persona " + persona_id);
  return *p;
}

Versioned<Persona> Engine::edit_persona(const std::string& persona_id, const Json& patch,
                                        std::optional<std::int64_t> expected_version) {
  const auto repo_id = store_->persona_repo(persona_id);
  if (repo_id.empty()) throw Error(ErrorCode::kUnknownPersona, "unknown persona " + persona_id);
  std::lock_guard lock(store_->repo_mutex(repo_id));
  const auto current = persona(persona_id);
  auto updated = apply_patch(current.value, patch, now_utc());
  const auto version = store_->update_persona(updated, expected_version);
  return {updated, version};
}

Persona Engine::create_persona(const std::string& repo_id, const Json& fields) {
  require_repo(repo_id);
  auto p = make_custom_persona(fields, now_utc());
  std::lock_guard lock(store_->repo_mutex(repo_id));
  return store_->insert_persona(repo_id, std::move(p));
}

Persona Engine::archive_persona(const std::string& persona_id) {
  const auto repo_id = store_->persona_repo(persona_id);
  if (repo_id.empty()) throw Error(ErrorCode::kUnknownPersona, "unknown persona " + persona_id);
  std::lock_guard lock(store_->repo_mutex(repo_id));
  auto p = persona(persona_id).value;
  if (p.archived) return p;
  p.archived = true;
  p.updated_at = now_utc();
  store_->update_persona(p);
  const auto active = ids_of(store_->list_personas(repo_id));
  for (auto& [number, m] : store_->list_mappings(repo_id)) {
    if (tombstone_persona(m, persona_id, active)) store_->put_mapping(repo_id, m);
  }
  return p;
}

Persona Engine::merge_personas(const std::vector<std::string>& ids, const std::optional<std::string>& guidance) {
  std::vector<std::string> distinct;
  for (const auto& id : ids) {
    if (std::find(distinct.begin(), distinct.end(), id) == distinct.end()) distinct.push_back(id);
  }
  if (distinct.size() < 2) throw Error(ErrorCode::kFewerThanTwo, "merge needs at least two distinct personas");
  std::vector<Persona> sources;
  std::string repo_id;
  for (const auto& id : distinct) {
    auto p = persona(id).value;
    if (p.archived) throw Error(ErrorCode::kUnknownPersona, "persona " + id + " is archived");
    const auto r = store_->persona_repo(id);
    if (!repo_id.empty() && r != repo_id) {
      throw Error(ErrorCode::kInvalidArgument, "personas belong to different repositories");
    }
    repo_id = r;
    sources.push_back(std::move(p));
  }
  std::vector<std::string> warnings;
  auto merged = personas_->merge(sources, guidance, kDirectJob, warnings);

  std::lock_guard lock(store_->repo_mutex(repo_id));
  for (const auto& id : distinct) {
    auto current = persona(id).value;
    if (current.archived) throw Error(ErrorCode::kConflictingRequest, "persona " + id + " was archived meanwhile");
  }
  for (const auto& id : distinct) {
    auto current = persona(id).value;
    current.archived = true;
    store_->update_persona(current);
  }
  return store_->insert_persona(repo_id, std::move(merged));
}

// ---------------------------------------------------------------------------

IssueRecord Engine::issue(const std::string& repo_id, std::int64_t number) const {
  require_repo(repo_id);
  auto issue = store_->get_issue(repo_id, number);
  if (!issue) throw Error(ErrorCode::kNotFound, "issue #" + std::to_string(number) + " is not synced for " + repo_id);
  return *issue;
}

Versioned<IssuePersonaMapping> Engine::override_associations(const std::string& repo_id, std::int64_t number,
                                                             const std::vector<std::string>& add,
                                                             const std::vector<std::string>& remove,
                                                             std::optional<std::int64_t> expected_version) {
  issue(repo_id, number);
  std::lock_guard lock(store_->repo_mutex(repo_id));
  const auto all = store_->list_personas(repo_id, true);
  const auto active = ids_of(store_->list_personas(repo_id));
  auto existing = store_->get_mapping(repo_id, number);
  IssuePersonaMapping base;
  base.issue_number = number;
  if (existing) base = existing->value;
  auto result = personaflow::override_associations(base, add, remove, ids_of(all), active);
  const auto version = store_->put_mapping(repo_id, result, expected_version);
  return {result, version};
}

AnalyticsSummary Engine::analytics(const std::string& repo_id) const {
  const auto snap = store_->snapshot(repo_id);
  return compute_summary(snap.repo, snap.personas, snap.issues, snap.mappings);
}

RepoSnapshot Engine::snapshot(const std::string& repo_id) const { return store_->snapshot(repo_id); }

}  // namespace personaflow
