#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "personaflow/corpus_builder.hpp"
#include "personaflow/fixture_host.hpp"
#include "personaflow/jobs.hpp"
#include "personaflow/mapping_engine.hpp"
#include "personaflow/persona_engine.hpp"
#include "personaflow/providers.hpp"
#include "personaflow/repo_connector.hpp"
#include "personaflow/store.hpp"

namespace personaflow {

enum class ProviderKind { kOffline, kMock, kLive };
enum class ImageProviderKind { kNone, kMock, kFailing };
enum class HostKind { kNetwork, kFixture, kFixtureServer };

struct EngineConfig {
  std::string db_path = ":memory:";

  HostKind host = HostKind::kNetwork;
  std::string fixture_root;  // hosting fixtures for kFixture / kFixtureServer
  ConnectorConfig connector;
  CorpusLimits corpus;

  ProviderKind provider = ProviderKind::kOffline;
  std::string provider_fixtures;  // mock completions directory
  ChatProviderConfig live;
  ImageProviderKind images = ImageProviderKind::kNone;
  /// Map with the offline rubric even when a text provider is configured.
  bool offline_mapping = false;
  TokenPrices prices;

  int workers = 2;
  int provider_concurrency = 4;
  int mapping_concurrency = 4;
  bool resume_jobs = true;
};

/// Reads the JSON configuration accepted by the C API and the server:
/// {"db", "host": {"kind", "root", "api_base", "raw_base", "token"}, "provider": {"kind",
///  "fixtures", "endpoint", "model", "api_key", "temperature", "offline_mapping"},
///  "images": "none|mock|failing", "workers", "prices": {...}}
EngineConfig engine_config_from_json(const Json& j);

/// Test seams; anything set here replaces what the config would build.
struct EngineOverrides {
  std::shared_ptr<HttpTransport> hosting;
  std::shared_ptr<HttpTransport> web;
  std::shared_ptr<TextProvider> text;
  std::shared_ptr<ImageProvider> image;
  std::shared_ptr<RateBudget> budget;
  Sleeper sleeper;
};

struct AnalyzeRequest {
  std::string url;
  int persona_count = 4;
  std::vector<std::string> external_urls;
  std::string additional_context;
};

struct SubmitResult {
  std::string job_id;
  std::string repo_id;
};

struct MapOutcome {
  int attempted = 0;
  int mapped = 0;
  std::vector<std::string> failures;
};

/// Everything the API serves, wired together: store, connector, providers,
/// engines and the job pool. Thread-safe.
class Engine {
 public:
  explicit Engine(EngineConfig config, EngineOverrides overrides = {});
  ~Engine();

  // Generation workflow.
  SubmitResult submit_analysis(const AnalyzeRequest& request);
  /// Additional personas distinct from the active ones (persona_generation only).
  SubmitResult submit_more_personas(const std::string& repo_id, int count);
  /// Replaces AI personas nobody edited; manual, merged and edited ones stay.
  SubmitResult submit_regenerate(const std::string& repo_id, std::optional<int> count);

  // Issue workflow.
  SubmitResult submit_sync(const std::string& repo_id, const SyncRequest& request, bool force_remap_ai = false);
  SubmitResult submit_mapping(const std::string& repo_id, bool force_remap_ai = false);
  /// Maps issues lacking a mapping (all issues when forced). Runs inline.
  MapOutcome map_unmapped(const std::string& repo_id, bool force_remap_ai, const std::string& job_id,
                          JobContext* ctx = nullptr);
  /// Pulls issues into the store. Returns how many records changed.
  int sync_issues(const std::string& repo_id, const SyncRequest& request);

  // Personas.
  std::vector<Persona> personas(const std::string& repo_id, bool include_archived = false) const;
  Versioned<Persona> persona(const std::string& persona_id) const;
  Versioned<Persona> edit_persona(const std::string& persona_id, const Json& patch,
                                  std::optional<std::int64_t> expected_version = std::nullopt);
  Persona create_persona(const std::string& repo_id, const Json& fields);
  Persona archive_persona(const std::string& persona_id);
  Persona merge_personas(const std::vector<std::string>& ids, const std::optional<std::string>& guidance);

  // Issues and mappings.
  IssueRecord issue(const std::string& repo_id, std::int64_t number) const;
  Versioned<IssuePersonaMapping> override_associations(const std::string& repo_id, std::int64_t number,
                                                       const std::vector<std::string>& add,
                                                       const std::vector<std::string>& remove,
                                                       std::optional<std::int64_t> expected_version = std::nullopt);

  AnalyticsSummary analytics(const std::string& repo_id) const;
  RepoSnapshot snapshot(const std::string& repo_id) const;
  RepositoryRef repo(const std::string& repo_id) const;

  JobManager& jobs() { return *jobs_; }
  Store& store() { return *store_; }
  CallLedger& ledger() { return *ledger_; }
  const EngineConfig& config() const { return config_; }
  FixtureHost* fixture_host() { return fixture_host_.get(); }

 private:
  void run_analysis(JobContext& ctx, const AnalyzeRequest& request);
  void run_more(JobContext& ctx, int count);
  void run_regenerate(JobContext& ctx, std::optional<int> count);
  void run_sync(JobContext& ctx, const SyncRequest& request, bool map, bool force);
  JobRunner runner_for(const JobRecord& record);
  DomainAnalysis stored_domain(const std::string& repo_id) const;
  void require_repo(const std::string& repo_id) const;
  void store_personas(const std::string& repo_id, std::vector<Persona> fresh, const std::vector<std::string>& retire);

  EngineConfig config_;
  std::shared_ptr<Store> store_;
  std::shared_ptr<FixtureHost> fixture_host_;
  std::unique_ptr<FixtureServer> fixture_server_;
  std::shared_ptr<RepoConnector> connector_;
  std::shared_ptr<CorpusBuilder> corpus_;
  std::shared_ptr<CallLedger> ledger_;
  std::shared_ptr<LlmClient> llm_;
  std::unique_ptr<PersonaEngine> personas_;
  std::unique_ptr<MappingEngine> mapping_;
  std::unique_ptr<JobManager> jobs_;
};

}  // namespace personaflow
