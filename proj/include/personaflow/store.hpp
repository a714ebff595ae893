#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "personaflow/model.hpp"

struct sqlite3;

namespace personaflow {

/// One stored entity: canonical JSON plus the envelope fields.
struct Record {
  std::string kind;
  std::string id;
  std::string repo;
  std::int64_t version = 0;
  bool tombstone = false;
  Json body;
};

template <typename T>
struct Versioned {
  T value;
  std::int64_t version = 0;
};

struct JobRecord {
  JobSnapshot snapshot;
  Json params;
};

/// Consistent read of everything analytics and the issue views need.
struct RepoSnapshot {
  RepositoryRef repo;
  std::vector<Persona> personas;  // archived included
  std::vector<IssueRecord> issues;
  std::map<std::int64_t, IssuePersonaMapping> mappings;
};

/// SQLite-backed record store. Every write bumps the entity's version;
/// versions are never reused, tombstoned rows stay in the table.
class Store {
 public:
  /// ":memory:" for a private in-memory database.
  explicit Store(const std::string& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Writes a record and returns its new version. With `expected_version`
  /// the write fails with kStaleVersion unless it matches the stored one.
  std::int64_t put(const std::string& kind, const std::string& id, const std::string& repo, const Json& body,
                   std::optional<std::int64_t> expected_version = std::nullopt);
  std::optional<Record> get(const std::string& kind, const std::string& id, bool include_tombstoned = false) const;
  std::vector<Record> list(const std::string& kind, const std::string& repo, bool include_tombstoned = false) const;
  /// Returns false when the record does not exist.
  bool tombstone(const std::string& kind, const std::string& id);
  std::int64_t next_sequence(const std::string& name);

  void put_repo(const RepositoryRef& repo);
  std::optional<RepositoryRef> get_repo(const std::string& repo_id) const;
  std::vector<RepositoryRef> list_repos() const;

  /// Assigns the next opaque id ("p<n>") and stores the persona.
  Persona insert_persona(const std::string& repo_id, Persona p);
  std::optional<Versioned<Persona>> get_persona(const std::string& persona_id) const;
  std::string persona_repo(const std::string& persona_id) const;
  std::int64_t update_persona(const Persona& p, std::optional<std::int64_t> expected_version = std::nullopt);
  std::vector<Persona> list_personas(const std::string& repo_id, bool include_archived = false) const;

  /// Inserts or replaces by issue number. Returns false (and writes nothing)
  /// when only synced_at would change.
  bool upsert_issue(const std::string& repo_id, const IssueRecord& issue);
  std::optional<IssueRecord> get_issue(const std::string& repo_id, std::int64_t number) const;
  /// Newest first.
  std::vector<IssueRecord> list_issues(const std::string& repo_id) const;

  std::optional<Versioned<IssuePersonaMapping>> get_mapping(const std::string& repo_id, std::int64_t number) const;
  std::int64_t put_mapping(const std::string& repo_id, const IssuePersonaMapping& m,
                           std::optional<std::int64_t> expected_version = std::nullopt);
  std::map<std::int64_t, IssuePersonaMapping> list_mappings(const std::string& repo_id) const;

  /// Pipeline by-products (corpus, insights, domain analysis, settings).
  void put_artifact(const std::string& repo_id, const std::string& name, const Json& body);
  std::optional<Json> get_artifact(const std::string& repo_id, const std::string& name) const;

  void put_job(const JobRecord& job);
  std::optional<JobRecord> get_job(const std::string& job_id) const;
  std::vector<JobRecord> list_jobs() const;

  RepoSnapshot snapshot(const std::string& repo_id) const;

  /// Serializes read-modify-write sequences on one repository.
  std::mutex& repo_mutex(const std::string& repo_id);

 private:
  void exec(const char* sql) const;
  std::optional<Record> get_unlocked(const std::string& kind, const std::string& id, bool include_tombstoned) const;
  std::vector<Record> list_unlocked(const std::string& kind, const std::string& repo, bool include_tombstoned) const;

  sqlite3* db_ = nullptr;
  mutable std::recursive_mutex db_mutex_;
  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> repo_locks_;
};

std::string issue_key(const std::string& repo_id, std::int64_t number);

}  // namespace personaflow
