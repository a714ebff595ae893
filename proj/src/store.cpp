#include "personaflow/store.hpp"

#include <sqlite3.h>

#include <algorithm>

#include "personaflow/errors.hpp"

namespace personaflow {

namespace {

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw Error(ErrorCode::kIo, std::string("sqlite prepare: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int index, const std::string& text) {
    sqlite3_bind_text(stmt_, index, text.data(), static_cast<int>(text.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int index, std::int64_t value) {
    sqlite3_bind_int64(stmt_, index, value);
    return *this;
  }
  /// True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(ErrorCode::kIo, std::string("sqlite step: ") + sqlite3_errmsg(db_));
  }
  std::string text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string();
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

Record read_record(const Statement& s) {
  Record r;
  r.kind = s.text(0);
  r.id = s.text(1);
  r.repo = s.text(2);
  r.version = s.integer(3);
  r.tombstone = s.integer(4) != 0;
  r.body = Json::parse(s.text(5));
  return r;
}

constexpr const char* kSelect = "SELECT kind, id, repo, version, tombstone, body FROM records";

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { run("BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    run("COMMIT");
    done_ = true;
  }

 private:
  void run(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown";
      sqlite3_free(err);
      throw Error(ErrorCode::kIo, std::string("sqlite ") + sql + ": " + msg);
    }
  }
  sqlite3* db_;
  bool done_ = false;
};

}  // namespace

std::string issue_key(const std::string& repo_id, std::int64_t number) {
  return repo_id + "#" + std::to_string(number);
}

Store::Store(const std::string& path) {
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error(ErrorCode::kIo, "cannot open store " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  if (path != ":memory:") {
    exec("PRAGMA journal_mode=WAL");
    exec("PRAGMA synchronous=NORMAL");
  }
  exec(
      "CREATE TABLE IF NOT EXISTS records ("
      " kind TEXT NOT NULL, id TEXT NOT NULL, repo TEXT NOT NULL,"
      " version INTEGER NOT NULL, tombstone INTEGER NOT NULL DEFAULT 0,"
      " updated_at TEXT NOT NULL, body TEXT NOT NULL, PRIMARY KEY (kind, id))");
  exec("CREATE INDEX IF NOT EXISTS records_by_repo ON records (kind, repo)");
  exec("CREATE TABLE IF NOT EXISTS sequences (name TEXT PRIMARY KEY, value INTEGER NOT NULL)");
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) const {
  std::lock_guard lock(db_mutex_);
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    throw Error(ErrorCode::kIo, "sqlite: " + msg);
  }
}

std::int64_t Store::put(const std::string& kind, const std::string& id, const std::string& repo, const Json& body,
                        std::optional<std::int64_t> expected_version) {
  std::lock_guard lock(db_mutex_);
  Transaction tx(db_);
  std::int64_t current = 0;
  {
    Statement s(db_, "SELECT version FROM records WHERE kind = ?1 AND id = ?2");
    s.bind(1, kind).bind(2, id);
    if (s.step()) current = s.integer(0);
  }
  if (expected_version && *expected_version != current) {
    throw Error(ErrorCode::kStaleVersion, kind + " " + id + " is at version " + std::to_string(current) +
                                              ", request was based on " + std::to_string(*expected_version));
  }
  const auto version = current + 1;
  Statement s(db_,
              "INSERT INTO records (kind, id, repo, version, tombstone, updated_at, body)"
              " VALUES (?1, ?2, ?3, ?4, 0, ?5, ?6)"
              " ON CONFLICT (kind, id) DO UPDATE SET repo = excluded.repo, version = excluded.version,"
              " tombstone = 0, updated_at = excluded.updated_at, body = excluded.body");
  s.bind(1, kind).bind(2, id).bind(3, repo).bind(4, version).bind(5, format_timestamp(now_utc())).bind(6, dump_json(body));
  s.step();
  tx.commit();
  return version;
}

std::optional<Record> Store::get_unlocked(const std::string& kind, const std::string& id,
                                          bool include_tombstoned) const {
  Statement s(db_, (std::string(kSelect) + " WHERE kind = ?1 AND id = ?2").c_str());
  s.bind(1, kind).bind(2, id);
  if (!s.step()) return std::nullopt;
  auto r = read_record(s);
  if (r.tombstone && !include_tombstoned) return std::nullopt;
  return r;
}

std::vector<Record> Store::list_unlocked(const std::string& kind, const std::string& repo,
                                         bool include_tombstoned) const {
  Statement s(db_, (std::string(kSelect) + " WHERE kind = ?1 AND (?2 = '' OR repo = ?2) ORDER BY rowid").c_str());
  s.bind(1, kind).bind(2, repo);
  std::vector<Record> out;
  while (s.step()) {
    auto r = read_record(s);
    if (!r.tombstone || include_tombstoned) out.push_back(std::move(r));
  }
  return out;
}

std::optional<Record> Store::get(const std::string& kind, const std::string& id, bool include_tombstoned) const {
  std::lock_guard lock(db_mutex_);
  return get_unlocked(kind, id, include_tombstoned);
}

std::vector<Record> Store::list(const std::string& kind, const std::string& repo, bool include_tombstoned) const {
  std::lock_guard lock(db_mutex_);
  return list_unlocked(kind, repo, include_tombstoned);
}

bool Store::tombstone(const std::string& kind, const std::string& id) {
  std::lock_guard lock(db_mutex_);
  Statement s(db_,
              "UPDATE records SET tombstone = 1, version = version + 1, updated_at = ?3"
              " WHERE kind = ?1 AND id = ?2");
  s.bind(1, kind).bind(2, id).bind(3, format_timestamp(now_utc()));
  s.step();
  return sqlite3_changes(db_) > 0;
}

std::int64_t Store::next_sequence(const std::string& name) {
  std::lock_guard lock(db_mutex_);
  Statement s(db_,
              "INSERT INTO sequences (name, value) VALUES (?1, 1)"
              " ON CONFLICT (name) DO UPDATE SET value = value + 1 RETURNING value");
  s.bind(1, name);
  s.step();
  return s.integer(0);
}

void Store::put_repo(const RepositoryRef& repo) { put("repo", repo.id(), repo.id(), Json(repo)); }

std::optional<RepositoryRef> Store::get_repo(const std::string& repo_id) const {
  auto r = get("repo", repo_id);
  if (!r) return std::nullopt;
  return r->body.get<RepositoryRef>();
}

std::vector<RepositoryRef> Store::list_repos() const {
  std::vector<RepositoryRef> out;
  for (const auto& r : list("repo", "")) out.push_back(r.body.get<RepositoryRef>());
  return out;
}

Persona Store::insert_persona(const std::string& repo_id, Persona p) {
  p.id = "p" + std::to_string(next_sequence("persona"));
  put("persona", p.id, repo_id, Json(p));
  return p;
}

std::optional<Versioned<Persona>> Store::get_persona(const std::string& persona_id) const {
  auto r = get("persona", persona_id);
  if (!r) return std::nullopt;
  return Versioned<Persona>{r->body.get<Persona>(), r->version};
}

std::string Store::persona_repo(const std::string& persona_id) const {
  auto r = get("persona", persona_id);
  return r ? r->repo : std::string();
}

std::int64_t Store::update_persona(const Persona& p, std::optional<std::int64_t> expected_version) {
  const auto repo = persona_repo(p.id);
  if (repo.empty()) throw Error(ErrorCode::kUnknownPersona, "unknown persona " + p.id);
  return put("persona", p.id, repo, Json(p), expected_version);
}

std::vector<Persona> Store::list_personas(const std::string& repo_id, bool include_archived) const {
  std::vector<Persona> out;
  for (const auto& r : list("persona", repo_id)) {
    auto p = r.body.get<Persona>();
    if (!p.archived || include_archived) out.push_back(std::move(p));
  }
  return out;
}

bool Store::upsert_issue(const std::string& repo_id, const IssueRecord& issue) {
  std::lock_guard lock(db_mutex_);
  if (auto existing = get_unlocked("issue", issue_key(repo_id, issue.number), false)) {
    auto stored = existing->body.get<IssueRecord>();
    stored.synced_at = issue.synced_at;
    if (stored == issue) return false;
  }
  put("issue", issue_key(repo_id, issue.number), repo_id, Json(issue));
  return true;
}

std::optional<IssueRecord> Store::get_issue(const std::string& repo_id, std::int64_t number) const {
  auto r = get("issue", issue_key(repo_id, number));
  if (!r) return std::nullopt;
  return r->body.get<IssueRecord>();
}

std::vector<IssueRecord> Store::list_issues(const std::string& repo_id) const {
  std::vector<IssueRecord> out;
  for (const auto& r : list("issue", repo_id)) out.push_back(r.body.get<IssueRecord>());
  std::stable_sort(out.begin(), out.end(), [](const IssueRecord& a, const IssueRecord& b) {
    return a.created_at != b.created_at ? a.created_at > b.created_at : a.number > b.number;
  });
  return out;
}

std::optional<Versioned<IssuePersonaMapping>> Store::get_mapping(const std::string& repo_id,
                                                                 std::int64_t number) const {
  auto r = get("mapping", issue_key(repo_id, number));
  if (!r) return std::nullopt;
  return Versioned<IssuePersonaMapping>{r->body.get<IssuePersonaMapping>(), r->version};
}

std::int64_t Store::put_mapping(const std::string& repo_id, const IssuePersonaMapping& m,
                                std::optional<std::int64_t> expected_version) {
  return put("mapping", issue_key(repo_id, m.issue_number), repo_id, Json(m), expected_version);
}

std::map<std::int64_t, IssuePersonaMapping> Store::list_mappings(const std::string& repo_id) const {
  std::map<std::int64_t, IssuePersonaMapping> out;
  for (const auto& r : list("mapping", repo_id)) {
    auto m = r.body.get<IssuePersonaMapping>();
    out.emplace(m.issue_number, std::move(m));
  }
  return out;
}

void Store::put_artifact(const std::string& repo_id, const std::string& name, const Json& body) {
  put("artifact", repo_id + "/" + name, repo_id, body);
}

std::optional<Json> Store::get_artifact(const std::string& repo_id, const std::string& name) const {
  auto r = get("artifact", repo_id + "/" + name);
  if (!r) return std::nullopt;
  return r->body;
}

void Store::put_job(const JobRecord& job) {
  put("job", job.snapshot.job_id, job.snapshot.repo_id, Json{{"snapshot", job.snapshot}, {"params", job.params}});
}

std::optional<JobRecord> Store::get_job(const std::string& job_id) const {
  auto r = get("job", job_id);
  if (!r) return std::nullopt;
  return JobRecord{r->body.at("snapshot").get<JobSnapshot>(), r->body.value("params", Json::object())};
}

std::vector<JobRecord> Store::list_jobs() const {
  std::vector<JobRecord> out;
  for (const auto& r : list("job", "")) {
    out.push_back({r.body.at("snapshot").get<JobSnapshot>(), r.body.value("params", Json::object())});
  }
  return out;
}

RepoSnapshot Store::snapshot(const std::string& repo_id) const {
  std::lock_guard lock(db_mutex_);
  exec("BEGIN");
  RepoSnapshot snap;
  try {
    auto repo = get_unlocked("repo", repo_id, false);
    if (!repo) throw Error(ErrorCode::kUnknownRepository, "unknown repository " + repo_id);
    snap.repo = repo->body.get<RepositoryRef>();
    for (const auto& r : list_unlocked("persona", repo_id, false)) snap.personas.push_back(r.body.get<Persona>());
    for (const auto& r : list_unlocked("issue", repo_id, false)) snap.issues.push_back(r.body.get<IssueRecord>());
    for (const auto& r : list_unlocked("mapping", repo_id, false)) {
      auto m = r.body.get<IssuePersonaMapping>();
      snap.mappings.emplace(m.issue_number, std::move(m));
    }
  } catch (...) {
    exec("COMMIT");
    throw;
  }
  exec("COMMIT");
  std::stable_sort(snap.issues.begin(), snap.issues.end(), [](const IssueRecord& a, const IssueRecord& b) {
    return a.created_at != b.created_at ? a.created_at > b.created_at : a.number > b.number;
  });
  return snap;
}

std::mutex& Store::repo_mutex(const std::string& repo_id) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = repo_locks_[repo_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

}  // namespace personaflow
