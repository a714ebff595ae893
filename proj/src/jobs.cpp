#include "personaflow/jobs.hpp"

#include <algorithm>
#include <cmath>

#include "personaflow/errors.hpp"

namespace personaflow {

std::pair<int, int> stage_band(JobKind kind, JobStage stage) {
  switch (stage) {
    case JobStage::kQueued: return {0, 0};
    case JobStage::kDone: return {100, 100};
    case JobStage::kFailed: return {0, 0};
    default: break;
  }
  if (kind == JobKind::kGeneration) {
    switch (stage) {
      case JobStage::kFetchReadme: return {0, 15};
      case JobStage::kExternalDocs: return {15, 45};
      case JobStage::kAnalyzeDomain: return {45, 75};
      case JobStage::kGeneratePersonas: return {75, 100};
      default: break;
    }
  } else {
    switch (stage) {
      case JobStage::kSyncIssues: return {0, 30};
      case JobStage::kMapIssues: return {30, 100};
      default: break;
    }
  }
  throw Error(ErrorCode::kInternal,
              "stage " + std::string(to_string(stage)) + " does not belong to a " + std::string(to_string(kind)) + " job");
}

void JobContext::enter(JobStage stage) {
  manager_.update(job_id_, [&](JobManager::Entry& e) {
    const auto [start, end] = stage_band(e.snapshot.kind, stage);
    (void)end;
    e.snapshot.stage = stage;
    e.snapshot.percent = std::max(e.snapshot.percent, start);
    e.history.push_back(stage);
  });
}

void JobContext::progress(double fraction) {
  manager_.update(job_id_, [&](JobManager::Entry& e) {
    const auto [start, end] = stage_band(e.snapshot.kind, e.snapshot.stage);
    const double f = std::clamp(fraction, 0.0, 1.0);
    const int percent = start + static_cast<int>(std::floor((end - start) * f));
    e.snapshot.percent = std::max(e.snapshot.percent, std::min(percent, 99));
  });
}

void JobContext::warn(const std::string& message) {
  manager_.update(job_id_, [&](JobManager::Entry& e) { e.snapshot.warnings.push_back(message); });
}

JobManager::JobManager(std::shared_ptr<Store> store, int workers) : store_(std::move(store)) {
  for (int i = 0; i < std::max(1, workers); ++i) workers_.emplace_back([this] { worker_loop(); });
}

JobManager::~JobManager() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  work_.notify_all();
  for (auto& t : workers_) t.join();
}

void JobManager::persist(const Entry& e) {
  if (store_) store_->put_job({e.snapshot, e.params});
}

void JobManager::update(const std::string& job_id, const std::function<void(Entry&)>& change) {
  std::unique_lock lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end() || is_terminal(it->second.snapshot.stage)) return;
  const auto before = it->second.snapshot;
  change(it->second);
  if (it->second.snapshot != before) {
    persist(it->second);
    changed_.notify_all();
  }
}

std::string JobManager::submit(JobKind kind, const std::string& repo_id, Json params, JobRunner runner) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    if (kind == JobKind::kGeneration) {
      for (const auto& [other_id, e] : jobs_) {
        if (e.snapshot.kind == JobKind::kGeneration && e.snapshot.repo_id == repo_id &&
            !is_terminal(e.snapshot.stage)) {
          throw Error(ErrorCode::kBusyRepository, repo_id + " already has generation job " + other_id + " in flight");
        }
      }
    }
    id = "j" + std::to_string(store_ ? store_->next_sequence("job") : static_cast<std::int64_t>(jobs_.size() + 1));
    Entry e;
    e.snapshot.job_id = id;
    e.snapshot.kind = kind;
    e.snapshot.repo_id = repo_id;
    e.params = std::move(params);
    e.runner = std::move(runner);
    e.history.push_back(JobStage::kQueued);
    persist(e);
    jobs_.emplace(id, std::move(e));
    queue_.push_back(id);
  }
  work_.notify_one();
  return id;
}

JobSnapshot JobManager::status(const std::string& job_id) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = jobs_.find(job_id); it != jobs_.end()) return it->second.snapshot;
  }
  if (store_) {
    if (auto rec = store_->get_job(job_id)) return rec->snapshot;
  }
  throw Error(ErrorCode::kUnknownJob, "unknown job " + job_id);
}

std::vector<JobStage> JobManager::stage_history(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::kUnknownJob, "unknown job " + job_id);
  return it->second.history;
}

JobSnapshot JobManager::wait(const std::string& job_id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) {
    lock.unlock();
    return status(job_id);
  }
  changed_.wait_for(lock, timeout, [&] { return is_terminal(it->second.snapshot.stage); });
  return it->second.snapshot;
}

void JobManager::resume(const JobFactory& factory) {
  if (!store_) return;
  for (auto& rec : store_->list_jobs()) {
    if (is_terminal(rec.snapshot.stage)) continue;
    {
      std::lock_guard lock(mutex_);
      if (jobs_.count(rec.snapshot.job_id)) continue;
    }
    JobRunner runner = rec.snapshot.stage == JobStage::kQueued && factory ? factory(rec) : JobRunner{};
    Entry e;
    e.snapshot = rec.snapshot;
    e.params = rec.params;
    e.history.push_back(e.snapshot.stage);
    if (!runner) {
      e.snapshot.stage = JobStage::kFailed;
      e.snapshot.error = std::string(to_string(ErrorCode::kInternal)) + ": interrupted by a restart";
      e.snapshot.finished_at = now_utc();
      e.history.push_back(JobStage::kFailed);
      persist(e);
      std::lock_guard lock(mutex_);
      jobs_.emplace(rec.snapshot.job_id, std::move(e));
      continue;
    }
    e.runner = std::move(runner);
    {
      std::lock_guard lock(mutex_);
      jobs_.emplace(rec.snapshot.job_id, std::move(e));
      queue_.push_back(rec.snapshot.job_id);
    }
    work_.notify_one();
  }
}

void JobManager::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(mutex_);
      work_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      id = queue_.front();
      queue_.pop_front();
    }
    run(id);
  }
}

void JobManager::run(const std::string& job_id) {
  JobRunner runner;
  std::string repo_id;
  Json params;
  {
    std::lock_guard lock(mutex_);
    auto& e = jobs_.at(job_id);
    runner = std::move(e.runner);
    repo_id = e.snapshot.repo_id;
    params = e.params;
  }
  update(job_id, [](Entry& e) { e.snapshot.started_at = now_utc(); });
  JobContext ctx(*this, job_id, repo_id, params);
  std::optional<std::string> error;
  try {
    runner(ctx);
  } catch (const Error& e) {
    error = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    error = std::string(to_string(ErrorCode::kInternal)) + ": " + e.what();
  }
  update(job_id, [&](Entry& e) {
    e.snapshot.finished_at = now_utc();
    e.snapshot.error = error;
    e.snapshot.stage = error ? JobStage::kFailed : JobStage::kDone;
    if (!error) e.snapshot.percent = 100;
    e.history.push_back(e.snapshot.stage);
  });
}

}  // namespace personaflow
