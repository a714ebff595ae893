#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "personaflow/model.hpp"
#include "personaflow/store.hpp"

namespace personaflow {

/// [start, end] percent band of a stage for a job kind.
std::pair<int, int> stage_band(JobKind kind, JobStage stage);

class JobManager;

/// Handed to a running job to report stage changes and warnings.
class JobContext {
 public:
  const std::string& job_id() const { return job_id_; }
  const std::string& repo_id() const { return repo_id_; }
  const Json& params() const { return params_; }
  /// Moves to `stage` at the start of its band.
  void enter(JobStage stage);
  /// Position inside the current stage, 0..1.
  void progress(double fraction);
  void warn(const std::string& message);

 private:
  friend class JobManager;
  JobContext(JobManager& manager, std::string job_id, std::string repo_id, Json params)
      : manager_(manager), job_id_(std::move(job_id)), repo_id_(std::move(repo_id)), params_(std::move(params)) {}
  JobManager& manager_;
  std::string job_id_;
  std::string repo_id_;
  Json params_;
};

using JobRunner = std::function<void(JobContext&)>;
/// Rebuilds the runner of a persisted job after a restart (empty: cannot resume).
using JobFactory = std::function<JobRunner(const JobRecord&)>;

/// Worker pool running jobs in submission order with poll-based observation.
class JobManager {
 public:
  JobManager(std::shared_ptr<Store> store, int workers = 2);
  /// Runs every job already queued, then joins the workers.
  ~JobManager();
  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  /// Queues a job and returns its id without running any of it.
  /// Throws kBusyRepository for a second in-flight generation job on one repository.
  std::string submit(JobKind kind, const std::string& repo_id, Json params, JobRunner runner);

  /// Throws kUnknownJob.
  JobSnapshot status(const std::string& job_id) const;
  /// Every stage the job has entered, in order, starting with queued.
  std::vector<JobStage> stage_history(const std::string& job_id) const;
  /// Blocks until the job is terminal or the timeout passes; returns the last snapshot.
  JobSnapshot wait(const std::string& job_id, std::chrono::milliseconds timeout = std::chrono::minutes(5)) const;
  /// Re-queues persisted queued jobs; jobs caught mid-run are marked failed.
  void resume(const JobFactory& factory);

 private:
  friend class JobContext;
  struct Entry {
    JobSnapshot snapshot;
    Json params;
    JobRunner runner;
    std::vector<JobStage> history;
  };

  void worker_loop();
  void run(const std::string& job_id);
  void update(const std::string& job_id, const std::function<void(Entry&)>& change);
  void persist(const Entry& e);

  std::shared_ptr<Store> store_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::condition_variable work_;
  std::deque<std::string> queue_;
  std::map<std::string, Entry> jobs_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace personaflow
