#pragma once

// The SheetAble walkthrough: analyze with four personas, then sync and map.

#include <algorithm>
#include <cctype>
#include <chrono>

#include "support.hpp"

namespace pftest {

struct SheetAbleRun {
  personaflow::JobSnapshot analysis;
  std::vector<personaflow::JobStage> history;
  std::vector<personaflow::Persona> personas;
  std::size_t generation_text_calls = 0;
  std::size_t generation_image_calls = 0;
  personaflow::JobSnapshot sync;
  std::size_t mapping_text_calls = 0;
  personaflow::AnalyticsSummary summary;
  double seconds = 0.0;
};

inline SheetAbleRun run_sheetable(personaflow::HostKind host, personaflow::ImageProviderKind images,
                                  std::shared_ptr<personaflow::Engine>* keep = nullptr) {
  using namespace personaflow;
  const auto start = std::chrono::steady_clock::now();
  auto config = fixture_config(host);
  config.images = images;
  auto engine = std::make_shared<Engine>(config);
  SheetAbleRun r;
  AnalyzeRequest req;
  req.url = kSheetAble;
  req.persona_count = 4;
  const auto sub = engine->submit_analysis(req);
  r.analysis = run_job(*engine, sub.job_id);
  r.history = engine->jobs().stage_history(sub.job_id);
  r.personas = engine->personas(sub.repo_id);
  r.generation_text_calls = engine->ledger().text_calls(sub.job_id);
  r.generation_image_calls = engine->ledger().image_calls(sub.job_id);
  if (r.analysis.stage == JobStage::kDone) {
    const auto sync = engine->submit_sync(sub.repo_id, SyncRequest{});
    r.sync = run_job(*engine, sync.job_id);
    r.mapping_text_calls = engine->ledger().text_calls(sync.job_id);
    r.summary = engine->analytics(sub.repo_id);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (keep) *keep = engine;
  return r;
}

inline const std::vector<personaflow::JobStage>& expected_generation_stages() {
  using personaflow::JobStage;
  static const std::vector<JobStage> s = {JobStage::kQueued,        JobStage::kFetchReadme,
                                          JobStage::kExternalDocs,  JobStage::kAnalyzeDomain,
                                          JobStage::kGeneratePersonas, JobStage::kDone};
  return s;
}

/// Composer, educator, conductor and student, in the recorded order.
inline bool roles_match(const std::vector<personaflow::Persona>& personas) {
  static const std::vector<std::string> roles = {"composer", "educator", "conductor", "student"};
  if (personas.size() != roles.size()) return false;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    std::string occ = personas[i].occupation;
    std::transform(occ.begin(), occ.end(), occ.begin(), [](unsigned char c) { return std::tolower(c); });
    if (occ.find(roles[i]) == std::string::npos) return false;
    if (!personaflow::validate_persona(personas[i]).empty()) return false;
  }
  return true;
}

}  // namespace pftest
