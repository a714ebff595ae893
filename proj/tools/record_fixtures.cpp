// Authors mock-provider fixtures: runs analysis, sync/mapping and an optional
// merge against hosting fixtures while a scripted provider answers and every
// answered prompt is written out as a {stage, key, response_text} file.
#include <CLI11.hpp>
#include <iostream>

#include "personaflow/engine.hpp"
#include "personaflow/errors.hpp"

using namespace personaflow;

namespace {

JobSnapshot finish(Engine& engine, const std::string& job_id) {
  auto snap = engine.jobs().wait(job_id);
  for (const auto& w : snap.warnings) std::cerr << "  warning: " << w << "\n";
  if (snap.stage != JobStage::kDone) throw std::runtime_error(job_id + " " + snap.error.value_or("did not finish"));
  return snap;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"record mock completions from a scripted provider"};
  std::string host_root, script, out_dir, url, merge_names, guidance;
  int personas = 4;
  app.add_option("--host", host_root, "Hosting fixture root")->required();
  app.add_option("--script", script, "Scripted answers [{stage, match, response}]")->required();
  app.add_option("--out", out_dir, "Directory for recorded completions")->required();
  app.add_option("--repo", url, "Repository URL")->required();
  app.add_option("--personas", personas)->capture_default_str();
  app.add_option("--merge", merge_names, "Comma separated persona names to merge");
  app.add_option("--guidance", guidance);
  CLI11_PARSE(app, argc, argv);

  try {
    EngineConfig config;
    config.host = HostKind::kFixture;
    config.fixture_root = host_root;
    config.resume_jobs = false;
    EngineOverrides overrides;
    overrides.text = std::make_shared<RecordingTextProvider>(
        std::make_shared<ScriptedTextProvider>(ScriptedTextProvider::load_rules(script)), out_dir);
    Engine engine(config, overrides);

    AnalyzeRequest request;
    request.url = url;
    request.persona_count = personas;
    const auto submitted = engine.submit_analysis(request);
    finish(engine, submitted.job_id);
    for (const auto& p : engine.personas(submitted.repo_id)) std::cout << p.id << " " << p.name << "\n";

    finish(engine, engine.submit_sync(submitted.repo_id, SyncRequest{}).job_id);
    const auto summary = engine.analytics(submitted.repo_id);
    std::cout << "issues " << summary.total_issues << ", mapped " << summary.mapped_issues << "\n";

    if (!merge_names.empty()) {
      std::vector<std::string> ids;
      std::stringstream names(merge_names);
      for (std::string name; std::getline(names, name, ',');) {
        for (const auto& p : engine.personas(submitted.repo_id)) {
          if (p.name == name) ids.push_back(p.id);
        }
      }
      const auto merged = engine.merge_personas(ids, guidance.empty() ? std::nullopt : std::optional(guidance));
      std::cout << "merged into " << merged.name << " (" << merged.occupation << ")\n";
    }
    std::cout << engine.ledger().calls().size() << " provider calls recorded\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
