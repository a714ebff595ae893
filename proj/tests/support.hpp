#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "personaflow/engine.hpp"
#include "personaflow/errors.hpp"

namespace pftest {

using namespace personaflow;

inline const std::filesystem::path kFixtures = PF_FIXTURES_DIR;
inline const std::filesystem::path kGolden = PF_GOLDEN_DIR;

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline const std::string kSheetAble = "https://github.com/SheetAble/SheetAble";
inline const std::string kSheetAbleId = "SheetAble:SheetAble";

/// In-memory engine over the hosting fixtures with recorded completions.
inline EngineConfig fixture_config(HostKind host = HostKind::kFixture, bool mock_provider = true) {
  EngineConfig c;
  c.host = host;
  c.fixture_root = (kFixtures / "host").string();
  if (mock_provider) {
    c.provider = ProviderKind::kMock;
    c.provider_fixtures = (kFixtures / "mock").string();
  }
  c.resume_jobs = false;
  c.connector.max_retries = 0;
  return c;
}

inline JobSnapshot run_job(Engine& e, const std::string& job_id) {
  return e.jobs().wait(job_id, std::chrono::seconds(30));
}

inline Persona sample_persona(const std::string& name = "Dana Park", int age = 30) {
  Persona p;
  p.name = name;
  p.age = age;
  p.occupation = "Data Analyst";
  p.location = "Toronto, Canada";
  p.quote = "I just want the numbers to line up.";
  p.tagline = "Careful analyst";
  p.background = "Works with spreadsheets all day and scripts the boring parts.";
  p.personality_traits = {"methodical", "curious"};
  p.goals = {"Export reports quickly", "Share dashboards"};
  p.pain_points = {"Slow exports", "Broken charts"};
  p.technical_skills = {"SQL", "Python"};
  p.experience_level = ExperienceLevel::kIntermediate;
  p.confidence_score = 0.8;
  p.provenance = Provenance::kAiGenerated;
  return p;
}

/// Asks each provider in turn; a provider error moves on to the next one.
class ChainProvider final : public TextProvider {
 public:
  explicit ChainProvider(std::vector<std::shared_ptr<TextProvider>> chain) : chain_(std::move(chain)) {}
  Completion complete(const PromptBundle& bundle) override {
    for (std::size_t i = 0;; ++i) {
      try {
        return chain_.at(i)->complete(bundle);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kProviderError || i + 1 == chain_.size()) throw;
      }
    }
  }
  std::string name() const override { return "chain"; }

 private:
  std::vector<std::shared_ptr<TextProvider>> chain_;
};

/// Recorded completions plus a generic answer for any merge prompt.
inline std::shared_ptr<TextProvider> mock_with_any_merge() {
  const Json merged = {{"name", "Morgan Hale"},
                       {"age", 41},
                       {"occupation", "Music Technology Lead"},
                       {"location", "Lisbon, Portugal"},
                       {"quote", "One library for everyone who reads music."},
                       {"tagline", "Bridges musicians and their tools"},
                       {"background", "Runs the sheet music setup for a conservatory."},
                       {"personality_traits", {"Pragmatic"}},
                       {"goals", {"Keep every score in one place"}},
                       {"pain_points", {"Scattered files"}},
                       {"technical_skills", {"Docker"}},
                       {"experience_level", "advanced"},
                       {"confidence_score", 0.75},
                       {"tags", {"merged"}}};
  return std::make_shared<ChainProvider>(std::vector<std::shared_ptr<TextProvider>>{
      std::make_shared<MockTextProvider>(kFixtures / "mock"),
      std::make_shared<ScriptedTextProvider>(
          std::vector<ScriptedTextProvider::Rule>{{Stage::kMerge, "", merged.dump()}})});
}

}  // namespace pftest
