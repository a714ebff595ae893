#pragma once

// Merging k personas drops the active count by k-1, records every source id
// on the merged persona and archives the sources without losing them.

#include <algorithm>
#include <random>

#include "support.hpp"

namespace pftest {

struct MergeTrial {
  int k = 0;
  bool ok = false;
  std::string detail;
};

inline std::vector<MergeTrial> run_merge_property(int trials_per_k, unsigned seed) {
  using namespace personaflow;
  std::vector<MergeTrial> out;
  std::mt19937 rng(seed);
  for (int k = 2; k <= 4; ++k) {
    for (int t = 0; t < trials_per_k; ++t) {
      MergeTrial trial;
      trial.k = k;
      try {
        EngineOverrides o;
        o.text = mock_with_any_merge();
        Engine engine(fixture_config(), o);
        AnalyzeRequest req;
        req.url = kSheetAble;
        const auto sub = engine.submit_analysis(req);
        if (run_job(engine, sub.job_id).stage != JobStage::kDone) throw std::runtime_error("analysis failed");
        // Pool: 4 generated personas plus two manual ones.
        engine.create_persona(sub.repo_id, {{"name", "Ines Duarte"}, {"age", 52}, {"occupation", "Choir Director"},
                                            {"goals", {"Share parts"}}, {"pain_points", {"Printing"}}});
        engine.create_persona(sub.repo_id, {{"name", "Theo Brandt"}, {"age", 17}, {"occupation", "Pupil"},
                                            {"goals", {"Practice"}}, {"pain_points", {"Lost sheets"}}});
        auto pool = engine.personas(sub.repo_id);
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<std::string> ids;
        for (int i = 0; i < k; ++i) ids.push_back(pool[static_cast<std::size_t>(i)].id);
        const auto before = engine.personas(sub.repo_id).size();

        const auto merged = engine.merge_personas(ids, std::nullopt);

        const auto after = engine.personas(sub.repo_id);
        std::vector<std::string> recorded = merged.source_persona_ids;
        std::vector<std::string> expected = ids;
        std::sort(recorded.begin(), recorded.end());
        std::sort(expected.begin(), expected.end());
        bool sources_archived = true;
        for (const auto& id : ids) {
          const auto p = engine.persona(id).value;  // still retrievable
          sources_archived = sources_archived && p.archived;
          sources_archived = sources_archived &&
                             std::none_of(after.begin(), after.end(), [&](const Persona& a) { return a.id == id; });
        }
        const bool count_ok = after.size() + static_cast<std::size_t>(k - 1) == before;
        const bool merged_ok = merged.provenance == Provenance::kMerged && !merged.archived &&
                               std::any_of(after.begin(), after.end(), [&](const Persona& a) { return a.id == merged.id; });
        trial.ok = count_ok && recorded == expected && sources_archived && merged_ok;
        if (!trial.ok) {
          trial.detail = "before " + std::to_string(before) + " after " + std::to_string(after.size()) +
                         (recorded == expected ? "" : " sources differ") + (sources_archived ? "" : " sources active") +
                         (merged_ok ? "" : " merged persona wrong");
        }
      } catch (const std::exception& e) {
        trial.detail = e.what();
      }
      out.push_back(trial);
    }
  }
  return out;
}

}  // namespace pftest
