// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if any fails.
#include <cstdio>
#include <functional>
#include <sstream>

#include "analytics_fixture.hpp"
#include "e2e.hpp"
#include "fuzz.hpp"
#include "golden_prompts.hpp"
#include "merge_property.hpp"
#include "override_model.hpp"
#include "rubric_oracle.hpp"
#include "sync_property.hpp"

using namespace personaflow;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome end_to_end() {
  const auto r = pftest::run_sheetable(HostKind::kFixtureServer, ImageProviderKind::kNone);
  std::ostringstream d;
  d << "stages " << (r.history == pftest::expected_generation_stages() ? "ok" : "wrong") << ", personas "
    << r.personas.size() << (pftest::roles_match(r.personas) ? " (roles ok)" : " (roles wrong)") << ", mapped "
    << r.summary.mapped_issues << "/" << r.summary.total_issues << ", " << r.seconds << " s";
  const bool pass = r.analysis.stage == JobStage::kDone && r.history == pftest::expected_generation_stages() &&
                    pftest::roles_match(r.personas) && r.sync.stage == JobStage::kDone &&
                    r.summary.total_issues == 20 && r.summary.mapped_issues == 20 && r.seconds < 10.0;
  return {pass, d.str()};
}

Outcome call_accounting() {
  const auto plain = pftest::run_sheetable(HostKind::kFixture, ImageProviderKind::kNone);
  const auto images = pftest::run_sheetable(HostKind::kFixture, ImageProviderKind::kMock);
  std::ostringstream d;
  d << "generation " << plain.generation_text_calls << " text, mapping " << plain.mapping_text_calls
    << " text, with avatars " << images.generation_image_calls << " image";
  const bool pass = plain.generation_text_calls == 4 && plain.mapping_text_calls == 20 &&
                    plain.generation_image_calls == 0 && images.generation_text_calls == 4 &&
                    images.generation_image_calls == 4;
  return {pass, d.str()};
}

Outcome rubric_oracle() {
  const auto s = pftest::sweep_rubric();
  std::ostringstream d;
  d << "1024 vectors, " << s.mismatches << " mismatches, score 0: " << s.hits_zero << ", score 100: " << s.hits_hundred;
  return {s.mismatches == 0 && s.hits_zero > 0 && s.hits_hundred > 0, d.str()};
}

Outcome band_parity() {
  const bool pass = band_of(0.90) == ConfidenceBand::kHigh && band_of(0.75) == ConfidenceBand::kMedium &&
                    band_of(0.80) == ConfidenceBand::kHigh && band_of(0.60) == ConfidenceBand::kMedium &&
                    band_of(0.40) == ConfidenceBand::kLow;
  std::ostringstream d;
  for (double v : {0.90, 0.75, 0.80, 0.60, 0.40}) d << v << "=" << to_string(band_of(v)) << " ";
  return {pass, d.str()};
}

Outcome analytics_fixture() {
  pftest::AnalyticsFixture f;
  const auto full = f.summary();
  f.unmap_first(5);
  const auto half = f.summary();
  std::ostringstream d;
  d << "total " << full.total_issues << ", personas " << full.active_personas << ", coverage " << full.coverage_rate
    << " then " << half.coverage_rate;
  const bool pass = full.total_issues == 10 && full.active_personas == 5 && full.coverage_rate == 1.0 &&
                    half.coverage_rate == 0.5;
  return {pass, d.str()};
}

Outcome merge_conservation() {
  const auto trials = pftest::run_merge_property(4, 2024);
  int ok = 0;
  std::string first_bad;
  for (const auto& t : trials) {
    if (t.ok) ++ok;
    else if (first_bad.empty()) first_bad = "k=" + std::to_string(t.k) + ": " + t.detail;
  }
  std::ostringstream d;
  d << ok << "/" << trials.size() << " trials over k in {2,3,4}" << (first_bad.empty() ? "" : "; " + first_bad);
  return {ok == static_cast<int>(trials.size()), d.str()};
}

Outcome sync_and_override() {
  const auto replay = pftest::run_sync_replay(60, 99);
  const auto model = pftest::run_override_model(5);
  std::ostringstream d;
  d << replay.requests << " replayed sync requests, " << replay.violations << " changed state; " << model.steps
    << " override steps, " << model.mismatches << " model mismatches";
  if (!replay.first_violation.empty()) d << "; first replay failure " << replay.first_violation;
  if (!model.first_mismatch.empty()) d << "; first mismatch " << model.first_mismatch;
  return {replay.violations == 0 && model.mismatches == 0, d.str()};
}

Outcome parser_robustness() {
  std::ostringstream d;
  bool pass = true;
  unsigned seed = 1;
  for (auto stage : pftest::parsed_stages()) {
    const auto r = pftest::fuzz_stage(stage, 10000, seed++);
    d << to_string(stage) << " " << r.accepted << "/" << r.runs << " accepted";
    if (r.crashes || r.invariant_violations) {
      pass = false;
      d << " (" << r.crashes << " crashes, " << r.invariant_violations << " invariant breaks: " << r.first_problem << ")";
    }
    d << "; ";
  }
  return {pass, d.str()};
}

Outcome template_fidelity() {
  const auto results = pftest::compare_goldens();
  int equal = 0;
  std::string differ;
  for (const auto& r : results) {
    if (r.equal) ++equal;
    else differ += " " + r.name;
  }
  std::ostringstream d;
  d << equal << "/" << results.size() << " golden files equal (7 prompts)" << (differ.empty() ? "" : "; differ:" + differ);
  return {equal == static_cast<int>(results.size()) && results.size() == 15, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"end-to-end fixture run", end_to_end},
      {"call accounting", call_accounting},
      {"rubric oracle equivalence", rubric_oracle},
      {"confidence band parity", band_parity},
      {"analytics fixture", analytics_fixture},
      {"merge conservation", merge_conservation},
      {"sync idempotence and override precedence", sync_and_override},
      {"parser robustness", parser_robustness},
      {"template fidelity", template_fidelity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
