#pragma once

// Mutation fuzzer for provider responses. Seeds are the recorded completions;
// half of the mutations edit the JSON tree (so schema checks get exercised),
// half damage the raw text.

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "personaflow/errors.hpp"
#include "personaflow/stage_parse.hpp"
#include "support.hpp"

namespace pftest {

struct FuzzReport {
  personaflow::Stage stage{};
  int runs = 0;
  int accepted = 0;
  int rejected = 0;
  int crashes = 0;              // anything other than Error(kParseError)
  int invariant_violations = 0;  // accepted mapping breaking primary/rationale rules
  std::string first_problem;
};

inline std::vector<std::string> fuzz_seeds(personaflow::Stage stage) {
  std::vector<std::string> seeds;
  const std::string prefix = std::string(personaflow::to_string(stage)) + "-";
  for (const auto& entry : std::filesystem::directory_iterator(kFixtures / "mock")) {
    const auto name = entry.path().filename().string();
    if (name.rfind(prefix, 0) != 0) continue;
    seeds.push_back(personaflow::Json::parse(read_file(entry.path())).at("response_text").get<std::string>());
  }
  std::sort(seeds.begin(), seeds.end());
  return seeds;
}

namespace detail {

using personaflow::Json;

inline Json random_scalar(std::mt19937& rng) {
  switch (rng() % 9) {
    case 0: return nullptr;
    case 1: return static_cast<int>(rng() % 7) - 1;
    case 2: return std::uniform_real_distribution<double>(-0.5, 1.5)(rng);
    case 3: return "";
    case 4: return "  ";
    case 5: return rng() % 2 == 0;
    case 6: return Json::array();
    case 7: return Json::object();
    default: return "text " + std::to_string(rng() % 100);
  }
}

inline Json* random_node(Json& root, std::mt19937& rng) {
  Json* node = &root;
  const int depth = static_cast<int>(rng() % 4);
  for (int i = 0; i < depth; ++i) {
    if (!(node->is_object() || node->is_array()) || node->empty()) break;
    auto it = node->begin();
    std::advance(it, static_cast<long>(rng() % node->size()));
    node = &*it;
  }
  return node;
}

inline void mutate_tree(Json& root, std::mt19937& rng) {
  Json* node = random_node(root, rng);
  switch (rng() % 5) {
    case 0:  // drop a member or element
      if (node->is_object() && !node->empty()) {
        auto it = node->begin();
        std::advance(it, static_cast<long>(rng() % node->size()));
        node->erase(it.key());
      } else if (node->is_array() && !node->empty()) {
        node->erase(node->begin() + static_cast<long>(rng() % node->size()));
      } else {
        *node = random_scalar(rng);
      }
      break;
    case 1:  // replace with a scalar of any type
      *node = random_scalar(rng);
      break;
    case 2:  // duplicate an array element
      if (node->is_array() && !node->empty()) node->push_back((*node)[rng() % node->size()]);
      else *node = random_scalar(rng);
      break;
    case 3:  // add a stray member
      if (node->is_object()) (*node)["k" + std::to_string(rng() % 10)] = random_scalar(rng);
      else *node = Json::array({random_scalar(rng)});
      break;
    default:  // nudge integers, which hit persona ids and priorities
      if (node->is_number_integer()) *node = node->get<long long>() + static_cast<int>(rng() % 5) - 2;
      else *node = random_scalar(rng);
      break;
  }
}

inline std::string mutate_text(std::string s, std::mt19937& rng) {
  static const std::string junk = "{}[]\",:0123456789eE.-+ \n\\`tfn\xff\xc3";
  const int edits = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < edits; ++i) {
    const std::size_t pos = s.empty() ? 0 : rng() % s.size();
    switch (rng() % 6) {
      case 0:
        if (!s.empty()) s[pos] = junk[rng() % junk.size()];
        break;
      case 1:
        s.erase(pos, 1 + rng() % 16);
        break;
      case 2:
        s.insert(pos, 1 + rng() % 3, junk[rng() % junk.size()]);
        break;
      case 3:
        s.resize(pos);
        break;
      case 4:
        s = "```json\n" + s + "\n```\nHope this helps!";
        break;
      default:
        if (!s.empty()) s.insert(pos, s.substr(rng() % s.size(), 1 + rng() % 32));
        break;
    }
  }
  return s;
}

}  // namespace detail

/// Accepted issue mappings must keep primary among the matched personas and a
/// rationale on every AI association.
inline bool mapping_invariants_hold(const personaflow::IssuePersonaMapping& m) {
  bool primary_ok = !m.primary_persona_id;
  for (const auto& a : m.associations) {
    if (m.primary_persona_id && a.persona_id == *m.primary_persona_id) primary_ok = true;
    if (a.rationale.find_first_not_of(" \t\r\n") == std::string::npos) return false;
  }
  if (m.primary_persona_id && m.associations.empty()) return false;
  return primary_ok;
}

inline FuzzReport fuzz_stage(personaflow::Stage stage, int runs, unsigned seed) {
  using namespace personaflow;
  FuzzReport report;
  report.stage = stage;
  const auto seeds = fuzz_seeds(stage);
  if (seeds.empty()) {
    report.crashes = 1;
    report.first_problem = "no seed responses";
    return report;
  }
  ParseOptions options;
  options.persona_ids = {"p1", "p2", "p3", "p4", "p5"};
  options.issue_number = 42;
  std::mt19937 rng(seed);
  for (int i = 0; i < runs; ++i) {
    std::string text = seeds[rng() % seeds.size()];
    if (rng() % 2 == 0) {
      if (auto tree = extract_json_object(text)) {
        const int edits = 1 + static_cast<int>(rng() % 3);
        for (int e = 0; e < edits; ++e) detail::mutate_tree(*tree, rng);
        text = tree->dump(rng() % 2 ? 2 : -1);
      }
    } else {
      text = detail::mutate_text(std::move(text), rng);
    }
    ++report.runs;
    try {
      const auto out = parse_stage_output(stage, text, options);
      ++report.accepted;
      if (const auto* m = std::get_if<IssuePersonaMapping>(&out); m && !mapping_invariants_hold(*m)) {
        ++report.invariant_violations;
        if (report.first_problem.empty()) report.first_problem = "invariant broken by: " + text;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParseError) {
        ++report.rejected;
      } else {
        ++report.crashes;
        if (report.first_problem.empty()) report.first_problem = std::string(to_string(e.code())) + ": " + e.what();
      }
    } catch (const std::exception& e) {
      ++report.crashes;
      if (report.first_problem.empty()) report.first_problem = e.what();
    }
  }
  return report;
}

/// Stages whose completions are parsed (the headshot stage returns an image).
inline std::vector<personaflow::Stage> parsed_stages() {
  using personaflow::Stage;
  return {Stage::kLinkDiscovery, Stage::kUserInsights,  Stage::kDomainAnalysis,
          Stage::kPersonaGeneration, Stage::kMerge, Stage::kIssueMapping};
}

}  // namespace pftest
