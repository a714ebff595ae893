#pragma once

// Renders every prompt with the canonical placeholders and compares it with
// the checked-in golden text. Shared by the unit tests and the acceptance run.

#include <string>
#include <vector>

#include "personaflow/prompts.hpp"
#include "support.hpp"

namespace pftest {

struct GoldenResult {
  std::string name;
  bool equal = false;
};

inline personaflow::PromptContext canonical_context() {
  const auto j = personaflow::Json::parse(read_file(kGolden / "canonical_context.json"));
  personaflow::PromptContext ctx;
  for (const auto& [k, v] : j.items()) ctx[k] = v.get<std::string>();
  return ctx;
}

inline std::vector<GoldenResult> compare_goldens() {
  using personaflow::Stage;
  std::vector<GoldenResult> out;
  const auto ctx = canonical_context();
  for (int i = 0; i < personaflow::enum_size<Stage>(); ++i) {
    const auto stage = static_cast<Stage>(i);
    const std::string name(personaflow::to_string(stage));
    if (stage == Stage::kHeadshot) {
      for (int t = 0; t < personaflow::kHeadshotTemplateCount; ++t) {
        auto c = ctx;
        c["template_index"] = std::to_string(t);
        const auto b = personaflow::render_prompt(stage, c);
        const auto file = "headshot." + std::to_string(t) + ".user.txt";
        out.push_back({file, b.user_text == read_file(kGolden / file)});
      }
      continue;
    }
    const auto b = personaflow::render_prompt(stage, ctx);
    out.push_back({name + ".system.txt", b.system_text == read_file(kGolden / (name + ".system.txt"))});
    out.push_back({name + ".user.txt", b.user_text == read_file(kGolden / (name + ".user.txt"))});
  }
  return out;
}

}  // namespace pftest
