#pragma once

#include <algorithm>
#include <array>

#include "personaflow/rubric.hpp"

namespace pftest {

/// Scoring table written out independently of the library.
inline constexpr std::array<int, 10> kOracleWeights = {20, 20, 15, 15, 10, 10, 10, -20, -30, -40};

inline int oracle_points(unsigned flags) {
  int sum = 0;
  for (int i = 0; i < 10; ++i)
    if (flags & (1u << i)) sum += kOracleWeights[static_cast<std::size_t>(i)];
  return std::clamp(sum, 0, 100);
}

struct OracleSweep {
  int mismatches = 0;
  int hits_zero = 0;
  int hits_hundred = 0;
};

inline OracleSweep sweep_rubric() {
  OracleSweep s;
  for (unsigned flags = 0; flags < 1024; ++flags) {
    const int got = personaflow::rubric_score(personaflow::EvidenceFlags(flags)).points;
    const int want = oracle_points(flags);
    if (got != want) ++s.mismatches;
    // The positive weights sum to exactly 100, so the upper bound is reached
    // without clamping; the lower bound is reached by clamping negative sums.
    if (got == 0) ++s.hits_zero;
    if (got == 100) ++s.hits_hundred;
  }
  return s;
}

}  // namespace pftest
