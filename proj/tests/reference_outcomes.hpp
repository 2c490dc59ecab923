// Published DSD-vs-SSD outcomes for the four speaker-dependent maps, encoded
// as correctness values that land on the published side of each error bar.
#ifndef VISEMELAB_TESTS_REFERENCE_OUTCOMES_HPP_
#define VISEMELAB_TESTS_REFERENCE_OUTCOMES_HPP_

#include <map>
#include <utility>

#include "visemelab/harness.hpp"

namespace reference {

// scores[p-1][n-1]: speaker p recognised with speaker n's map.
inline constexpr int kScores[4][4] = {
    {0, +1, +2, +2},
    {-1, 0, +2, +1},
    {-2, -2, 0, -1},
    {-1, +1, -1, 0},
};
inline constexpr int kTotals[4] = {-4, 0, 3, 2};

struct Outcomes {
  std::map<std::pair<int, int>, double> dsd;
  std::map<int, visemelab::Correctness> ssd;
};

inline Outcomes encode() {
  Outcomes o;
  const double baseline[4] = {0.159, 0.30, 0.45, 0.384};
  for (int p = 1; p <= 4; ++p) {
    const double se = 0.02;
    o.ssd[p] = {baseline[p - 1], se};
    for (int n = 1; n <= 4; ++n) {
      if (n == p) continue;
      const int s = kScores[p - 1][n - 1];
      const double offset = (s > 0 ? 1 : -1) * (std::abs(s) == 2 ? 2.5 : 0.5) * se;
      o.dsd[{n, p}] = baseline[p - 1] + offset;
    }
  }
  return o;
}

}  // namespace reference

#endif  // VISEMELAB_TESTS_REFERENCE_OUTCOMES_HPP_
