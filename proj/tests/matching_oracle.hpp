#pragma once

// Exhaustive reference for small assignment problems.

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "cohybrid/matcher.hpp"

namespace cohybrid::testing {

// Enumerates every injective map from the smaller side into the larger one.
// Costs are summed in query order so results compare bit-for-bit with the
// solver. Among equal totals the lexicographically smallest pair list wins.
inline MatchResult brute_force_match(const CostMatrix& c) {
  const std::size_t rows = c.rows(), cols = c.cols();
  const bool by_row = rows <= cols;
  const std::size_t small = by_row ? rows : cols;
  const std::size_t large = by_row ? cols : rows;

  std::vector<int> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  MatchResult best;
  best.total_cost = std::numeric_limits<double>::infinity();
  bool have = false;
  do {
    std::vector<MatchPair> pairs;
    for (std::size_t s = 0; s < small; ++s)
      pairs.push_back(by_row ? MatchPair{static_cast<int>(s), perm[s]}
                             : MatchPair{perm[s], static_cast<int>(s)});
    std::sort(pairs.begin(), pairs.end());
    double total = 0.0;
    for (const auto& p : pairs) total += c(p.query, p.gt);
    if (!have || total < best.total_cost || (total == best.total_cost && pairs < best.pairs)) {
      best.pairs = std::move(pairs);
      best.total_cost = total;
      have = true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace cohybrid::testing
