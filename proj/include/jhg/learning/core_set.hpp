#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "jhg/types.hpp"

namespace jhg {

/// errors[p][g] is the error of parameterization p on player game g.
using ErrorTable = std::vector<std::vector<double>>;

/// For each parameterization, the sorted indices of the games where its error
/// is within `epsilon` of that game's best error.
inline std::vector<std::vector<std::size_t>> top_performers(const ErrorTable& errors, double epsilon) {
  if (errors.empty()) throw Error("top_performers: empty parameterization pool");
  const std::size_t games = errors.front().size();
  if (games == 0) throw Error("top_performers: no player games");
  if (!(epsilon > 0.0)) throw Error("top_performers: epsilon must be positive");
  for (const auto& row : errors)
    if (row.size() != games) throw Error("top_performers: ragged error table");

  std::vector<double> best(games, std::numeric_limits<double>::infinity());
  for (const auto& row : errors)
    for (std::size_t g = 0; g < games; ++g) best[g] = std::min(best[g], row[g]);

  std::vector<std::vector<std::size_t>> tops(errors.size());
  for (std::size_t p = 0; p < errors.size(); ++p)
    for (std::size_t g = 0; g < games; ++g)
      if (errors[p][g] - best[g] < epsilon) tops[p].push_back(g);
  return tops;
}

/// Greedy cover: repeatedly take the parameterization that tops the most
/// not-yet-covered games (lowest index on ties) until every game is covered.
inline std::vector<std::size_t> find_core_set(std::size_t game_count,
                                              const std::vector<std::vector<std::size_t>>& tops) {
  std::vector<char> uncovered(game_count, 1);
  std::size_t remaining = game_count;
  std::vector<char> chosen(tops.size(), 0);
  std::vector<std::size_t> core;
  while (remaining > 0) {
    std::size_t best = tops.size(), best_gain = 0;
    for (std::size_t p = 0; p < tops.size(); ++p) {
      if (chosen[p]) continue;
      std::size_t gain = 0;
      for (std::size_t g : tops[p]) gain += g < game_count && uncovered[g];
      if (gain > best_gain) {
        best_gain = gain;
        best = p;
      }
    }
    if (best == tops.size()) throw Error("find_core_set: some player game has no top performer");
    chosen[best] = 1;
    core.push_back(best);
    for (std::size_t g : tops[best])
      if (uncovered[g]) {
        uncovered[g] = 0;
        --remaining;
      }
  }
  return core;
}

}  // namespace jhg
