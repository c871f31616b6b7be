#pragma once

#include <cmath>
#include <vector>

#include "jhg/engine.hpp"

namespace jhg {

/// Action mix of the Random baseline, in give/keep/take order.
struct RandomProfile {
  double give_share = 0.0;
  double keep_share = 1.0;
  double take_share = 0.0;
};

inline void validate(const RandomProfile& p) {
  for (double s : {p.give_share, p.keep_share, p.take_share})
    if (!(s >= 0.0 && s <= 1.0)) throw Error("random profile shares must lie in [0,1]");
  if (std::abs(p.give_share + p.keep_share + p.take_share - 1.0) > 1e-9)
    throw Error("random profile shares must sum to 1");
}

/// Each token independently becomes a give, keep, or take. Take targets are
/// drawn first, then give targets avoid them so no entry nets out; if every
/// other player is already a take target the give tokens are kept instead.
inline AllocationVector random_policy(const StateView& view, const RandomProfile& profile, Rng& rng) {
  const std::size_t n = view.players();
  const int budget = view.tokens_per_round;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int gives = 0, takes = 0, keeps = 0;
  for (int t = 0; t < budget; ++t) {
    const double r = u(rng);
    if (r < profile.give_share)
      ++gives;
    else if (r < profile.give_share + profile.keep_share)
      ++keeps;
    else
      ++takes;
  }

  AllocationVector a(view.self, std::vector<int>(n, 0));
  std::vector<PlayerId> others;
  for (PlayerId j = 0; j < n; ++j)
    if (j != view.self) others.push_back(j);
  std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
  for (int t = 0; t < takes; ++t) --a.tokens[others[pick(rng)]];

  std::vector<PlayerId> givable;
  for (PlayerId j : others)
    if (a.tokens[j] == 0) givable.push_back(j);
  if (givable.empty()) {
    keeps += gives;
  } else {
    std::uniform_int_distribution<std::size_t> pick_give(0, givable.size() - 1);
    for (int t = 0; t < gives; ++t) ++a.tokens[givable[pick_give(rng)]];
  }
  a.tokens[view.self] = keeps;
  return a;
}

}  // namespace jhg
