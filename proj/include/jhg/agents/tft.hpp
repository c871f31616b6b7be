#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "jhg/agents/apportion.hpp"
#include "jhg/agents/parameterization.hpp"
#include "jhg/engine.hpp"

namespace jhg {

/// Roles of the seven behavior-matching parameters (all on [0,100]).
namespace tft {
enum Param : std::size_t {
  kFirstKeep = 0,     // fraction of tokens kept in round 1
  kFirstBreadth = 1,  // fraction of other players given to in round 1
  kMatchMode = 2,     // < 50 match received tokens, >= 50 match received influence
  kRetaliation = 3,   // attack-for-attack scale
  kSurplusGive = 4,   // share of unspent budget handed out as extra gives (rest kept)
  kShortfall = 5,     // 0 = serve largest contributors first, 100 = proportional cuts
  kKeepFloor = 6,     // tokens always kept
};

/// Signed per-player amounts that the agent tries to mirror this round.
inline std::vector<int> received_targets(const StateView& view, const Parameterization& params) {
  const std::size_t n = view.players();
  std::vector<int> target(n, 0);
  const AllocationMatrix& last = *view.last_round();
  const double self_weight = view.popularity[view.self] / view.tokens_per_round;
  const bool by_influence = params[kMatchMode] >= 50.0 && self_weight > 0.0;
  for (PlayerId j = 0; j < n; ++j) {
    if (j == view.self) continue;
    if (by_influence) {
      // Tokens whose influence on j would equal j's current influence on us.
      const double equiv = (*view.influence)(j, view.self) / self_weight;
      target[j] = std::clamp(detail::round_tokens(equiv), -view.tokens_per_round, view.tokens_per_round);
    } else {
      target[j] = last(j, view.self);
    }
  }
  return target;
}

inline AllocationVector first_round(const StateView& view, const Parameterization& params) {
  const std::size_t n = view.players();
  const int budget = view.tokens_per_round;
  AllocationVector a(view.self, std::vector<int>(n, 0));
  const int keep = std::clamp(detail::round_tokens(budget * params.unit(kFirstKeep)), 0, budget);
  int give = budget - keep;
  std::vector<PlayerId> others;
  for (PlayerId j = 0; j < n; ++j)
    if (j != view.self) others.push_back(j);
  std::stable_sort(others.begin(), others.end(),
                   [&](PlayerId x, PlayerId y) { return view.popularity[x] > view.popularity[y]; });
  const auto breadth = static_cast<std::size_t>(std::clamp(
      detail::round_tokens(static_cast<double>(others.size()) * params.unit(kFirstBreadth)), 1,
      static_cast<int>(others.size())));
  const int each = give / static_cast<int>(breadth);
  int extra = give % static_cast<int>(breadth);
  for (std::size_t k = 0; k < breadth; ++k) {
    a.tokens[others[k]] = each + (extra > 0 ? 1 : 0);
    if (extra > 0) --extra;
  }
  a.tokens[view.self] = keep;
  return a;
}

}  // namespace tft

/// Behavior matching: reciprocate last round's gives and attacks within the
/// budget left after the keep floor, then settle any surplus or shortfall.
inline AllocationVector tft_policy(const StateView& view, const Parameterization& params, Rng& /*unused*/) {
  using namespace tft;
  if (view.history.empty()) return first_round(view, params);

  const std::size_t n = view.players();
  const int budget = view.tokens_per_round;
  const std::vector<int> received = received_targets(view, params);

  std::vector<int> want_give(n, 0), want_attack(n, 0);
  for (PlayerId j = 0; j < n; ++j) {
    if (received[j] > 0) want_give[j] = received[j];
    if (received[j] < 0) want_attack[j] = detail::round_tokens(-received[j] * params.unit(kRetaliation));
  }

  const int keep_floor = std::clamp(detail::round_tokens(budget * params.unit(kKeepFloor)), 0, budget);
  const int spendable = budget - keep_floor;
  const int demand_give = std::accumulate(want_give.begin(), want_give.end(), 0);
  const int demand = demand_give + std::accumulate(want_attack.begin(), want_attack.end(), 0);

  std::vector<int> give(n, 0), attack(n, 0);
  if (demand <= spendable) {
    give = want_give;
    attack = want_attack;
    const int surplus = spendable - demand;
    const int extra = detail::round_tokens(surplus * params.unit(kSurplusGive));
    if (demand_give > 0 && extra > 0)
      for (PlayerId j = 0; j < n; ++j) give[j] += extra * want_give[j] / demand_give;  // floor; leftover kept
  } else {
    // Proportional part first, then the rest by descending demand.
    std::vector<double> weight(2 * n);
    for (PlayerId j = 0; j < n; ++j) {
      weight[j] = want_give[j];
      weight[n + j] = want_attack[j];
    }
    const int proportional = detail::round_tokens(spendable * params.unit(kShortfall));
    std::vector<int> got(2 * n, 0);
    for (std::size_t k = 0; k < 2 * n; ++k) got[k] = static_cast<int>(proportional * weight[k] / demand);
    int remaining = spendable - std::accumulate(got.begin(), got.end(), 0);
    std::vector<std::size_t> order(2 * n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (weight[x] != weight[y]) return weight[x] > weight[y];
      return x % n < y % n;
    });
    for (std::size_t k : order) {
      if (remaining <= 0) break;
      const int take = std::min(remaining, static_cast<int>(weight[k]) - got[k]);
      got[k] += take;
      remaining -= take;
    }
    for (PlayerId j = 0; j < n; ++j) {
      give[j] = got[j];
      attack[j] = got[n + j];
    }
  }

  AllocationVector a(view.self, std::vector<int>(n, 0));
  int used = 0;
  for (PlayerId j = 0; j < n; ++j) {
    if (j == view.self) continue;
    a.tokens[j] = give[j] - attack[j];
    used += give[j] + attack[j];
  }
  a.tokens[view.self] = budget - used;
  return a;
}

}  // namespace jhg
