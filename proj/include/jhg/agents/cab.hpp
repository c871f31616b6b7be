#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "jhg/agents/apportion.hpp"
#include "jhg/agents/parameterization.hpp"
#include "jhg/engine.hpp"

namespace jhg {

/// Community-aware behavior. A round is decided in three steps: cluster the
/// players from past flows, pick a group to support or join, then split the
/// budget between keeping, supporting the group, and answering threats.
/// The thirty parameters below all live on [0,100] and are rescaled here.
namespace cab {

enum Param : std::size_t {
  // group detection
  kMemory = 0,           // per-round discount of older flows
  kLookback = 1,         // rounds of history considered (1..30)
  kAttackWeight = 2,     // how strongly attacks offset gives in pair affinity (0..2)
  kPopularityWeight = 3, // exponent on sender popularity when weighting flows
  kInfluenceMix = 4,     // blend of token flows and influence matrix
  kReciprocity = 5,      // pair affinity from mean (0) to min (100) of both directions
  kLinkThreshold = 6,    // affinity needed to cluster, as a share of a uniform spread
  kLinkage = 7,          // single (0) to average (100) linkage when merging groups
  // group selection
  kStrengthWeight = 8,
  kSecurityWeight = 9,
  kProfitWeight = 10,
  kCohesionWeight = 11,
  kDesiredSize = 12,     // desired group size as a fraction of all players
  kSizeWeight = 13,
  kStabilityBonus = 14,  // bonus for staying in the current group
  kStrengthTarget = 15,  // popularity share at which strength saturates
  kNewGroupPartners = 16,// partners recruited into a freshly formed group
  kDominanceWeight = 17, // penalty for being much weaker than the group's leader
  // allocation
  kKeepBase = 18,        // baseline keep, up to half the budget
  kThreatKeep = 19,      // extra keep per unit of incoming attack
  kRetaliation = 20,     // budget share spent attacking aggressors
  kThreatThreshold = 21, // attack rate (share of N/2) before a player counts as a threat
  kPreemptive = 22,      // budget share spent attacking the strongest outsider
  kAggressorTilt = 23,   // popularity exponent when splitting attacks among aggressors
  kEstablishment = 24,   // in-group gives: reciprocal (0) to uniform (100)
  kPopularityTilt = 25,  // popularity exponent on in-group give weights
  kConcentration = 26,   // fraction of mates that receive gives (20%..100%)
  kOutgroupGive = 27,    // share of give budget returned to outsiders who gave to us
  kThreatMemory = 28,    // per-round discount when measuring aggression
  kGranularity = 29,     // minimum tokens per give recipient
};

using Partition = std::vector<std::vector<PlayerId>>;

/// Flow summaries computed once per decision.
struct Flows {
  std::size_t n = 0;
  RealMatrix give;    // discounted mean tokens given i -> j per round
  RealMatrix attack;  // same for attacks, using the threat discount
  RealMatrix affinity;  // symmetric pair affinity in token units
  double uniform_rate = 0.0;  // N / (n-1)
};

inline double discounted_rate(const StateView& view, std::size_t lookback, double discount, bool attacks,
                              PlayerId i, PlayerId j) {
  const std::size_t t = view.history.size();
  const std::size_t first = t > lookback ? t - lookback : 0;
  double num = 0.0, den = 0.0, w = 1.0;
  for (std::size_t s = t; s-- > first;) {
    const int x = view.history[s](i, j);
    num += w * (attacks ? std::max(0, -x) : std::max(0, x));
    den += w;
    w *= discount;
  }
  return den > 0.0 ? num / den : 0.0;
}

inline Flows compute_flows(const StateView& view, const Parameterization& p) {
  const std::size_t n = view.players();
  Flows f;
  f.n = n;
  f.give = RealMatrix(n, n);
  f.attack = RealMatrix(n, n);
  f.affinity = RealMatrix(n, n);
  f.uniform_rate = static_cast<double>(view.tokens_per_round) / static_cast<double>(n - 1);
  if (view.history.empty()) return f;

  const auto lookback = static_cast<std::size_t>(1 + detail::round_tokens(29.0 * p.unit(kLookback)));
  const double memory = p.unit(kMemory);
  const double threat_memory = p.unit(kThreatMemory);
  for (PlayerId i = 0; i < n; ++i)
    for (PlayerId j = 0; j < n; ++j) {
      if (i == j) continue;
      f.give(i, j) = discounted_rate(view, lookback, memory, false, i, j);
      f.attack(i, j) = discounted_rate(view, lookback, threat_memory, true, i, j);
    }

  double mean_pop = 0.0;
  for (double x : view.popularity) mean_pop += x;
  mean_pop /= static_cast<double>(n);
  const double beta = p.unit(kPopularityWeight);
  const double kappa = 2.0 * p.unit(kAttackWeight);
  const double mix = p.unit(kInfluenceMix);
  const double rho = p.unit(kReciprocity);
  const double token_weight = mean_pop > 0.0 ? mean_pop / view.tokens_per_round : 0.0;

  RealMatrix rate(n, n);
  for (PlayerId i = 0; i < n; ++i) {
    const double sender = mean_pop > 0.0 ? std::pow(view.popularity[i] / mean_pop, beta) : 1.0;
    for (PlayerId j = 0; j < n; ++j) {
      if (i == j) continue;
      const double tokens = sender * (f.give(i, j) - kappa * discounted_rate(view, lookback, memory, true, i, j));
      const double infl = token_weight > 0.0 ? (*view.influence)(i, j) / token_weight : 0.0;
      rate(i, j) = (1.0 - mix) * tokens + mix * infl;
    }
  }
  for (PlayerId i = 0; i < n; ++i)
    for (PlayerId j = 0; j < n; ++j) {
      if (i == j) continue;
      const double mean = 0.5 * (rate(i, j) + rate(j, i));
      const double lo = std::min(rate(i, j), rate(j, i));
      f.affinity(i, j) = (1.0 - rho) * mean + rho * lo;
    }
  return f;
}

inline double link_threshold(const Flows& f, const Parameterization& p) {
  return (0.05 + 0.95 * p.unit(kLinkThreshold)) * f.uniform_rate;
}

/// Agglomerative clustering: repeatedly merge the two groups with the highest
/// linkage score while it reaches the link threshold.
inline Partition assign_groups(const Flows& f, const Parameterization& p) {
  const std::size_t n = f.n;
  Partition groups(n);
  for (PlayerId i = 0; i < n; ++i) groups[i] = {i};
  const double threshold = link_threshold(f, p);
  const double avg = p.unit(kLinkage);
  for (;;) {
    double best = -1.0;
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < groups.size(); ++a)
      for (std::size_t b = a + 1; b < groups.size(); ++b) {
        double mx = -1e300, sum = 0.0;
        for (PlayerId x : groups[a])
          for (PlayerId y : groups[b]) {
            mx = std::max(mx, f.affinity(x, y));
            sum += f.affinity(x, y);
          }
        const double mean = sum / static_cast<double>(groups[a].size() * groups[b].size());
        const double score = (1.0 - avg) * mx + avg * mean;
        if (score > best) {
          best = score;
          ba = a;
          bb = b;
        }
      }
    if (groups.size() < 2 || best <= 0.0 || best < threshold) break;
    groups[ba].insert(groups[ba].end(), groups[bb].begin(), groups[bb].end());
    std::sort(groups[ba].begin(), groups[ba].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  std::sort(groups.begin(), groups.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return groups;
}

inline Partition cab_assign_groups(const StateView& view, const Parameterization& p) {
  return assign_groups(compute_flows(view, p), p);
}

inline bool contains(const std::vector<PlayerId>& g, PlayerId x) {
  return std::find(g.begin(), g.end(), x) != g.end();
}

/// Desirability of a candidate group from the point of view of `view.self`.
inline double score_group(const StateView& view, const Flows& f, const std::vector<PlayerId>& group,
                          bool current, const Parameterization& p) {
  const std::size_t n = view.players();
  const PlayerId self = view.self;
  const double total_pop = std::accumulate(view.popularity.begin(), view.popularity.end(), 0.0);
  double group_pop = 0.0, leader = 0.0;
  for (PlayerId i : group) {
    group_pop += view.popularity[i];
    leader = std::max(leader, view.popularity[i]);
  }
  const double share = total_pop > 0.0 ? group_pop / total_pop : 0.0;
  const double target = std::max(0.05, p.unit(kStrengthTarget));
  const double strength = std::min(1.0, share / target);

  const double c = static_cast<double>(group.size());
  const double budget = static_cast<double>(view.tokens_per_round);
  double outside_attacks = 0.0, incoming_gives = 0.0;
  for (PlayerId i : group)
    for (PlayerId j = 0; j < n; ++j)
      if (!contains(group, j)) outside_attacks += f.attack(j, i);
  for (PlayerId j : group)
    if (j != self) incoming_gives += f.give(j, self);
  const double security = 1.0 - std::min(1.0, outside_attacks / (c * budget));
  const double profit = std::min(1.0, incoming_gives / budget);

  double cohesion = 0.0;
  if (group.size() > 1) {
    double sum = 0.0;
    for (std::size_t a = 0; a < group.size(); ++a)
      for (std::size_t b = a + 1; b < group.size(); ++b)
        sum += std::clamp(f.affinity(group[a], group[b]) / f.uniform_rate, -1.0, 1.0);
    cohesion = sum / (c * (c - 1.0) / 2.0);
  }
  const double size_gap = std::abs(c / static_cast<double>(n) - p.unit(kDesiredSize));
  const double dominance = leader > 0.0 ? 1.0 - view.popularity[self] / leader : 0.0;

  return p.unit(kStrengthWeight) * strength + p.unit(kSecurityWeight) * security + p.unit(kProfitWeight) * profit +
         p.unit(kCohesionWeight) * cohesion - p.unit(kSizeWeight) * size_gap +
         (current ? p.unit(kStabilityBonus) : 0.0) - p.unit(kDominanceWeight) * dominance;
}

/// Candidates are every group extended by self, plus a fresh group of self
/// and its strongest partners. Ties keep the earliest candidate.
inline std::vector<PlayerId> select_group(const StateView& view, const Flows& f, const Partition& partition,
                                          const Parameterization& p) {
  const PlayerId self = view.self;
  std::vector<std::vector<PlayerId>> candidates;
  std::vector<bool> current;
  for (const auto& g : partition) {
    std::vector<PlayerId> c = g;
    const bool mine = contains(g, self);
    if (!mine) {
      c.push_back(self);
      std::sort(c.begin(), c.end());
    }
    candidates.push_back(std::move(c));
    current.push_back(mine);
  }

  const std::size_t n = view.players();
  const auto partners = static_cast<std::size_t>(detail::round_tokens(p.unit(kNewGroupPartners) * (n - 1)));
  if (partners > 0) {
    std::vector<PlayerId> others;
    for (PlayerId j = 0; j < n; ++j)
      if (j != self && f.affinity(self, j) > 0.0) others.push_back(j);
    std::stable_sort(others.begin(), others.end(),
                     [&](PlayerId a, PlayerId b) { return f.affinity(self, a) > f.affinity(self, b); });
    if (!others.empty()) {
      others.resize(std::min(partners, others.size()));
      others.push_back(self);
      std::sort(others.begin(), others.end());
      if (std::find(candidates.begin(), candidates.end(), others) == candidates.end()) {
        candidates.push_back(std::move(others));
        current.push_back(false);
      }
    }
  }

  std::size_t best = 0;
  double best_score = -1e300;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double s = score_group(view, f, candidates[k], current[k], p);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return candidates[best];
}

/// With no history there is nothing to cluster on: the opening group is self
/// plus randomly drawn partners, sized by the desired group size.
inline std::vector<PlayerId> opening_group(const StateView& view, const Parameterization& p, Rng& rng) {
  const std::size_t n = view.players();
  const int want = std::clamp(detail::round_tokens(p.unit(kDesiredSize) * static_cast<double>(n)), 1,
                              static_cast<int>(n));
  std::vector<PlayerId> others;
  for (PlayerId j = 0; j < n; ++j)
    if (j != view.self) others.push_back(j);
  std::shuffle(others.begin(), others.end(), rng);
  others.resize(static_cast<std::size_t>(want - 1));
  others.push_back(view.self);
  std::sort(others.begin(), others.end());
  return others;
}

inline std::vector<PlayerId> cab_select_group(const StateView& view, const Partition& partition,
                                              const Parameterization& p) {
  return select_group(view, compute_flows(view, p), partition, p);
}

inline AllocationVector allocate(const StateView& view, const Flows& f, const std::vector<PlayerId>& target,
                                 const Parameterization& p) {
  const std::size_t n = view.players();
  const PlayerId self = view.self;
  const int budget = view.tokens_per_round;
  const double half = 0.5 * budget;
  AllocationVector a(self, std::vector<int>(n, 0));

  double incoming = 0.0;
  for (PlayerId j = 0; j < n; ++j) incoming += f.attack(j, self);
  const double threat_level = std::min(1.0, incoming / budget);
  int keep = std::min(budget, detail::round_tokens(budget * 0.5 * p.unit(kKeepBase)) +
                                  detail::round_tokens(budget * p.unit(kThreatKeep) * threat_level));
  const int spend = budget - keep;

  // Out-of-group players attacking self or a mate at or above the threshold.
  const double trigger = p.unit(kThreatThreshold) * half;
  std::vector<double> aggression(n, 0.0);
  bool any_aggressor = false;
  for (PlayerId j = 0; j < n; ++j) {
    if (j == self || contains(target, j)) continue;
    double rate = 0.0;
    for (PlayerId m : target) rate += f.attack(j, m);
    if (rate > 0.0 && rate >= trigger) {
      double mean_pop = std::accumulate(view.popularity.begin(), view.popularity.end(), 0.0) / n;
      const double tilt = mean_pop > 0.0 ? std::pow(view.popularity[j] / mean_pop, 2.0 * p.unit(kAggressorTilt)) : 1.0;
      aggression[j] = rate * tilt + 1e-12;
      any_aggressor = true;
    }
  }
  const std::vector<int> attacks =
      detail::apportion(any_aggressor ? detail::round_tokens(spend * p.unit(kRetaliation)) : 0, aggression);
  const int attack_budget = std::accumulate(attacks.begin(), attacks.end(), 0);
  for (PlayerId j = 0; j < n; ++j) a.tokens[j] -= attacks[j];

  // Preemptive strike on the strongest non-threatening outsider when our side is strong.
  int preempt = 0;
  PlayerId preempt_target = n;
  if (!any_aggressor && p.unit(kPreemptive) > 0.0) {
    const double total = std::accumulate(view.popularity.begin(), view.popularity.end(), 0.0);
    double ours = 0.0;
    for (PlayerId m : target) ours += view.popularity[m];
    if (total > 0.0 && ours / total >= 0.5) {
      double best = -1.0;
      for (PlayerId j = 0; j < n; ++j)
        if (!contains(target, j) && view.popularity[j] > best) {
          best = view.popularity[j];
          preempt_target = j;
        }
      if (preempt_target < n) {
        preempt = detail::round_tokens(spend * 0.5 * p.unit(kPreemptive));
        a.tokens[preempt_target] -= preempt;
      }
    }
  }

  int give_budget = spend - attack_budget - preempt;

  // Return gives to outsiders who gave to us last round.
  std::vector<double> outsider(n, 0.0);
  if (const AllocationMatrix* last = view.last_round())
    for (PlayerId j = 0; j < n; ++j)
      if (j != self && !contains(target, j) && aggression[j] == 0.0 && j != preempt_target && (*last)(j, self) > 0)
        outsider[j] = (*last)(j, self);
  const int outsider_budget = detail::round_tokens(give_budget * 0.5 * p.unit(kOutgroupGive));
  const std::vector<int> outsider_gives = detail::apportion(outsider_budget, outsider);
  for (PlayerId j = 0; j < n; ++j) {
    a.tokens[j] += outsider_gives[j];
    give_budget -= outsider_gives[j];
  }

  // Support and establishment gives inside the target group.
  std::vector<PlayerId> mates;
  for (PlayerId m : target)
    if (m != self) mates.push_back(m);
  if (!mates.empty() && give_budget > 0) {
    double recv_total = 0.0;
    for (PlayerId m : mates) recv_total += f.give(m, self);
    const double mean_pop = std::accumulate(view.popularity.begin(), view.popularity.end(), 0.0) / n;
    const double uniform = p.unit(kEstablishment);
    std::vector<double> w(mates.size());
    for (std::size_t k = 0; k < mates.size(); ++k) {
      const double recip = recv_total > 0.0 ? f.give(mates[k], self) / recv_total : 1.0 / mates.size();
      const double base = (1.0 - uniform) * recip + uniform / mates.size();
      const double tilt =
          mean_pop > 0.0 ? std::pow(view.popularity[mates[k]] / mean_pop, 2.0 * p.unit(kPopularityTilt)) : 1.0;
      w[k] = base * tilt + 1e-12;
    }
    const int min_each = 1 + detail::round_tokens(p.unit(kGranularity) * budget / 4.0);
    std::size_t slots = std::max<std::size_t>(
        1, static_cast<std::size_t>(detail::round_tokens((0.2 + 0.8 * p.unit(kConcentration)) * mates.size())));
    slots = std::min(slots, std::max<std::size_t>(1, static_cast<std::size_t>(give_budget / min_each)));
    std::vector<std::size_t> order(mates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return w[x] > w[y]; });
    std::vector<double> chosen(mates.size(), 0.0);
    for (std::size_t k = 0; k < slots && k < order.size(); ++k) chosen[order[k]] = w[order[k]];
    const std::vector<int> gives = detail::apportion(give_budget, chosen);
    for (std::size_t k = 0; k < mates.size(); ++k) {
      a.tokens[mates[k]] += gives[k];
      give_budget -= gives[k];
    }
  }

  keep += give_budget;
  a.tokens[self] = keep;
  return a;
}

}  // namespace cab

inline AllocationVector cab_allocate(const StateView& view, const std::vector<PlayerId>& target_group,
                                     const Parameterization& params, Rng& /*unused*/) {
  return cab::allocate(view, cab::compute_flows(view, params), target_group, params);
}

inline AllocationVector cab_policy(const StateView& view, const Parameterization& params, Rng& rng) {
  const cab::Flows flows = cab::compute_flows(view, params);
  const std::vector<PlayerId> target =
      view.history.empty() ? cab::opening_group(view, params, rng)
                           : cab::select_group(view, flows, cab::assign_groups(flows, params), params);
  return cab::allocate(view, flows, target, params);
}

}  // namespace jhg
