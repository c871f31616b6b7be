#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jhg/types.hpp"

namespace jhg {

inline constexpr std::size_t kMaxPlayers = 64;

/// Constants of the popularity and influence update. The defaults make mutual
/// giving grow, keeping decay slowly, and unblocked attacks pay best.
struct DynamicsConstants {
  double decay = 0.1;  // weight of this round's token impact against carried popularity
  double keep_coeff = 0.95;
  double give_coeff = 1.3;
  double steal_coeff = 1.5;
  double damage_coeff = 2.0;
  double influence_discount = 0.3;

  bool operator==(const DynamicsConstants&) const = default;
};

struct GameConfig {
  std::size_t player_count = 0;
  int tokens_per_round = 0;
  std::vector<double> initial_popularity;
  int max_rounds = 1;
  DynamicsConstants dynamics;

  bool operator==(const GameConfig&) const = default;
};

inline GameConfig make_config(std::size_t players, int tokens, int rounds, double popularity = 1.0) {
  return GameConfig{players, tokens, std::vector<double>(players, popularity), rounds, {}};
}

inline void validate_config(const GameConfig& c) {
  if (c.player_count < 2 || c.player_count > kMaxPlayers)
    throw Error("player_count must be in [2, " + std::to_string(kMaxPlayers) + "]");
  if (c.tokens_per_round < 1) throw Error("tokens_per_round must be positive");
  if (c.max_rounds < 1) throw Error("max_rounds must be positive");
  if (c.initial_popularity.size() != c.player_count)
    throw Error("initial_popularity has " + std::to_string(c.initial_popularity.size()) + " entries for " +
                std::to_string(c.player_count) + " players");
  for (double p : c.initial_popularity)
    if (!std::isfinite(p) || p < 0.0) throw Error("initial popularity must be finite and non-negative");
  const auto& d = c.dynamics;
  auto unit_open = [](double x) { return x > 0.0 && x < 1.0; };
  if (!unit_open(d.decay) || !unit_open(d.influence_discount))
    throw Error("decay and influence_discount must lie in (0,1)");
  if (d.keep_coeff <= 0 || d.give_coeff <= 0 || d.steal_coeff <= 0 || d.damage_coeff <= 0)
    throw Error("dynamics coefficients must be positive");
}

struct GameState {
  int round = 0;
  std::vector<double> popularity;
  RealMatrix influence;
  std::vector<AllocationMatrix> history;
};

/// What a player sees when it decides: the state at the start of a round.
struct StateView {
  PlayerId self = 0;
  int tokens_per_round = 0;
  std::span<const double> popularity;
  const RealMatrix* influence = nullptr;
  std::span<const AllocationMatrix> history;

  std::size_t players() const { return popularity.size(); }
  int round() const { return static_cast<int>(history.size()); }
  const AllocationMatrix* last_round() const { return history.empty() ? nullptr : &history.back(); }
};

inline StateView view_of(const GameState& s, PlayerId self, int tokens) {
  return StateView{self, tokens, s.popularity, &s.influence, s.history};
}

inline GameState new_game(const GameConfig& config) {
  validate_config(config);
  GameState s;
  s.popularity = config.initial_popularity;
  s.influence = RealMatrix(config.player_count, config.player_count, 0.0);
  return s;
}

/// Returns a description of the first violated rule, or nothing when valid.
inline std::optional<std::string> validate_allocation(const AllocationVector& a, const GameConfig& config) {
  if (a.size() != config.player_count)
    return "length " + std::to_string(a.size()) + " != player count " + std::to_string(config.player_count);
  if (a.owner >= a.size()) return "owner index out of range";
  if (a.tokens[a.owner] < 0) return "negative keep";
  long total = 0;
  for (int t : a.tokens) total += std::labs(t);
  if (total != config.tokens_per_round)
    return "token count " + std::to_string(total) + " != " + std::to_string(config.tokens_per_round);
  return std::nullopt;
}

struct AttackOutcome {
  double damage = 0.0;
  std::vector<double> gain_shares;
};

inline AttackOutcome attack_outcome(std::span<const double> incoming_strengths, double defense) {
  AttackOutcome out;
  out.gain_shares.assign(incoming_strengths.size(), 0.0);
  double total = 0.0;
  for (double s : incoming_strengths) total += s;
  out.damage = std::max(0.0, total - defense);
  if (total > 0.0 && out.damage > 0.0)
    for (std::size_t k = 0; k < incoming_strengths.size(); ++k)
      out.gain_shares[k] = out.damage * incoming_strengths[k] / total;
  return out;
}

/// I'(i,j) = (1-l) I(i,j) + l * x(i,j) * P_i / N. The diagonal tracks kept tokens.
inline RealMatrix update_influence(const RealMatrix& influence, const AllocationMatrix& allocations,
                                   std::span<const double> popularity, const GameConfig& config) {
  const std::size_t n = config.player_count;
  if (influence.rows() != n || allocations.rows() != n || popularity.size() != n)
    throw Error("update_influence: dimension mismatch");
  const double l = config.dynamics.influence_discount;
  RealMatrix next(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = popularity[i] / config.tokens_per_round;
    for (std::size_t j = 0; j < n; ++j) next(i, j) = (1.0 - l) * influence(i, j) + l * allocations(i, j) * w;
  }
  return next;
}

inline std::vector<double> update_popularity(std::span<const double> popularity, const AllocationMatrix& x,
                                             const GameConfig& config) {
  const std::size_t n = config.player_count;
  const auto& k = config.dynamics;
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = popularity[j] / config.tokens_per_round;

  std::vector<double> received(n, 0.0), stolen(n, 0.0), damage(n, 0.0);
  std::vector<double> strengths;
  std::vector<PlayerId> attackers;
  for (std::size_t i = 0; i < n; ++i) {
    strengths.clear();
    attackers.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (x(j, i) > 0) received[i] += x(j, i) * w[j];
      if (x(j, i) < 0) {
        strengths.push_back(-x(j, i) * w[j]);
        attackers.push_back(j);
      }
    }
    const auto outcome = attack_outcome(strengths, x(i, i) * w[i]);
    // Damage never exceeds what would drive the victim to zero, so attackers
    // cannot keep profiting from a player who has nothing left.
    const double cushion = (1.0 - k.decay) * popularity[i] + k.decay * (k.keep_coeff * x(i, i) * w[i] + k.give_coeff * received[i]);
    const double cap = cushion / (k.decay * k.damage_coeff);
    damage[i] = std::min(outcome.damage, cap);
    const double scale = outcome.damage > 0.0 ? damage[i] / outcome.damage : 0.0;
    for (std::size_t a = 0; a < attackers.size(); ++a) stolen[attackers[a]] += scale * outcome.gain_shares[a];
  }

  std::vector<double> next(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double impact = k.keep_coeff * x(j, j) * w[j] + k.give_coeff * received[j] + k.steal_coeff * stolen[j] -
                          k.damage_coeff * damage[j];
    next[j] = std::max(0.0, (1.0 - k.decay) * popularity[j] + k.decay * impact);
  }
  return next;
}

inline void check_allocations(const AllocationMatrix& x, const GameConfig& config) {
  if (x.rows() != config.player_count || x.cols() != config.player_count)
    throw Error("allocation matrix must be " + std::to_string(config.player_count) + " square");
  for (PlayerId j = 0; j < config.player_count; ++j)
    if (auto why = validate_allocation(row_allocation(x, j), config))
      throw Error("player " + std::to_string(j) + ": " + *why);
}

inline GameState resolve_round(const GameState& state, const AllocationMatrix& allocations, const GameConfig& config) {
  check_allocations(allocations, config);
  GameState next;
  next.round = state.round + 1;
  next.popularity = update_popularity(state.popularity, allocations, config);
  next.influence = update_influence(state.influence, allocations, state.popularity, config);
  next.history = state.history;
  next.history.push_back(allocations);
  return next;
}

/// A decision procedure for one seat.
using Policy = std::function<AllocationVector(const StateView&, Rng&)>;

/// Complete record of a played game: popularity and influence before every
/// round plus the final state, and every round's allocation matrix.
struct GameLog {
  GameConfig config;
  std::vector<std::vector<double>> popularity;  // rounds() + 1 snapshots
  std::vector<RealMatrix> influence;            // rounds() + 1 snapshots
  std::vector<AllocationMatrix> allocations;

  int rounds() const { return static_cast<int>(allocations.size()); }

  /// State seen by `self` at the start of round `t` (0-based).
  StateView view(PlayerId self, int t) const {
    return StateView{self, config.tokens_per_round, popularity.at(static_cast<std::size_t>(t)),
                     &influence.at(static_cast<std::size_t>(t)),
                     std::span<const AllocationMatrix>(allocations.data(), static_cast<std::size_t>(t))};
  }

  bool operator==(const GameLog&) const = default;
};

/// Plays `config.max_rounds` rounds. Seat j's decision in round t draws from
/// derive_rng(seed, j, t), so results depend only on the seed.
inline GameLog run_game(const GameConfig& config, std::span<const Policy> policies, std::uint64_t seed) {
  if (policies.size() != config.player_count) throw Error("run_game: need one policy per seat");
  GameLog log;
  log.config = config;
  GameState state = new_game(config);
  log.popularity.push_back(state.popularity);
  log.influence.push_back(state.influence);
  const std::size_t n = config.player_count;
  for (int t = 0; t < config.max_rounds; ++t) {
    AllocationMatrix x(n, n);
    for (PlayerId j = 0; j < n; ++j) {
      Rng rng = derive_rng(seed, j, static_cast<std::uint64_t>(t));
      StateView v = view_of(state, j, config.tokens_per_round);
      AllocationVector a = policies[j](v, rng);
      a.owner = j;
      if (auto why = validate_allocation(a, config))
        throw Error("seat " + std::to_string(j) + " round " + std::to_string(t + 1) + ": " + *why);
      for (std::size_t i = 0; i < n; ++i) x(j, i) = a.tokens[i];
    }
    state.popularity = update_popularity(log.popularity.back(), x, config);
    state.influence = update_influence(log.influence.back(), x, log.popularity.back(), config);
    state.history.push_back(x);
    state.round = t + 1;
    log.popularity.push_back(state.popularity);
    log.influence.push_back(state.influence);
    log.allocations.push_back(std::move(x));
  }
  return log;
}

}  // namespace jhg
