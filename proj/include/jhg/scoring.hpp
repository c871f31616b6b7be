#pragma once

#include <cmath>
#include <cstdlib>
#include <memory>
#include <vector>

#include "jhg/agents/policy.hpp"
#include "jhg/engine.hpp"

namespace jhg {

/// The four parts of the allocation-match score. Each of the first three is
/// in [0,1]; the conflict penalty is in [0,1).
struct ScoreParts {
  double give = 0.0;
  double take = 0.0;
  double keep = 0.0;
  double conflict = 0.0;

  double total() const { return give + take + keep - conflict; }
};

namespace detail {

inline double overlap(std::size_t both, std::size_t either) {
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace detail

/// How well allocation `b` matches target allocation `a` (same owner and budget).
inline ScoreParts allocation_score_parts(const AllocationVector& a, const AllocationVector& b) {
  if (a.size() != b.size()) throw Error("allocation_score: length mismatch");
  if (a.owner != b.owner) throw Error("allocation_score: owner mismatch");
  const std::size_t n = a.size();
  long budget_a = 0, budget_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    budget_a += std::labs(a.tokens[i]);
    budget_b += std::labs(b.tokens[i]);
  }
  if (budget_a != budget_b || budget_a == 0) throw Error("allocation_score: token budgets differ");
  const double N = static_cast<double>(budget_a);

  std::size_t give_a = 0, give_b = 0, give_both = 0, give_either = 0;
  std::size_t take_a = 0, take_b = 0, take_both = 0, take_either = 0, conflicts = 0;
  double given_a = 0, given_b = 0, taken_a = 0, taken_b = 0, give_diff = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == a.owner) continue;
    const int x = a.tokens[i], y = b.tokens[i];
    give_a += x > 0;
    give_b += y > 0;
    give_both += x > 0 && y > 0;
    give_either += x > 0 || y > 0;
    take_a += x < 0;
    take_b += y < 0;
    take_both += x < 0 && y < 0;
    take_either += x < 0 || y < 0;
    conflicts += (x > 0 && y < 0) || (x < 0 && y > 0);
    given_a += std::max(0, x);
    given_b += std::max(0, y);
    taken_a += std::max(0, -x);
    taken_b += std::max(0, -y);
    give_diff += std::abs(std::max(0, x) - std::max(0, y));
  }
  const double nn = static_cast<double>(n);

  ScoreParts s;
  s.give = (1.0 - std::abs(static_cast<double>(give_b) - static_cast<double>(give_a)) / nn +
            detail::overlap(give_both, give_either) + 1.0 - std::abs(given_b - given_a) / N +
            1.0 - give_diff / (2.0 * N)) /
           4.0;
  s.take = (((take_a > 0) == (take_b > 0) ? 1.0 : 0.0) + 1.0 - std::abs(taken_b - taken_a) / N +
            detail::overlap(take_both, take_either)) /
           3.0;
  s.keep = 1.0 - std::abs(b.keep() - a.keep()) / N;
  s.conflict = static_cast<double>(conflicts) / nn;
  return s;
}

inline double allocation_score(const AllocationVector& a, const AllocationVector& b) {
  return allocation_score_parts(a, b).total();
}

enum class DistanceKind { Score, MeanSquared };

/// Distance used for fitting: the negated score (default) or the mean
/// squared entry difference.
inline double allocation_distance(const AllocationVector& a, const AllocationVector& b,
                                  DistanceKind kind = DistanceKind::Score) {
  if (kind == DistanceKind::Score) return -allocation_score(a, b);
  if (a.size() != b.size()) throw Error("allocation_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(a.tokens[i] - b.tokens[i], 2);
  return s / static_cast<double>(a.size());
}

/// One focal player's trajectory inside a logged game.
struct PlayerGame {
  std::shared_ptr<const GameLog> log;
  PlayerId focal = 0;
  int rounds = 0;

  StateView view(int t) const { return log->view(focal, t); }
  AllocationVector allocation(int t) const { return row_allocation(log->allocations.at(t), focal); }
};

inline PlayerGame make_player_game(std::shared_ptr<const GameLog> log, PlayerId focal, int max_rounds = 1 << 30) {
  if (!log) throw Error("player game needs a log");
  if (focal >= log->config.player_count) throw Error("focal player out of range");
  const int rounds = std::min(log->rounds(), max_rounds);
  if (rounds < 1) throw Error("player game needs at least one round");
  return PlayerGame{std::move(log), focal, rounds};
}

inline constexpr std::uint64_t kEvaluationSeed = 0;

/// Mean distance between the recorded allocations and the model's choices
/// when it is shown the recorded history before every round.
inline double player_game_error(const Parameterization& params, const PlayerGame& game,
                                DistanceKind kind = DistanceKind::Score) {
  if (!game.log || game.rounds < 1) throw Error("invalid player game");
  double sum = 0.0;
  for (int t = 0; t < game.rounds; ++t) {
    Rng rng = derive_rng(kEvaluationSeed, game.focal, static_cast<std::uint64_t>(t));
    AllocationVector predicted = decide(params, game.view(t), rng);
    sum += allocation_distance(game.allocation(t), predicted, kind);
  }
  return sum / game.rounds;
}

}  // namespace jhg
