#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "jhg/agents/parameterization.hpp"
#include "jhg/learning/parallel.hpp"
#include "jhg/scoring.hpp"

namespace jhg {

struct SwarmConfig {
  std::size_t particles = 50;
  std::size_t iterations = 200;
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  double velocity_clamp = 20.0;
  DistanceKind distance = DistanceKind::Score;
  unsigned threads = 0;
};

struct PsoResult {
  Parameterization best;
  double best_error = std::numeric_limits<double>::infinity();  // summed over player games
  std::vector<double> best_per_iteration;                       // global best after init and each step
};

/// Sum of per-game errors: the quantity the swarm minimizes.
inline double total_error(const Parameterization& p, std::span<const PlayerGame> games,
                          DistanceKind kind = DistanceKind::Score) {
  double s = 0.0;
  for (const auto& g : games) s += player_game_error(p, g, kind);
  return s;
}

/// Global-best particle swarm over [0,100]^m. Random draws happen serially
/// in particle order, so results do not depend on the thread count.
inline PsoResult pso_fit(ModelKind kind, std::span<const PlayerGame> games, const SwarmConfig& cfg, Rng& rng) {
  if (games.empty()) throw Error("pso_fit: no player games");
  if (cfg.particles == 0) throw Error("pso_fit: empty swarm");
  const std::size_t dim = param_count(kind);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> vel(-cfg.velocity_clamp, cfg.velocity_clamp);

  std::vector<Parameterization> pos(cfg.particles);
  std::vector<std::vector<double>> v(cfg.particles, std::vector<double>(dim));
  for (std::size_t k = 0; k < cfg.particles; ++k) {
    pos[k] = sample_parameterization(kind, rng);
    for (double& x : v[k]) x = vel(rng);
  }

  std::vector<double> err(cfg.particles);
  auto evaluate = [&] {
    parallel_for(
        cfg.particles, [&](std::size_t k) { err[k] = total_error(pos[k], games, cfg.distance); }, cfg.threads);
  };
  evaluate();
  std::vector<Parameterization> personal = pos;
  std::vector<double> personal_err = err;
  PsoResult r;
  auto update_global = [&] {
    for (std::size_t k = 0; k < cfg.particles; ++k)
      if (personal_err[k] < r.best_error) {
        r.best_error = personal_err[k];
        r.best = personal[k];
      }
    r.best_per_iteration.push_back(r.best_error);
  };
  update_global();

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t k = 0; k < cfg.particles; ++k)
      for (std::size_t d = 0; d < dim; ++d) {
        const double r1 = unit(rng), r2 = unit(rng);
        double nv = cfg.inertia * v[k][d] + cfg.cognitive * r1 * (personal[k].values[d] - pos[k].values[d]) +
                    cfg.social * r2 * (r.best.values[d] - pos[k].values[d]);
        v[k][d] = std::clamp(nv, -cfg.velocity_clamp, cfg.velocity_clamp);
        pos[k].values[d] = clamp_param(pos[k].values[d] + v[k][d]);
      }
    evaluate();
    for (std::size_t k = 0; k < cfg.particles; ++k)
      if (err[k] < personal_err[k]) {
        personal_err[k] = err[k];
        personal[k] = pos[k];
      }
    update_global();
  }
  return r;
}

}  // namespace jhg
