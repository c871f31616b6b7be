#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "jhg/agents/policy.hpp"
#include "jhg/engine.hpp"
#include "jhg/learning/epdm.hpp"
#include "jhg/learning/parallel.hpp"

namespace jhg {

struct SelfPlayConfig {
  GameConfig game = make_config(8, 16, 30);
  std::size_t population = 30;
  std::size_t generations = 30;
  std::size_t elites = 4;
  std::size_t games_per_evaluation = 2;
  std::uint64_t evaluation_seed = 7;
  MutationConfig mutation;
  unsigned threads = 0;
};

struct SelfPlayResult {
  std::vector<Parameterization> pool;  // final population, best first
  std::vector<double> fitness;         // matching the pool order
  std::vector<double> best_fitness;    // best fitness after each generation (index 0 = initial)
};

/// Mean final popularity, relative to the mean initial popularity, when every
/// seat plays `params`. Uses a fixed seed set so repeated calls agree.
inline double selfplay_fitness(const Parameterization& params, const SelfPlayConfig& cfg) {
  const std::vector<Policy> seats(cfg.game.player_count, make_policy(params));
  const double initial = std::accumulate(cfg.game.initial_popularity.begin(), cfg.game.initial_popularity.end(), 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < cfg.games_per_evaluation; ++k) {
    const GameLog log = run_game(cfg.game, seats, cfg.evaluation_seed + k);
    const auto& fin = log.popularity.back();
    sum += std::accumulate(fin.begin(), fin.end(), 0.0) / initial;
  }
  return sum / static_cast<double>(cfg.games_per_evaluation);
}

/// Genetic evolution with elitism over self-play fitness, reusing the
/// crossover and mutation operators of the distribution learner.
inline SelfPlayResult evolve_selfplay(ModelKind kind, const SelfPlayConfig& cfg, Rng& rng) {
  if (cfg.population == 0 || cfg.elites > cfg.population) throw Error("evolve_selfplay: bad population settings");
  validate_config(cfg.game);
  std::vector<Parameterization> pop;
  for (std::size_t k = 0; k < cfg.population; ++k) pop.push_back(sample_parameterization(kind, rng));

  auto rank = [&](std::vector<Parameterization>& p, std::vector<double>& f) {
    f.assign(p.size(), 0.0);
    parallel_for(p.size(), [&](std::size_t k) { f[k] = selfplay_fitness(p[k], cfg); }, cfg.threads);
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
    std::vector<Parameterization> sp;
    std::vector<double> sf;
    for (std::size_t k : order) {
      sp.push_back(p[k]);
      sf.push_back(f[k]);
    }
    p = std::move(sp);
    f = std::move(sf);
  };

  SelfPlayResult r;
  std::vector<double> fit;
  rank(pop, fit);
  r.best_fitness.push_back(fit.front());
  for (std::size_t g = 0; g < cfg.generations; ++g) {
    std::vector<Parameterization> next(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(cfg.elites));
    std::vector<double> weights = fit;
    if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) std::fill(weights.begin(), weights.end(), 1.0);
    auto parent = fitness_distribution(weights);
    while (next.size() < cfg.population) next.push_back(make_offspring(pop[parent(rng)], pop[parent(rng)], rng, cfg.mutation));
    pop = std::move(next);
    rank(pop, fit);
    r.best_fitness.push_back(fit.front());
  }
  r.pool = std::move(pop);
  r.fitness = std::move(fit);
  return r;
}

}  // namespace jhg
