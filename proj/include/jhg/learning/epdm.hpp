#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "jhg/agents/parameterization.hpp"
#include "jhg/learning/core_set.hpp"
#include "jhg/learning/parallel.hpp"
#include "jhg/scoring.hpp"

namespace jhg {

struct MutationConfig {
  double fresh_probability = 0.03;
  double shift_probability = 0.12;
  int max_shift = 5;
};

/// Tallies of what happened to offspring coordinates.
struct MutationCounters {
  std::size_t coordinates = 0;
  std::size_t fresh = 0;
  std::size_t shifted = 0;
};

/// Coordinate-wise crossover of two parents followed by mutation: with
/// probability 0.03 a fresh uniform value, otherwise one parent's value;
/// then with probability 0.12 a shift of 0..5 up or down, clamped to [0,100].
inline Parameterization make_offspring(const Parameterization& a, const Parameterization& b, Rng& rng,
                                       const MutationConfig& m = {}, MutationCounters* counters = nullptr) {
  if (a.kind != b.kind || a.values.size() != b.values.size()) throw Error("make_offspring: parents differ in kind");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> fresh(kParamMin, kParamMax);
  std::uniform_int_distribution<int> shift(0, m.max_shift);
  std::bernoulli_distribution coin(0.5);
  Parameterization child{a.kind, std::vector<double>(a.values.size())};
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    double v;
    const bool is_fresh = unit(rng) < m.fresh_probability;
    if (is_fresh)
      v = fresh(rng);
    else
      v = coin(rng) ? a.values[i] : b.values[i];
    const bool is_shifted = unit(rng) < m.shift_probability;
    if (is_shifted) {
      const int d = shift(rng);
      v += coin(rng) ? d : -d;
    }
    child.values[i] = clamp_param(v);
    if (counters) {
      ++counters->coordinates;
      counters->fresh += is_fresh;
      counters->shifted += is_shifted;
    }
  }
  return child;
}

inline std::discrete_distribution<std::size_t> fitness_distribution(std::span<const double> fitness) {
  double total = 0.0;
  for (double f : fitness) {
    if (!(f >= 0.0)) throw Error("fitness must be non-negative");
    total += f;
  }
  if (!(total > 0.0)) throw Error("total fitness is zero");
  return std::discrete_distribution<std::size_t>(fitness.begin(), fitness.end());
}

/// Keeps the core set and fills the pool back up with offspring of parents
/// drawn (with replacement) proportionally to fitness.
inline std::vector<Parameterization> evolve_generation(const std::vector<Parameterization>& pool,
                                                       std::span<const std::size_t> core,
                                                       std::span<const double> fitness, std::size_t pool_size,
                                                       Rng& rng, const MutationConfig& m = {},
                                                       MutationCounters* counters = nullptr) {
  if (core.size() > pool_size) throw Error("evolve_generation: core set larger than pool");
  std::vector<Parameterization> next;
  next.reserve(pool_size);
  for (std::size_t c : core) next.push_back(pool.at(c));
  if (next.size() == pool_size) return next;
  auto parent = fitness_distribution(fitness);
  while (next.size() < pool_size) {
    const Parameterization& a = pool[parent(rng)];
    const Parameterization& b = pool[parent(rng)];
    next.push_back(make_offspring(a, b, rng, m, counters));
  }
  return next;
}

inline std::vector<Parameterization> resample_by_fitness(const std::vector<Parameterization>& pool,
                                                         std::span<const double> fitness, std::size_t pool_size,
                                                         Rng& rng) {
  if (fitness.size() != pool.size()) throw Error("resample_by_fitness: fitness length mismatch");
  auto pick = fitness_distribution(fitness);
  std::vector<Parameterization> out;
  out.reserve(pool_size);
  for (std::size_t k = 0; k < pool_size; ++k) out.push_back(pool[pick(rng)]);
  return out;
}

/// Error of every parameterization on every player game.
inline ErrorTable evaluate_errors(const std::vector<Parameterization>& pool, std::span<const PlayerGame> games,
                                  DistanceKind kind = DistanceKind::Score, unsigned threads = 0) {
  ErrorTable table(pool.size(), std::vector<double>(games.size()));
  parallel_for(
      pool.size() * games.size(),
      [&](std::size_t k) {
        const std::size_t p = k / games.size(), g = k % games.size();
        table[p][g] = player_game_error(pool[p], games[g], kind);
      },
      threads);
  return table;
}

struct EpdmConfig {
  std::size_t generations = 100;
  std::size_t pool_size = 100;
  double epsilon = 0.01;
  MutationConfig mutation;
  DistanceKind distance = DistanceKind::Score;
  unsigned threads = 0;
};

/// Snapshot handed to an observer after each generation's evaluation.
struct GenerationReport {
  std::size_t generation = 0;
  const std::vector<Parameterization>* pool = nullptr;
  const std::vector<std::vector<std::size_t>>* top_sets = nullptr;
  const std::vector<std::size_t>* core = nullptr;
  std::size_t game_count = 0;
};

using GenerationObserver = std::function<void(const GenerationReport&)>;

inline std::vector<double> coverage_fitness(const std::vector<std::vector<std::size_t>>& tops) {
  std::vector<double> f(tops.size());
  for (std::size_t p = 0; p < tops.size(); ++p) f[p] = static_cast<double>(tops[p].size());
  return f;
}

/// Learns a pool of parameterizations whose top-performer sets jointly cover
/// the observed player games, then resamples the last evaluated pool by fitness.
inline std::vector<Parameterization> epdm(ModelKind kind, std::span<const PlayerGame> games, const EpdmConfig& cfg,
                                          Rng& rng, const GenerationObserver& observe = {}) {
  if (games.empty()) throw Error("epdm: no player games");
  if (cfg.pool_size == 0) throw Error("epdm: pool size must be positive");
  std::vector<Parameterization> pool;
  pool.reserve(cfg.pool_size);
  for (std::size_t k = 0; k < cfg.pool_size; ++k) pool.push_back(sample_parameterization(kind, rng));

  std::vector<Parameterization> evaluated = pool;
  std::vector<double> fitness;
  for (std::size_t g = 0; g < cfg.generations; ++g) {
    const ErrorTable errors = evaluate_errors(pool, games, cfg.distance, cfg.threads);
    const auto tops = top_performers(errors, cfg.epsilon);
    const auto core = find_core_set(games.size(), tops);
    if (observe) observe(GenerationReport{g, &pool, &tops, &core, games.size()});
    fitness = coverage_fitness(tops);
    evaluated = pool;
    pool = evolve_generation(pool, core, fitness, cfg.pool_size, rng, cfg.mutation);
  }
  if (cfg.generations == 0) {
    fitness = coverage_fitness(top_performers(evaluate_errors(pool, games, cfg.distance, cfg.threads), cfg.epsilon));
    evaluated = pool;
  }
  return resample_by_fitness(evaluated, fitness, cfg.pool_size, rng);
}

}  // namespace jhg
