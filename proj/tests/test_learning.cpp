#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "jhg/learning/core_set.hpp"
#include "jhg/learning/epdm.hpp"
#include "jhg/learning/pso.hpp"
#include "jhg/learning/selfplay.hpp"
#include "oracles.hpp"

using namespace jhg;

namespace {

std::vector<PlayerGame> synthetic_games(const Parameterization& p, int count, std::uint64_t seed) {
  std::vector<PlayerGame> out;
  for (int g = 0; g < count; ++g) {
    GameConfig c = make_config(4, 8, 5);
    std::vector<Policy> seats{make_policy(p), make_policy(p), make_random_policy({0.6, 0.3, 0.1}),
                              make_random_policy({0.6, 0.3, 0.1})};
    auto log = std::make_shared<const GameLog>(run_game(c, seats, seed + g));
    out.push_back(make_player_game(log, 0));
    out.push_back(make_player_game(log, 1));
  }
  return out;
}

}  // namespace

TEST(TopPerformers, DefinitionAndErrors) {
  const ErrorTable e{{-3.0, -1.0, -2.0}, {-2.995, -1.5, -2.0}, {-1.0, -1.0, -2.005}};
  const auto tops = top_performers(e, 0.01);
  EXPECT_EQ(tops[0], (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(tops[1], (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(tops[2], (std::vector<std::size_t>{2}));
  EXPECT_THROW(top_performers({}, 0.01), Error);
  EXPECT_THROW(top_performers(e, 0.0), Error);
  EXPECT_THROW(top_performers({{1.0}, {1.0, 2.0}}, 0.01), Error);
}

TEST(CoreSet, ThreeSetInstance) {
  // A={1,2,3}, B={3,4}, C={4,5} on games numbered from zero
  const std::vector<std::vector<std::size_t>> tops{{0, 1, 2}, {2, 3}, {3, 4}};
  EXPECT_EQ(find_core_set(5, tops), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(oracle::greedy_cover(tops), (std::vector<std::size_t>{0, 2}));
}

TEST(CoreSet, MatchesOracleAndCovers) {
  Rng rng(5);
  for (int k = 0; k < 500; ++k) {
    const std::size_t pool = 1 + k % 8, games = 1 + k % 12;
    std::vector<std::vector<std::size_t>> tops(pool);
    std::bernoulli_distribution in(0.3);
    for (auto& t : tops)
      for (std::size_t g = 0; g < games; ++g)
        if (in(rng)) t.push_back(g);
    std::uniform_int_distribution<std::size_t> who(0, pool - 1);
    for (std::size_t g = 0; g < games; ++g) {  // every game needs a top performer
      auto& t = tops[who(rng)];
      if (std::find(t.begin(), t.end(), g) == t.end()) t.insert(std::upper_bound(t.begin(), t.end(), g), g);
    }
    const auto core = find_core_set(games, tops);
    ASSERT_EQ(core, oracle::greedy_cover(tops));
    std::set<std::size_t> covered;
    for (auto c : core) covered.insert(tops[c].begin(), tops[c].end());
    ASSERT_EQ(covered.size(), games);
  }
  EXPECT_THROW(find_core_set(2, {{0}}), Error);
}

TEST(Mutation, RatesMatchConfiguration) {
  Rng rng(7);
  const Parameterization a{ModelKind::CAB, std::vector<double>(30, 20.0)};
  const Parameterization b{ModelKind::CAB, std::vector<double>(30, 80.0)};
  MutationCounters c;
  for (int k = 0; k < 2000; ++k) {
    const auto child = make_offspring(a, b, rng, {}, &c);
    for (double v : child.values) ASSERT_TRUE(v >= 0 && v <= 100);
  }
  const double n = static_cast<double>(c.coordinates);
  EXPECT_NEAR(c.fresh / n, 0.03, 10 * std::sqrt(0.03 * 0.97 / n));
  EXPECT_NEAR(c.shifted / n, 0.12, 10 * std::sqrt(0.12 * 0.88 / n));
  EXPECT_THROW(make_offspring(a, Parameterization{ModelKind::TFT, std::vector<double>(7, 1.0)}, rng), Error);
}

TEST(Mutation, NoMutationCopiesAParent) {
  Rng rng(2);
  const Parameterization a{ModelKind::TFT, {1, 2, 3, 4, 5, 6, 7}}, b{ModelKind::TFT, {10, 20, 30, 40, 50, 60, 70}};
  const auto child = make_offspring(a, b, rng, MutationConfig{0.0, 0.0, 5});
  for (std::size_t i = 0; i < 7; ++i) EXPECT_TRUE(child[i] == a[i] || child[i] == b[i]);
}

TEST(Resample, ProportionalToFitness) {
  Rng rng(11);
  std::vector<Parameterization> pool{{ModelKind::TFT, std::vector<double>(7, 0.0)},
                                     {ModelKind::TFT, std::vector<double>(7, 1.0)}};
  const std::vector<double> fitness{3.0, 1.0};
  const auto out = resample_by_fitness(pool, fitness, 10000, rng);
  double first = 0;
  for (const auto& p : out) first += p == pool[0];
  const double e0 = 7500, e1 = 2500;
  const double chi = (first - e0) * (first - e0) / e0 + (10000 - first - e1) * (10000 - first - e1) / e1;
  EXPECT_GT(boost::math::cdf(boost::math::complement(boost::math::chi_squared(1), chi)), 0.01);
  EXPECT_THROW(resample_by_fitness(pool, std::vector<double>{0.0, 0.0}, 3, rng), Error);
  EXPECT_THROW(resample_by_fitness(pool, std::vector<double>{-1.0, 2.0}, 3, rng), Error);
}

TEST(EvolveGeneration, KeepsCoreAndFillsPool) {
  Rng rng(3);
  std::vector<Parameterization> pool;
  for (int k = 0; k < 10; ++k) pool.push_back(sample_parameterization(ModelKind::TFT, rng));
  const std::vector<std::size_t> core{4, 7};
  const std::vector<double> fitness(10, 1.0);
  const auto next = evolve_generation(pool, core, fitness, 10, rng);
  ASSERT_EQ(next.size(), 10u);
  EXPECT_EQ(next[0], pool[4]);
  EXPECT_EQ(next[1], pool[7]);
  EXPECT_THROW(evolve_generation(pool, core, fitness, 1, rng), Error);
}

TEST(Epdm, InvariantsEveryGeneration) {
  Rng prng(4);
  const auto plant = sample_parameterization(ModelKind::TFT, prng);
  const auto games = synthetic_games(plant, 3, 50);
  EpdmConfig cfg;
  cfg.generations = 4;
  cfg.pool_size = 20;
  std::size_t seen = 0;
  Rng rng(8);
  const auto out = epdm(ModelKind::TFT, games, cfg, rng, [&](const GenerationReport& r) {
    EXPECT_EQ(r.generation, seen++);
    EXPECT_EQ(r.pool->size(), 20u);
    std::set<std::size_t> covered;
    for (auto c : *r.core) covered.insert((*r.top_sets)[c].begin(), (*r.top_sets)[c].end());
    EXPECT_EQ(covered.size(), r.game_count);
    for (const auto& p : *r.pool)
      for (double v : p.values) EXPECT_TRUE(v >= 0 && v <= 100);
  });
  EXPECT_EQ(seen, 4u);
  EXPECT_EQ(out.size(), 20u);
  Rng again(8);
  EXPECT_EQ(epdm(ModelKind::TFT, games, cfg, again), out);
  cfg.generations = 0;
  EXPECT_EQ(epdm(ModelKind::TFT, games, cfg, again).size(), 20u);
  EXPECT_THROW(epdm(ModelKind::TFT, {}, cfg, again), Error);
}

TEST(Epdm, ThreadCountDoesNotChangeResult) {
  Rng prng(5);
  const auto games = synthetic_games(sample_parameterization(ModelKind::TFT, prng), 2, 60);
  EpdmConfig cfg;
  cfg.generations = 3;
  cfg.pool_size = 12;
  cfg.threads = 1;
  Rng a(1), b(1);
  const auto one = epdm(ModelKind::TFT, games, cfg, a);
  cfg.threads = 4;
  EXPECT_EQ(epdm(ModelKind::TFT, games, cfg, b), one);
}

TEST(Pso, ZeroIterationsIsBestOfInitialSwarm) {
  Rng prng(6);
  const auto games = synthetic_games(sample_parameterization(ModelKind::TFT, prng), 2, 70);
  SwarmConfig cfg;
  cfg.particles = 8;
  cfg.iterations = 0;
  Rng rng(2), copy(2);
  const auto r = pso_fit(ModelKind::TFT, games, cfg, rng);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 8; ++k) {
    const auto p = sample_parameterization(ModelKind::TFT, copy);
    std::uniform_real_distribution<double> vel(-20, 20);
    for (int d = 0; d < 7; ++d) vel(copy);
    best = std::min(best, total_error(p, games));
  }
  EXPECT_DOUBLE_EQ(r.best_error, best);
  EXPECT_DOUBLE_EQ(total_error(r.best, games), r.best_error);
  ASSERT_EQ(r.best_per_iteration.size(), 1u);
}

TEST(Pso, BestErrorNonIncreasing) {
  Rng prng(7);
  const auto plant = sample_parameterization(ModelKind::TFT, prng);
  const auto games = synthetic_games(plant, 2, 80);
  SwarmConfig cfg;
  cfg.particles = 10;
  cfg.iterations = 15;
  Rng rng(3);
  const auto r = pso_fit(ModelKind::TFT, games, cfg, rng);
  ASSERT_EQ(r.best_per_iteration.size(), 16u);
  for (std::size_t k = 1; k < r.best_per_iteration.size(); ++k)
    EXPECT_LE(r.best_per_iteration[k], r.best_per_iteration[k - 1]);
  EXPECT_GE(r.best_error, -3.0 * static_cast<double>(games.size()) - 1e-9);
  for (double v : r.best.values) EXPECT_TRUE(v >= 0 && v <= 100);
}

TEST(SelfPlay, ElitismKeepsBestFitnessMonotone) {
  SelfPlayConfig cfg;
  cfg.game = make_config(4, 8, 6);
  cfg.population = 6;
  cfg.generations = 3;
  cfg.elites = 2;
  Rng rng(4);
  const auto r = evolve_selfplay(ModelKind::CAB, cfg, rng);
  ASSERT_EQ(r.best_fitness.size(), 4u);
  for (std::size_t k = 1; k < r.best_fitness.size(); ++k) EXPECT_GE(r.best_fitness[k], r.best_fitness[k - 1]);
  ASSERT_EQ(r.pool.size(), 6u);
  EXPECT_DOUBLE_EQ(r.fitness.front(), selfplay_fitness(r.pool.front(), cfg));
  for (std::size_t k = 1; k < r.fitness.size(); ++k) EXPECT_LE(r.fitness[k], r.fitness[k - 1]);
  cfg.elites = 7;
  EXPECT_THROW(evolve_selfplay(ModelKind::CAB, cfg, rng), Error);
}
