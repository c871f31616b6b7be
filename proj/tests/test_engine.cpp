#include <gtest/gtest.h>

#include <chrono>

#include "jhg/agents/policy.hpp"
#include "jhg/engine.hpp"
#include "oracles.hpp"

using namespace jhg;
using oracle::mat;

TEST(Engine, NewGameInitialState) {
  const GameState s = new_game(make_config(3, 5, 10));
  EXPECT_EQ(s.round, 0);
  EXPECT_EQ(s.popularity, (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(s.influence, RealMatrix(3, 3, 0.0));
  EXPECT_TRUE(s.history.empty());
  EXPECT_EQ(new_game(make_config(8, 16, 30)).popularity.size(), 8u);
}

TEST(Engine, InvalidConfigsRejected) {
  GameConfig c = make_config(3, 5, 10);
  c.initial_popularity = {1, 1};
  EXPECT_THROW(new_game(c), Error);
  EXPECT_THROW(new_game(make_config(3, 0, 10)), Error);
  EXPECT_THROW(new_game(make_config(1, 5, 10)), Error);
  EXPECT_THROW(new_game(make_config(65, 5, 10)), Error);
  EXPECT_THROW(new_game(make_config(3, 5, 0)), Error);
  c = make_config(3, 5, 10);
  c.initial_popularity[1] = -0.1;
  EXPECT_THROW(new_game(c), Error);
}

TEST(Engine, ValidateAllocation) {
  const GameConfig c = make_config(3, 5, 1);
  EXPECT_FALSE(validate_allocation(AllocationVector(0, {5, 0, 0}), c));
  auto short_count = validate_allocation(AllocationVector(0, {2, 1, -1}), c);
  ASSERT_TRUE(short_count);
  EXPECT_NE(short_count->find("token count"), std::string::npos);
  auto negative = validate_allocation(AllocationVector(0, {-1, 4, 0}), c);
  ASSERT_TRUE(negative);
  EXPECT_NE(negative->find("negative keep"), std::string::npos);
  EXPECT_TRUE(validate_allocation(AllocationVector(0, {5, 0}), c));
}

TEST(Engine, AllKeepDecaysByFactor) {
  const GameConfig c = make_config(3, 5, 1);
  GameState s = new_game(c);
  s = resolve_round(s, mat({{5, 0, 0}, {0, 5, 0}, {0, 0, 5}}), c);
  for (double p : s.popularity) EXPECT_NEAR(p, 0.995, 1e-12);
  EXPECT_EQ(s.round, 1);
  EXPECT_EQ(s.history.size(), 1u);
}

TEST(Engine, MutualGiversGrowByFactor) {
  const GameConfig c = make_config(2, 5, 1);
  const auto s = resolve_round(new_game(c), mat({{0, 5}, {5, 0}}), c);
  EXPECT_NEAR(s.popularity[0], 1.03, 1e-12);
  EXPECT_NEAR(s.popularity[1], 1.03, 1e-12);
}

TEST(Engine, KeepingBlocksAttack) {
  const GameConfig c = make_config(2, 5, 1);
  const auto s = resolve_round(new_game(c), mat({{0, -5}, {0, 5}}), c);
  EXPECT_NEAR(s.popularity[1], 0.995, 1e-12);  // identical to keeping unattacked
  EXPECT_LT(s.popularity[0], 1.0);
}

TEST(Engine, AttackOutcomeExamples) {
  const std::vector<double> one{2.0};
  auto o = attack_outcome(one, 3.0);
  EXPECT_EQ(o.damage, 0.0);
  EXPECT_EQ(o.gain_shares, std::vector<double>{0.0});
  const std::vector<double> two{2.0, 2.0};
  o = attack_outcome(two, 1.0);
  EXPECT_DOUBLE_EQ(o.damage, 3.0);
  EXPECT_EQ(o.gain_shares, (std::vector<double>{1.5, 1.5}));
  o = attack_outcome({}, 5.0);
  EXPECT_EQ(o.damage, 0.0);
  EXPECT_TRUE(o.gain_shares.empty());
}

TEST(Engine, AttackSharesSumToDamage) {
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> s(1 + k % 5);
    for (auto& v : s) v = u(rng);
    const auto o = attack_outcome(s, u(rng));
    double sum = 0.0;
    for (double g : o.gain_shares) {
      EXPECT_GE(g, 0.0);
      sum += g;
    }
    EXPECT_NEAR(sum, o.damage, 1e-12);
  }
}

TEST(Engine, InfluenceExamples) {
  const std::vector<double> ones{1.0, 1.0};
  const GameConfig c = make_config(2, 4, 1);
  RealMatrix prior(2, 2, 0.0);
  prior(0, 1) = 0.5;
  prior(1, 0) = -0.2;
  const auto decayed = update_influence(prior, AllocationMatrix(2, 2), ones, c);
  EXPECT_DOUBLE_EQ(decayed(0, 1), 0.35);
  EXPECT_DOUBLE_EQ(decayed(1, 0), -0.14);

  const auto gave = update_influence(RealMatrix(2, 2, 0.0), mat({{0, 4}, {4, 0}}), ones, c);
  EXPECT_DOUBLE_EQ(gave(0, 1), 0.3);
  const auto hit = update_influence(RealMatrix(2, 2, 0.0), mat({{0, -4}, {4, 0}}), ones, c);
  EXPECT_DOUBLE_EQ(hit(0, 1), -0.3);
}

TEST(Engine, ResolveRoundNamesOffendingPlayer) {
  const GameConfig c = make_config(3, 5, 1);
  try {
    resolve_round(new_game(c), mat({{5, 0, 0}, {0, 4, 0}, {0, 0, 5}}), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("player 1"), std::string::npos);
  }
}

TEST(Engine, RunGameAllKeepIsGeometric) {
  const GameConfig c = make_config(2, 5, 3);
  const std::vector<Policy> seats(2, all_keep_policy());
  const GameLog log = run_game(c, seats, 9);
  ASSERT_EQ(log.rounds(), 3);
  ASSERT_EQ(log.popularity.size(), 4u);
  for (int t = 0; t <= 3; ++t) EXPECT_NEAR(log.popularity[t][0], std::pow(0.995, t), 1e-12);
}

TEST(Engine, RunGameDeterministicAndLength) {
  GameConfig c = make_config(8, 16, 30);
  std::vector<Policy> seats(8, make_random_policy({0.6, 0.3, 0.1}));
  EXPECT_EQ(run_game(c, seats, 42), run_game(c, seats, 42));
  EXPECT_EQ(run_game(c, seats, 42).rounds(), 30);
  EXPECT_NE(run_game(c, seats, 42), run_game(c, seats, 43));
}

TEST(Engine, RunGameReportsSeatAndRound) {
  const GameConfig c = make_config(2, 5, 3);
  std::vector<Policy> seats{all_keep_policy(), [](const StateView& v, Rng&) {
                              AllocationVector a(v.self, std::vector<int>(2, 0));
                              a.tokens[v.self] = v.round() == 1 ? 4 : 5;
                              return a;
                            }};
  try {
    run_game(c, seats, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("seat 1 round 2"), std::string::npos) << e.what();
  }
}

TEST(Engine, TokenConservationAndNonNegativity) {
  Rng rng(8);
  for (int g = 0; g < 50; ++g) {
    const std::size_t n = 2 + g % 7;
    GameConfig c = make_config(n, 1 + g % 9, 12);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (auto& p : c.initial_popularity) p = u(rng);
    GameState s = new_game(c);
    for (int t = 0; t < 12; ++t) {
      AllocationMatrix x(n, n);
      for (std::size_t j = 0; j < n; ++j) {
        const auto a = oracle::random_allocation(n, j, c.tokens_per_round, rng);
        ASSERT_FALSE(validate_allocation(a, c));
        for (std::size_t i = 0; i < n; ++i) x(j, i) = a.tokens[i];
      }
      s = resolve_round(s, x, c);
      for (double p : s.popularity) ASSERT_GE(p, 0.0);
    }
  }
}

TEST(Engine, PermutationSymmetry) {
  Rng rng(12);
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 5;
    GameConfig c = make_config(n, 7, 1);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    for (auto& p : c.initial_popularity) p = u(rng);
    AllocationMatrix x(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto a = oracle::random_allocation(n, j, 7, rng);
      for (std::size_t i = 0; i < n; ++i) x(j, i) = a.tokens[i];
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    GameConfig pc = c;
    AllocationMatrix px(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      pc.initial_popularity[perm[i]] = c.initial_popularity[i];
      for (std::size_t j = 0; j < n; ++j) px(perm[i], perm[j]) = x(i, j);
    }
    const auto a = resolve_round(new_game(c), x, c);
    const auto b = resolve_round(new_game(pc), px, pc);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(b.popularity[perm[i]], a.popularity[i], 1e-12);
      for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(b.influence(perm[i], perm[j]), a.influence(i, j), 1e-12);
    }
  }
}

TEST(Engine, FigureOneSuite) {
  const auto start = std::chrono::steady_clock::now();
  const auto checks = oracle::figure_one_suite();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(checks.size(), 6u);
  for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
  EXPECT_LT(secs, 1.0);
}

TEST(Engine, DamageNeverDrivesBelowZeroAndAttackerGainsBounded) {
  // A victim with no popularity left yields nothing to its attacker.
  const GameConfig c = make_config(3, 10, 1);
  const auto p = update_popularity(std::vector<double>{1.0, 0.0, 1.0}, mat({{0, -10, 0}, {0, 0, 10}, {0, 0, 10}}), c);
  EXPECT_NEAR(p[0], 0.9, 1e-12);
  EXPECT_EQ(p[1], 0.0);
}
