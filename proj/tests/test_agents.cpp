#include <gtest/gtest.h>

#include "jhg/agents/policy.hpp"
#include "jhg/metrics.hpp"
#include "oracles.hpp"

using namespace jhg;
using oracle::mat;
using cab::cab_assign_groups;
using cab::cab_select_group;

namespace {

Parameterization tft_params(std::vector<double> v) { return {ModelKind::TFT, std::move(v)}; }
Parameterization cab_all(double v) { return {ModelKind::CAB, std::vector<double>(kCabParams, v)}; }

// A state whose history is exactly the given rounds, with influence replayed by the engine.
GameState play(GameConfig c, const std::vector<AllocationMatrix>& rounds) {
  GameState s = new_game(c);
  for (const auto& x : rounds) s = resolve_round(s, x, c);
  return s;
}

Policy fixed_row(std::vector<int> row) {
  return [row](const StateView& v, Rng&) { return AllocationVector(v.self, row); };
}

}  // namespace

TEST(Parameterization, SampleRangesAndLengths) {
  Rng rng(3);
  for (int k = 0; k < 10000; ++k) {
    const auto kind = k % 2 ? ModelKind::TFT : ModelKind::CAB;
    const auto p = sample_parameterization(kind, rng);
    ASSERT_EQ(p.values.size(), kind == ModelKind::TFT ? 7u : 30u);
    for (double v : p.values) ASSERT_TRUE(v >= 0.0 && v <= 100.0);
  }
  EXPECT_THROW(validate(tft_params({1, 2, 3})), Error);
  EXPECT_THROW(validate(tft_params({0, 0, 0, 0, 0, 0, 101})), Error);
  EXPECT_EQ(parse_model_kind("cab"), ModelKind::CAB);
  EXPECT_THROW(parse_model_kind("lstm"), Error);
}

TEST(Apportion, LargestRemainder) {
  const std::vector<double> w{1, 1, 1};
  EXPECT_EQ(detail::apportion(4, w), (std::vector<int>{2, 1, 1}));
  const std::vector<double> z{0, 0};
  EXPECT_EQ(detail::apportion(3, z), (std::vector<int>{0, 0}));
  const std::vector<double> skew{3, 1};
  EXPECT_EQ(detail::apportion(4, skew), (std::vector<int>{3, 1}));
}

TEST(RandomPolicy, SharesMatchProfile) {
  const GameState s = new_game(make_config(8, 10, 1));
  const StateView v = view_of(s, 0, 10);
  const RandomProfile prof{0.72, 0.24, 0.04};
  Rng rng(17);
  double give = 0, keep = 0, take = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto a = random_policy(v, prof, rng);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == a.owner) keep += a.tokens[i];
      else if (a.tokens[i] > 0) give += a.tokens[i];
      else take -= a.tokens[i];
    }
  }
  EXPECT_NEAR(100 * give / 10000, 72, 1);
  EXPECT_NEAR(100 * keep / 10000, 24, 1);
  EXPECT_NEAR(100 * take / 10000, 4, 1);
}

TEST(RandomPolicy, DegenerateProfiles) {
  Rng rng(1);
  const GameState s4 = new_game(make_config(4, 6, 1));
  EXPECT_EQ(random_policy(view_of(s4, 2, 6), {0, 1, 0}, rng), AllocationVector::all_keep(2, 4, 6));
  const GameState s2 = new_game(make_config(2, 6, 1));
  EXPECT_EQ(random_policy(view_of(s2, 0, 6), {1, 0, 0}, rng).tokens, (std::vector<int>{0, 6}));
  EXPECT_THROW(validate(RandomProfile{0.5, 0.6, 0.1}), Error);
}

TEST(Tft, ReciprocatesSoleGiver) {
  const GameConfig c = make_config(2, 5, 2);
  const GameState s = play(c, {mat({{5, 0}, {3, 2}})});
  Rng rng(0);
  const auto a = tft_policy(view_of(s, 0, 5), tft_params({50, 50, 0, 0, 0, 0, 40}), rng);
  EXPECT_EQ(a.tokens, (std::vector<int>{2, 3}));
}

TEST(Tft, NothingReceivedKeepsAll) {
  const GameConfig c = make_config(3, 6, 2);
  const GameState s = play(c, {mat({{6, 0, 0}, {6, 0, 0}, {0, 6, 0}})});
  Rng rng(0);
  const auto a = tft_policy(view_of(s, 2, 6), tft_params({50, 50, 0, 100, 0, 50, 0}), rng);
  EXPECT_EQ(a, AllocationVector::all_keep(2, 3, 6));
}

TEST(Tft, FullRetaliation) {
  const GameConfig c = make_config(2, 5, 2);
  const GameState s = play(c, {mat({{5, 0}, {-2, 3}})});
  Rng rng(0);
  const auto a = tft_policy(view_of(s, 0, 5), tft_params({50, 50, 0, 100, 0, 0, 0}), rng);
  EXPECT_EQ(a.tokens, (std::vector<int>{3, -2}));
}

TEST(Tft, FirstRoundKeepAndBreadth) {
  const GameState s = new_game(make_config(5, 8, 1));
  Rng rng(0);
  // keep 25% of 8 = 2, spread 6 over half of the 4 others, lowest index first on equal popularity
  const auto a = tft_policy(view_of(s, 0, 8), tft_params({25, 50, 0, 0, 0, 0, 0}), rng);
  EXPECT_EQ(a.tokens, (std::vector<int>{2, 3, 3, 0, 0}));
}

TEST(Tft, GiveNonDecreasingInReceived) {
  const GameConfig c = make_config(3, 12, 2);
  Rng rng(0);
  int prev = -1;
  for (int r = 0; r <= 6; ++r) {
    const GameState s = play(c, {mat({{12, 0, 0}, {r, 12 - r, 0}, {0, 0, 12}})});
    const auto a = tft_policy(view_of(s, 0, 12), tft_params({50, 50, 0, 50, 0, 50, 0}), rng);
    EXPECT_GE(a.tokens[1], prev);
    prev = a.tokens[1];
  }
}

TEST(Tft, ShortfallPrioritizesLargestContributor) {
  const GameConfig c = make_config(3, 6, 2);
  const GameState s = play(c, {mat({{6, 0, 0}, {4, 2, 0}, {2, 0, 4}})});
  Rng rng(0);
  // spendable 3 against demand 6: serve player 1 first
  const auto a = tft_policy(view_of(s, 0, 6), tft_params({0, 0, 0, 0, 0, 0, 50}), rng);
  EXPECT_EQ(a.tokens, (std::vector<int>{3, 3, 0}));
  const auto b = tft_policy(view_of(s, 0, 6), tft_params({0, 0, 0, 0, 0, 100, 50}), rng);
  EXPECT_EQ(b.tokens, (std::vector<int>{3, 2, 1}));
}

TEST(Cab, AssignGroupsNoHistoryIsSingletons) {
  const GameState s = new_game(make_config(4, 8, 1));
  const auto part = cab_assign_groups(view_of(s, 0, 8), cab_all(50));
  EXPECT_EQ(part, (cab::Partition{{0}, {1}, {2}, {3}}));
}

TEST(Cab, AssignGroupsFindsCliques) {
  const GameConfig c = make_config(4, 6, 3);
  const auto x = mat({{0, 6, 0, 0}, {6, 0, 0, 0}, {0, 0, 0, 6}, {0, 0, 6, 0}});
  const GameState s = play(c, {x, x, x});
  for (PlayerId self = 0; self < 4; ++self)
    EXPECT_EQ(cab_assign_groups(view_of(s, self, 6), cab_all(50)), (cab::Partition{{0, 1}, {2, 3}}));
}

TEST(Cab, AssignGroupsUniformIsOneGroup) {
  const GameConfig c = make_config(4, 6, 2);
  const auto x = mat({{0, 2, 2, 2}, {2, 0, 2, 2}, {2, 2, 0, 2}, {2, 2, 2, 0}});
  const GameState s = play(c, {x, x});
  EXPECT_EQ(cab_assign_groups(view_of(s, 0, 6), cab_all(50)), (cab::Partition{{0, 1, 2, 3}}));
}

TEST(Cab, SelectsDominantClique) {
  const GameConfig c = make_config(5, 8, 3);
  const auto x = mat({{0, 3, 3, 2, 0}, {3, 0, 2, 3, 0}, {3, 2, 0, 3, 0}, {2, 3, 3, 0, 0}, {0, 0, 0, 0, 8}});
  const GameState s = play(c, {x, x, x});
  auto p = cab_all(0);
  p.values[cab::kStrengthWeight] = 100;
  p.values[cab::kStrengthTarget] = 100;
  const StateView v = view_of(s, 4, 8);
  const auto part = cab_assign_groups(v, p);
  ASSERT_EQ(part, (cab::Partition{{0, 1, 2, 3}, {4}}));
  EXPECT_EQ(cab_select_group(v, part, p), (std::vector<PlayerId>{0, 1, 2, 3, 4}));
}

TEST(Cab, SelectKeepsCurrentGroupWhenBest) {
  const GameConfig c = make_config(4, 6, 3);
  const auto x = mat({{0, 6, 0, 0}, {6, 0, 0, 0}, {0, 0, 0, 6}, {0, 0, 6, 0}});
  const GameState s = play(c, {x, x, x});
  auto p = cab_all(0);
  p.values[cab::kCohesionWeight] = 100;
  p.values[cab::kStabilityBonus] = 50;
  const StateView v = view_of(s, 0, 6);
  EXPECT_EQ(cab_select_group(v, cab_assign_groups(v, p), p), (std::vector<PlayerId>{0, 1}));
}

TEST(Cab, SelectTieGoesToLowestIndex) {
  const GameState s = new_game(make_config(4, 6, 1));
  const auto p = cab_all(0);
  const StateView v = view_of(s, 2, 6);
  const auto part = cab_assign_groups(v, p);
  EXPECT_EQ(cab_select_group(v, part, p), (std::vector<PlayerId>{0, 2}));
}

TEST(Cab, LoneGroupNoThreatKeepsAll) {
  const GameConfig c = make_config(4, 8, 2);
  const GameState s = play(c, {mat({{8, 0, 0, 0}, {0, 8, 0, 0}, {0, 0, 8, 0}, {0, 0, 0, 8}})});
  Rng rng(0);
  for (double v : {0.0, 50.0, 100.0})
    EXPECT_EQ(cab_allocate(view_of(s, 1, 8), {1}, cab_all(v), rng), AllocationVector::all_keep(1, 4, 8));
}

TEST(Cab, RetaliatesAgainstAggressorOfMate) {
  const GameConfig c = make_config(3, 5, 2);
  const GameState s = play(c, {mat({{0, 5, 0}, {5, 0, 0}, {0, -5, 0}})});
  auto p = cab_all(0);
  p.values[cab::kRetaliation] = 100;
  p.values[cab::kThreatMemory] = 50;
  Rng rng(0);
  const auto a = cab_allocate(view_of(s, 0, 5), {0, 1}, p, rng);
  EXPECT_EQ(a.tokens, (std::vector<int>{0, 0, -5}));
}

TEST(Cab, PeacefulPairSplitsKeepAndSupport) {
  const GameConfig c = make_config(2, 8, 2);
  const GameState s = play(c, {mat({{0, 8}, {8, 0}})});
  auto p = cab_all(0);
  p.values[cab::kKeepBase] = 50;  // keep a quarter of the budget
  Rng rng(0);
  EXPECT_EQ(cab_allocate(view_of(s, 0, 8), {0, 1}, p, rng).tokens, (std::vector<int>{2, 6}));
}

TEST(Cab, OpeningDeterministicGivenSeed) {
  const GameState s = new_game(make_config(8, 16, 1));
  Rng pr(5);
  const auto p = sample_parameterization(ModelKind::CAB, pr);
  Rng r1 = derive_rng(9, 3), r2 = derive_rng(9, 3);
  EXPECT_EQ(cab_policy(view_of(s, 3, 16), p, r1), cab_policy(view_of(s, 3, 16), p, r2));
}

TEST(Policies, AlwaysValidOverRandomHistories) {
  Rng rng(21);
  for (int g = 0; g < 40; ++g) {
    const std::size_t n = 2 + g % 8;
    GameConfig c = make_config(n, 1 + g % 16, 10);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (auto& p : c.initial_popularity) p = u(rng);
    std::vector<Policy> seats;
    for (std::size_t j = 0; j < n; ++j) {
      switch ((g + j) % 3) {
        case 0: seats.push_back(make_policy(sample_parameterization(ModelKind::TFT, rng))); break;
        case 1: seats.push_back(make_policy(sample_parameterization(ModelKind::CAB, rng))); break;
        default: seats.push_back(make_random_policy({0.5, 0.3, 0.2}));
      }
    }
    // run_game validates every seat's output and throws on any violation
    ASSERT_NO_THROW(run_game(c, seats, static_cast<std::uint64_t>(g)));
  }
}

TEST(Policies, DeterministicGivenSeed) {
  Rng rng(2);
  const GameConfig c = make_config(6, 10, 8);
  std::vector<Policy> seats;
  for (int j = 0; j < 6; ++j)
    seats.push_back(make_policy(sample_parameterization(j % 2 ? ModelKind::TFT : ModelKind::CAB, rng)));
  EXPECT_EQ(run_game(c, seats, 77), run_game(c, seats, 77));
}

TEST(Policies, CabSelfPlayMorePolarizedThanRandom) {
  const GameConfig base = make_config(8, 16, 30);
  double cab_sum = 0, rand_sum = 0;
  const int games = 20;
  for (int g = 0; g < games; ++g) {
    Rng rng = derive_rng(100, g);
    GameConfig c = base;
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (auto& p : c.initial_popularity) p = u(rng);
    const auto p = sample_parameterization(ModelKind::CAB, rng);
    cab_sum += polarization(run_game(c, std::vector<Policy>(8, make_policy(p)), g));
    rand_sum += polarization(run_game(c, std::vector<Policy>(8, make_random_policy({0.72, 0.24, 0.04})), g));
  }
  EXPECT_GT(cab_sum / games, rand_sum / games);
}

TEST(Policies, FixedRowHelperMatchesEngine) {
  const GameConfig c = make_config(2, 4, 1);
  const std::vector<Policy> seats{fixed_row({0, 4}), fixed_row({4, 0})};
  EXPECT_NEAR(run_game(c, seats, 0).popularity[1][0], 1.03, 1e-12);
}
