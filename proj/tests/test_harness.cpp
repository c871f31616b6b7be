#include <gtest/gtest.h>

#include "jhg/harness.hpp"
#include "jhg/plot.hpp"

using namespace jhg;

namespace {

std::vector<GameConfig> fifteen_configs() {
  std::vector<GameConfig> out;
  for (int k = 0; k < 15; ++k) {
    GameConfig c = make_config(4 + k % 5, 8 + k % 9, 5 + k % 4);
    Rng rng = derive_rng(3, k);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (auto& p : c.initial_popularity) p = u(rng);
    out.push_back(c);
  }
  return out;
}

std::vector<Parameterization> pool(ModelKind kind, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Parameterization> out;
  for (int k = 0; k < n; ++k) out.push_back(sample_parameterization(kind, rng));
  return out;
}

}  // namespace

TEST(Harness, FifteenConfigsGiveSixtyLogs) {
  const AgentSpec spec{"hCAB", PoolAgents{pool(ModelKind::CAB, 10, 1)}};
  const auto logs = simulate_batch(fifteen_configs(), spec, 4, 99);
  ASSERT_EQ(logs.size(), 60u);
  EXPECT_EQ(logs[0].id, "hCAB-0-0");
  EXPECT_EQ(logs[59].id, "hCAB-14-3");
  const auto configs = fifteen_configs();
  for (std::size_t k = 0; k < 60; ++k) {
    EXPECT_EQ(logs[k].log.config, configs[k / 4]);
    EXPECT_EQ(logs[k].log.rounds(), configs[k / 4].max_rounds);
    EXPECT_EQ(logs[k].players.size(), configs[k / 4].player_count);
    for (const auto& p : logs[k].players) EXPECT_EQ(p.model, "CAB");
  }
  EXPECT_EQ(simulate_batch({configs[0]}, spec, 4, 99).size(), 4u);
}

TEST(Harness, BitIdenticalUnderSeed) {
  const AgentSpec spec{"hTFT", RotatingAgents{pool(ModelKind::TFT, 3, 2)}};
  const auto a = simulate_batch(fifteen_configs(), spec, 4, 5, 1);
  const auto b = simulate_batch(fifteen_configs(), spec, 4, 5, 4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(to_json(a[7]).dump(), to_json(b[7]).dump());
  // rotating deterministic seats ignore the seed; pool draws do not
  const AgentSpec drawn{"hTFT", PoolAgents{pool(ModelKind::TFT, 3, 2)}};
  EXPECT_EQ(simulate_batch(fifteen_configs(), drawn, 4, 6, 1), simulate_batch(fifteen_configs(), drawn, 4, 6, 3));
  EXPECT_TRUE(simulate_batch(fifteen_configs(), drawn, 4, 6, 1) != simulate_batch(fifteen_configs(), drawn, 4, 7, 1));
}

TEST(Harness, RotationAndRandomSeats) {
  const auto runs = pool(ModelKind::TFT, 3, 4);
  const AgentSpec rot{"r", RotatingAgents{runs}};
  const auto logs = simulate_batch({make_config(4, 8, 2)}, rot, 2, 1);
  EXPECT_EQ(logs[1].players[0].params_ref, to_json(runs[1]).dump());
  EXPECT_EQ(logs[1].players[2].params_ref, to_json(runs[0]).dump());
  const AgentSpec rnd{"Random", RandomAgents{{0.72, 0.24, 0.04}}};
  for (const auto& p : simulate_batch({make_config(4, 8, 2)}, rnd, 1, 1)[0].players) EXPECT_EQ(p.model, "Random");
  EXPECT_THROW(simulate_batch({make_config(4, 8, 2)}, AgentSpec{"e", PoolAgents{}}, 1, 1), Error);
}

TEST(Harness, DescriptorAndProfile) {
  GameLogRecord r{"h", {}, run_game(make_config(3, 4, 35), std::vector<Policy>(3, make_random_policy({0.5, 0.25, 0.25})), 1)};
  EXPECT_EQ(descriptor_config(r).max_rounds, 30);
  EXPECT_EQ(descriptor_config(r, 15).max_rounds, 15);
  GameLogRecord k{"k", {}, run_game(make_config(3, 4, 2), std::vector<Policy>(3, all_keep_policy()), 1)};
  const auto p = training_profile({k});
  EXPECT_EQ(p.keep_share, 1.0);
  EXPECT_EQ(p.give_share, 0.0);
}

TEST(Harness, ReproduceComparisonIdentityRow) {
  const AgentSpec spec{"Random", RandomAgents{{0.6, 0.3, 0.1}}};
  const auto humans = population_of("Humans", simulate_batch(fifteen_configs(), spec, 2, 11));
  const auto other = population_of("hCAB", simulate_batch(fifteen_configs(), AgentSpec{"hCAB", PoolAgents{pool(ModelKind::CAB, 5, 3)}}, 2, 12));
  const auto rows = reproduce_comparison({{"Same", humans}, {"hCAB", other}}, humans);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].label, "Same");
  EXPECT_EQ(rows[0].result.mahalanobis, 0.0);
  EXPECT_EQ(rows[0].result.p_value, 1.0);
  EXPECT_GT(rows[1].result.mahalanobis, 0.0);
}

TEST(Harness, ChanceBaseline) {
  EXPECT_NEAR(chance_baseline(4, 3), 400.0 / 7.0, 1e-12);
  EXPECT_EQ(chance_baseline(1, 1), 50.0);
  EXPECT_EQ(chance_baseline(5, 0), 100.0);
  EXPECT_THROW(chance_baseline(0, 0), Error);
}

TEST(Plot, CsvAndSvg) {
  const auto log = run_game(make_config(3, 4, 2), std::vector<Policy>(3, all_keep_policy()), 1);
  const std::string csv = popularity_csv(log);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "round,p1,p2,p3");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const std::string svg = popularity_svg(log, "t");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t lines = 0;
  for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos) ++lines;
  EXPECT_EQ(lines, 3u);
}
