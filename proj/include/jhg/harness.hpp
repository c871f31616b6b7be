#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "jhg/agents/policy.hpp"
#include "jhg/dataset.hpp"
#include "jhg/learning/parallel.hpp"
#include "jhg/metrics.hpp"

namespace jhg {

/// Settings of a game to mirror: seat count, budget, initial popularity, length.
inline GameConfig descriptor_config(const GameLogRecord& r, int rounds_cap = kRoundsCap) {
  GameConfig c = r.log.config;
  c.max_rounds = std::min(std::max(1, r.log.rounds()), rounds_cap);
  return c;
}

/// Seats draw a member of the pool uniformly at random, independently per game.
struct PoolAgents {
  std::vector<Parameterization> members;
};
/// Seat i of simulation s uses run (s + i) mod runs.size().
struct RotatingAgents {
  std::vector<Parameterization> runs;
};
struct RandomAgents {
  RandomProfile profile;
};

struct AgentSpec {
  std::string label;
  std::variant<PoolAgents, RotatingAgents, RandomAgents> source;
};

inline RandomProfile training_profile(const std::vector<GameLogRecord>& train) {
  double give = 0, keep = 0, take = 0;
  for (const auto& r : train)
    for (const auto& x : r.log.allocations)
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) {
          const int v = x(i, j);
          if (i == j)
            keep += v;
          else if (v > 0)
            give += v;
          else
            take -= v;
        }
  const double total = give + keep + take;
  if (total <= 0) throw Error("training_profile: no tokens in training data");
  return {give / total, keep / total, take / total};
}

inline std::vector<Policy> seat_policies(const AgentSpec& spec, std::size_t seats, std::size_t sim, Rng& rng,
                                         std::vector<PlayerDescriptor>& players) {
  std::vector<Policy> out;
  players.clear();
  for (std::size_t i = 0; i < seats; ++i) {
    PlayerDescriptor d{i, SeatKind::Agent, "", ""};
    if (const auto* pool = std::get_if<PoolAgents>(&spec.source)) {
      if (pool->members.empty()) throw Error("agent pool '" + spec.label + "' is empty");
      std::uniform_int_distribution<std::size_t> pick(0, pool->members.size() - 1);
      const Parameterization& p = pool->members[pick(rng)];
      out.push_back(make_policy(p));
      d.model = std::string(to_string(p.kind));
      d.params_ref = to_json(p).dump();
    } else if (const auto* rot = std::get_if<RotatingAgents>(&spec.source)) {
      if (rot->runs.empty()) throw Error("agent runs '" + spec.label + "' are empty");
      const Parameterization& p = rot->runs[(sim + i) % rot->runs.size()];
      out.push_back(make_policy(p));
      d.model = std::string(to_string(p.kind));
      d.params_ref = to_json(p).dump();
    } else {
      const auto& rnd = std::get<RandomAgents>(spec.source);
      out.push_back(make_random_policy(rnd.profile));
      d.model = "Random";
    }
    players.push_back(std::move(d));
  }
  return out;
}

/// Plays `sims_per_config` games per configuration. Output is ordered by
/// configuration then simulation index and depends only on `seed`.
inline std::vector<GameLogRecord> simulate_batch(const std::vector<GameConfig>& configs, const AgentSpec& spec,
                                                 std::size_t sims_per_config, std::uint64_t seed, unsigned threads = 0) {
  std::vector<GameLogRecord> out(configs.size() * sims_per_config);
  parallel_for(
      out.size(),
      [&](std::size_t k) {
        const std::size_t c = k / sims_per_config, s = k % sims_per_config;
        Rng seats_rng = derive_rng(seed, c, s, 1);
        GameLogRecord& r = out[k];
        const auto policies = seat_policies(spec, configs[c].player_count, s, seats_rng, r.players);
        r.log = run_game(configs[c], policies, seed ^ (0x9E3779B97F4A7C15ULL * (k + 1)));
        r.id = spec.label + "-" + std::to_string(c) + "-" + std::to_string(s);
      },
      threads);
  return out;
}

inline PopulationSample population_of(const std::string& label, const std::vector<GameLogRecord>& logs) {
  PopulationSample s{label, {}};
  for (const auto& r : logs) s.games.push_back(compute_metric_vector(r.log));
  return s;
}

struct ComparisonRow {
  std::string label;
  Comparison result;
};

/// Distance of each labeled agent population from the human games, sorted by distance.
inline std::vector<ComparisonRow> reproduce_comparison(const std::map<std::string, PopulationSample>& agents,
                                                       const PopulationSample& humans) {
  std::vector<ComparisonRow> rows;
  for (const auto& [label, sample] : agents) rows.push_back({label, compare_populations(sample, humans)});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.result.mahalanobis < b.result.mahalanobis; });
  return rows;
}

/// Best blind-guess accuracy (percent) when labelling associates human or bot.
inline double chance_baseline(std::size_t bots, std::size_t humans) {
  if (bots + humans == 0) throw Error("chance_baseline: no associates");
  return 100.0 * static_cast<double>(std::max(bots, humans)) / static_cast<double>(bots + humans);
}

}  // namespace jhg
