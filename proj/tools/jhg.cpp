#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "jhg/harness.hpp"
#include "jhg/learning/epdm.hpp"
#include "jhg/learning/pso.hpp"
#include "jhg/learning/selfplay.hpp"
#include "jhg/plot.hpp"
#include "jhg/server/http.hpp"

namespace fs = std::filesystem;
using namespace jhg;

namespace {

fs::path data_dir() {
  const char* env = std::getenv("JHG_DATA_DIR");
  return env && *env ? fs::path(env) : fs::path("jhg-data");
}

fs::path resolve(const std::string& p, const std::string& fallback) {
  return p.empty() ? data_dir() / fallback : fs::path(p);
}

std::vector<GameLogRecord> load_logs(const fs::path& path) {
  auto r = load_game_logs(path, /*strict=*/false);
  for (const auto& d : r.diagnostics) std::cerr << "skipped: " << d << "\n";
  if (r.records.empty()) throw Error("no usable game logs under " + path.string());
  return r.records;
}

SeatFilter parse_filter(const std::string& s) {
  if (s == "human") return SeatFilter::HumanOnly;
  if (s == "all") return SeatFilter::All;
  throw Error("--seats must be 'human' or 'all'");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

std::vector<MetricRow> metric_rows(const std::string& label, const std::vector<GameLogRecord>& logs) {
  std::vector<MetricRow> rows;
  for (const auto& r : logs) rows.push_back({label, r.id, compute_metric_vector(r.log)});
  return rows;
}

std::string metric_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream s;
  write_metric_table(s, rows);
  return s.str();
}

PopulationSample sample_from_rows(const std::vector<MetricRow>& rows, const std::string& label) {
  PopulationSample s{label, {}};
  for (const auto& r : rows) s.games.push_back(r.metrics);
  return s;
}

std::vector<MetricRow> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_metric_table(in);
}

RandomProfile parse_profile(const std::string& s) {
  RandomProfile p;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> p.give_share >> c1 >> p.keep_share >> c2 >> p.take_share) || c1 != ',' || c2 != ',')
    throw Error("--profile expects give,keep,take");
  validate(p);
  return p;
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Junior High Game simulation, fitting and evaluation toolkit"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  unsigned threads = 0;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (0 = hardware)")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Mirror game configurations with an agent population");
  std::string sim_config, sim_agents = "pool", sim_pool, sim_out, sim_label, sim_train, sim_profile;
  int rounds_cap = kRoundsCap;
  std::size_t sims = 4, sim_players = 8;
  int sim_tokens = 16, sim_rounds = 30;
  sim->add_option("--config", sim_config, "Game log file or directory whose settings are mirrored");
  sim->add_option("--agents", sim_agents, "Seat source: pool (draw per seat), rotate (PSO runs) or random")
      ->check(CLI::IsMember({"pool", "rotate", "random"}))
      ->capture_default_str();
  sim->add_option("--pool", sim_pool, "Parameter pool file");
  sim->add_option("--train", sim_train, "Training logs, used for the random profile");
  sim->add_option("--profile", sim_profile, "Random profile give,keep,take");
  sim->add_option("--label", sim_label, "Population label");
  sim->add_option("--out", sim_out, "Output directory");
  sim->add_option("--rounds-cap", rounds_cap, "Longest mirrored game")->capture_default_str();
  sim->add_option("--sims-per-config", sims, "Simulations per configuration")->capture_default_str();
  sim->add_option("--players", sim_players, "Players when no --config is given")->capture_default_str();
  sim->add_option("--tokens", sim_tokens, "Tokens per round when no --config is given")->capture_default_str();
  sim->add_option("--rounds", sim_rounds, "Rounds when no --config is given")->capture_default_str();

  // learn-epdm
  auto* epdm_cmd = app.add_subcommand("learn-epdm", "Learn a parameter distribution from player games");
  std::string train_path, model = "CAB", learn_out, seats = "human";
  EpdmConfig ecfg;
  epdm_cmd->add_option("--train", train_path, "Training game logs")->required();
  epdm_cmd->add_option("--model", model, "TFT or CAB")->capture_default_str();
  epdm_cmd->add_option("--seats", seats, "human or all")->capture_default_str();
  epdm_cmd->add_option("--generations", ecfg.generations)->capture_default_str();
  epdm_cmd->add_option("--pool-size", ecfg.pool_size)->capture_default_str();
  epdm_cmd->add_option("--epsilon", ecfg.epsilon)->capture_default_str();
  epdm_cmd->add_option("--rounds-cap", rounds_cap)->capture_default_str();
  epdm_cmd->add_option("--out", learn_out, "Pool file to write");

  // learn-pso
  auto* pso_cmd = app.add_subcommand("learn-pso", "Fit mean behavior with particle swarm optimization");
  SwarmConfig scfg;
  std::size_t runs = 4;
  pso_cmd->add_option("--train", train_path, "Training game logs")->required();
  pso_cmd->add_option("--model", model, "TFT or CAB")->capture_default_str();
  pso_cmd->add_option("--seats", seats, "human or all")->capture_default_str();
  pso_cmd->add_option("--runs", runs, "Independent runs kept as the pool")->capture_default_str();
  pso_cmd->add_option("--particles", scfg.particles)->capture_default_str();
  pso_cmd->add_option("--iterations", scfg.iterations)->capture_default_str();
  pso_cmd->add_option("--rounds-cap", rounds_cap)->capture_default_str();
  pso_cmd->add_option("--out", learn_out, "Pool file to write");

  // evolve-ecab
  auto* evo = app.add_subcommand("evolve-ecab", "Evolve CAB parameterizations by self-play");
  SelfPlayConfig pcfg;
  evo->add_option("--population", pcfg.population)->capture_default_str();
  evo->add_option("--generations", pcfg.generations)->capture_default_str();
  evo->add_option("--elites", pcfg.elites)->capture_default_str();
  evo->add_option("--out", learn_out, "Pool file to write");

  // metrics
  auto* met = app.add_subcommand("metrics", "Compute the population metrics of game logs");
  std::string logs_path, met_out, met_label = "games";
  met->add_option("--logs", logs_path, "Game log file or directory")->required();
  met->add_option("--label", met_label)->capture_default_str();
  met->add_option("--out", met_out, "CSV file to write (default: stdout)");

  // compare
  auto* cmp = app.add_subcommand("compare", "Mahalanobis comparison of agent populations against humans");
  std::vector<std::string> agent_tables;
  std::string human_table, cmp_out;
  cmp->add_option("--agents", agent_tables, "Agent metric CSV files")->required();
  cmp->add_option("--humans", human_table, "Human metric CSV file")->required();
  cmp->add_option("--out", cmp_out, "CSV file to write");

  // serve
  auto* srv = app.add_subcommand("serve", "Host live games over HTTP");
  std::string host = "127.0.0.1", srv_out;
  int port = 8080;
  srv->add_option("--host", host)->capture_default_str();
  srv->add_option("--port", port)->capture_default_str();
  srv->add_option("--out", srv_out, "Directory for finished game and survey records");

  // replay
  auto* rep = app.add_subcommand("replay", "Re-resolve a logged game and export its popularity trajectory");
  std::string rep_log, rep_out;
  rep->add_option("--log", rep_log, "Game log file")->required();
  rep->add_option("--out", rep_out, "Directory for CSV and SVG output");

  // split
  auto* spl = app.add_subcommand("split", "Split game logs into training and test sets");
  std::string spl_logs, spl_out;
  std::size_t test_count = 15;
  spl->add_option("--logs", spl_logs, "Game log directory")->required();
  spl->add_option("--test-count", test_count)->capture_default_str();
  spl->add_option("--out", spl_out, "Directory receiving train/ and test/");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      std::vector<GameConfig> configs;
      if (!sim_config.empty()) {
        for (const auto& r : load_logs(sim_config)) configs.push_back(descriptor_config(r, rounds_cap));
      } else {
        configs.push_back(make_config(sim_players, sim_tokens, std::min(sim_rounds, rounds_cap)));
      }
      AgentSpec spec;
      if (sim_agents == "random") {
        RandomProfile profile{0.72, 0.24, 0.04};
        if (!sim_train.empty()) profile = training_profile(load_logs(sim_train));
        if (!sim_profile.empty()) profile = parse_profile(sim_profile);
        spec = {sim_label.empty() ? "Random" : sim_label, RandomAgents{profile}};
      } else {
        if (sim_pool.empty()) throw Error("--pool is required for --agents " + sim_agents);
        PoolFile pool = load_pool(sim_pool);
        const std::string label = sim_label.empty() ? std::string(to_string(pool.kind)) : sim_label;
        if (sim_agents == "pool")
          spec = {label, PoolAgents{pool.members}};
        else
          spec = {label, RotatingAgents{pool.members}};
      }
      const auto logs = simulate_batch(configs, spec, sims, seed, threads);
      const fs::path out = resolve(sim_out, "sim-" + spec.label);
      save_game_logs(logs, out / "logs");
      write_text(out / "metrics.csv", metric_csv(metric_rows(spec.label, logs)));
      write_text(out / "popularity.csv", popularity_csv(logs.front().log));
      write_text(out / "popularity.svg", popularity_svg(logs.front().log, logs.front().id));
      std::cout << "wrote " << logs.size() << " games to " << out << "\n";
    } else if (*epdm_cmd || *pso_cmd) {
      const ModelKind kind = parse_model_kind(model);
      const auto records = load_logs(train_path);
      const auto games = extract_player_games(records, parse_filter(seats), rounds_cap);
      if (games.empty()) throw Error("no player games selected from " + train_path);
      Rng rng = derive_rng(seed);
      PoolFile pool{kind, seed, {{"train", train_path}, {"seats", seats}}, {}};
      if (*epdm_cmd) {
        ecfg.threads = threads;
        pool.provenance["method"] = "epdm";
        pool.members = epdm(kind, games, ecfg, rng, [](const GenerationReport& r) {
          std::cerr << "generation " << r.generation + 1 << ": core " << r.core->size() << "\n";
        });
      } else {
        scfg.threads = threads;
        pool.provenance["method"] = "pso";
        for (std::size_t k = 0; k < runs; ++k) {
          Rng run_rng = derive_rng(seed, k);
          const auto res = pso_fit(kind, games, scfg, run_rng);
          std::cerr << "run " << k + 1 << ": mean error " << res.best_error / static_cast<double>(games.size()) << "\n";
          pool.members.push_back(res.best);
        }
      }
      const fs::path out = resolve(learn_out, std::string(*epdm_cmd ? "epdm-" : "pso-") + model + ".json");
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      save_pool(pool, out);
      std::cout << "wrote " << pool.members.size() << " parameterizations to " << out << "\n";
    } else if (*evo) {
      pcfg.threads = threads;
      Rng rng = derive_rng(seed);
      const auto res = evolve_selfplay(ModelKind::CAB, pcfg, rng);
      PoolFile pool{ModelKind::CAB, seed, {{"method", "selfplay"}}, res.pool};
      const fs::path out = resolve(learn_out, "ecab.json");
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      save_pool(pool, out);
      std::cout << "best fitness " << res.best_fitness.back() << "; wrote " << out << "\n";
    } else if (*met) {
      const std::string csv = metric_csv(metric_rows(met_label, load_logs(logs_path)));
      if (met_out.empty())
        std::cout << csv;
      else
        write_text(met_out, csv);
    } else if (*cmp) {
      const auto humans = sample_from_rows(read_rows(human_table), "humans");
      std::map<std::string, PopulationSample> agents;
      for (const auto& path : agent_tables)
        for (const auto& row : read_rows(path)) {
          auto& s = agents[row.label];
          s.label = row.label;
          s.games.push_back(row.metrics);
        }
      std::ostringstream table;
      table << "label,mahalanobis,p_value\n";
      for (const auto& row : reproduce_comparison(agents, humans))
        table << row.label << "," << row.result.mahalanobis << "," << row.result.p_value << "\n";
      std::cout << table.str();
      if (!cmp_out.empty()) write_text(cmp_out, table.str());
    } else if (*srv) {
      server::GameService service({resolve(srv_out, "live")});
      server::HttpFrontend http(service);
      const int bound = http.start(host, port);
      std::cout << "serving on " << host << ":" << bound << std::endl;
      std::signal(SIGINT, [](int) { g_stop = 1; });
      std::signal(SIGTERM, [](int) { g_stop = 1; });
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      http.stop();
    } else if (*rep) {
      const auto records = load_logs(rep_log);
      const auto& r = records.front();
      GameState s = new_game(r.log.config);
      for (const auto& x : r.log.allocations) s = resolve_round(s, x, r.log.config);
      if (s.popularity != r.log.popularity.back()) std::cerr << "warning: stored snapshots differ from the engine\n";
      const fs::path out = resolve(rep_out, "replay-" + r.id);
      write_text(out / "popularity.csv", popularity_csv(r.log));
      write_text(out / "popularity.svg", popularity_svg(r.log, r.id));
      std::cout << "replayed " << r.log.rounds() << " rounds of " << r.id << " into " << out << "\n";
    } else if (*spl) {
      const auto split = split_train_test(load_logs(spl_logs), seed, test_count);
      const fs::path out = resolve(spl_out, "split");
      save_game_logs(split.train, out / "train");
      save_game_logs(split.test, out / "test");
      std::cout << split.train.size() << " train, " << split.test.size() << " test\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
