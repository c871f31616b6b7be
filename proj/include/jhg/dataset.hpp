#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jhg/agents/parameterization.hpp"
#include "jhg/engine.hpp"
#include "jhg/metrics.hpp"
#include "jhg/scoring.hpp"

namespace jhg {

using Json = nlohmann::json;

inline constexpr std::string_view kGameLogSchema = "jhg-game-log/1";
inline constexpr std::string_view kPoolSchema = "jhg-pool/1";
inline constexpr int kRoundsCap = 30;

enum class SeatKind { Human, Agent };

struct PlayerDescriptor {
  std::size_t seat = 0;
  SeatKind kind = SeatKind::Human;
  std::string model;       // "TFT", "CAB", "Random" or empty for humans
  std::string params_ref;  // pool file, parameter values, or other provenance

  bool operator==(const PlayerDescriptor&) const = default;
};

struct GameLogRecord {
  std::string id;
  std::vector<PlayerDescriptor> players;
  GameLog log;

  bool all_human() const {
    return std::all_of(players.begin(), players.end(), [](const auto& p) { return p.kind == SeatKind::Human; });
  }
  bool operator==(const GameLogRecord&) const = default;
};

/// Writes `text` next to `path` and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- JSON mapping ---------------------------------------------------------

inline Json matrix_to_json(const RealMatrix& m) {
  Json j = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) j.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return j;
}

inline Json matrix_to_json(const AllocationMatrix& m) {
  Json j = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) j.push_back(std::vector<int>(m.row(r).begin(), m.row(r).end()));
  return j;
}

template <class T>
Matrix<T> matrix_from_json(const Json& j, std::size_t n, const std::string& where) {
  if (!j.is_array() || j.size() != n) throw Error(where + ": expected " + std::to_string(n) + " rows");
  Matrix<T> m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || row.size() != n)
      throw Error(where + ": row " + std::to_string(r) + " must have " + std::to_string(n) + " entries (matrix not square)");
    for (std::size_t c = 0; c < n; ++c) {
      if (!row[c].is_number()) throw Error(where + ": non-numeric entry at [" + std::to_string(r) + "][" + std::to_string(c) + "]");
      m(r, c) = row[c].get<T>();
    }
  }
  return m;
}

inline Json to_json(const DynamicsConstants& d) {
  return {{"decay", d.decay},           {"keep_coeff", d.keep_coeff},     {"give_coeff", d.give_coeff},
          {"steal_coeff", d.steal_coeff}, {"damage_coeff", d.damage_coeff}, {"influence_discount", d.influence_discount}};
}

inline DynamicsConstants dynamics_from_json(const Json& j) {
  DynamicsConstants d;
  d.decay = j.value("decay", d.decay);
  d.keep_coeff = j.value("keep_coeff", d.keep_coeff);
  d.give_coeff = j.value("give_coeff", d.give_coeff);
  d.steal_coeff = j.value("steal_coeff", d.steal_coeff);
  d.damage_coeff = j.value("damage_coeff", d.damage_coeff);
  d.influence_discount = j.value("influence_discount", d.influence_discount);
  return d;
}

inline Json to_json(const Parameterization& p) { return {{"model", std::string(to_string(p.kind))}, {"values", p.values}}; }

inline Parameterization parameterization_from_json(const Json& j) {
  Parameterization p{parse_model_kind(j.at("model").get<std::string>()), j.at("values").get<std::vector<double>>()};
  validate(p);
  return p;
}

inline std::string_view to_string(SeatKind k) { return k == SeatKind::Human ? "human" : "agent"; }

inline Json to_json(const GameLogRecord& r) {
  Json players = Json::array();
  for (const auto& p : r.players)
    players.push_back({{"seat", p.seat}, {"kind", std::string(to_string(p.kind))}, {"model", p.model}, {"params_ref", p.params_ref}});
  Json rounds = Json::array();
  const GameLog& g = r.log;
  for (int t = 0; t < g.rounds(); ++t)
    rounds.push_back({{"popularity", g.popularity[t]},
                      {"influence", matrix_to_json(g.influence[t])},
                      {"allocations", matrix_to_json(g.allocations[t])}});
  return {{"schema", std::string(kGameLogSchema)},
          {"game_id", r.id},
          {"player_count", g.config.player_count},
          {"tokens_per_round", g.config.tokens_per_round},
          {"max_rounds", g.config.max_rounds},
          {"initial_popularity", g.config.initial_popularity},
          {"dynamics", to_json(g.config.dynamics)},
          {"players", players},
          {"rounds", rounds},
          {"final", {{"popularity", g.popularity.back()}, {"influence", matrix_to_json(g.influence.back())}}}};
}

/// Rebuilds popularity and influence snapshots from the allocations alone.
inline void recompute_snapshots(GameLog& g) {
  GameState s = new_game(g.config);
  g.popularity.assign(1, s.popularity);
  g.influence.assign(1, s.influence);
  for (const auto& x : g.allocations) {
    s = resolve_round(s, x, g.config);
    g.popularity.push_back(s.popularity);
    g.influence.push_back(s.influence);
  }
}

inline GameLogRecord game_log_from_json(const Json& j, const std::string& where) {
  auto field = [&](const char* name) -> const Json& {
    if (!j.contains(name)) throw Error(where + ": missing field '" + name + "'");
    return j.at(name);
  };
  try {
    if (field("schema").get<std::string>() != kGameLogSchema)
      throw Error(where + ": unsupported schema '" + field("schema").get<std::string>() + "'");
    GameLogRecord r;
    r.id = field("game_id").get<std::string>();
    GameConfig& c = r.log.config;
    c.player_count = field("player_count").get<std::size_t>();
    c.tokens_per_round = field("tokens_per_round").get<int>();
    c.initial_popularity = field("initial_popularity").get<std::vector<double>>();
    c.max_rounds = j.value("max_rounds", 1);
    if (j.contains("dynamics")) c.dynamics = dynamics_from_json(j.at("dynamics"));
    const std::size_t n = c.player_count;
    for (const auto& p : field("players")) {
      PlayerDescriptor d;
      d.seat = p.at("seat").get<std::size_t>();
      const auto kind = p.at("kind").get<std::string>();
      if (kind != "human" && kind != "agent") throw Error(where + ": players[].kind must be human or agent");
      d.kind = kind == "human" ? SeatKind::Human : SeatKind::Agent;
      d.model = p.value("model", "");
      d.params_ref = p.value("params_ref", "");
      r.players.push_back(std::move(d));
    }
    if (r.players.size() != n) throw Error(where + ": players has " + std::to_string(r.players.size()) + " entries for " + std::to_string(n) + " seats");
    const Json& rounds = field("rounds");
    if (!rounds.is_array()) throw Error(where + ": rounds must be an array");
    c.max_rounds = std::max<int>(c.max_rounds, static_cast<int>(rounds.size()));
    validate_config(c);
    GameLog& g = r.log;
    for (std::size_t t = 0; t < rounds.size(); ++t) {
      const std::string at = where + ": rounds[" + std::to_string(t) + "]";
      const Json& rd = rounds[t];
      g.allocations.push_back(matrix_from_json<int>(rd.at("allocations"), n, at + ".allocations"));
      for (PlayerId p = 0; p < n; ++p)
        if (auto why = validate_allocation(row_allocation(g.allocations.back(), p), c))
          throw Error(at + ".allocations row " + std::to_string(p) + ": " + *why);
      auto pop = rd.at("popularity").get<std::vector<double>>();
      if (pop.size() != n) throw Error(at + ".popularity: length " + std::to_string(pop.size()) + " != " + std::to_string(n));
      g.popularity.push_back(std::move(pop));
      g.influence.push_back(matrix_from_json<double>(rd.at("influence"), n, at + ".influence"));
    }
    const Json& fin = field("final");
    auto pop = fin.at("popularity").get<std::vector<double>>();
    if (pop.size() != n) throw Error(where + ": final.popularity has wrong length");
    g.popularity.push_back(std::move(pop));
    g.influence.push_back(matrix_from_json<double>(fin.at("influence"), n, where + ": final.influence"));
    return r;
  } catch (const Json::exception& e) {
    throw Error(where + ": " + e.what());
  }
}

/// Hook for foreign on-disk formats: given a JSON document without our schema
/// tag, return the converted records (empty if the adapter does not apply).
using LogAdapter = std::function<std::vector<GameLogRecord>(const Json&, const std::string& where)>;

struct LoadResult {
  std::vector<GameLogRecord> records;
  std::vector<std::string> diagnostics;  // one entry per rejected record
};

inline void save_game_log(const GameLogRecord& r, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(r).dump(1) + "\n");
}

/// Writes one `<game id>.json` per record into `dir`.
inline void save_game_logs(const std::vector<GameLogRecord>& records, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& r : records) save_game_log(r, dir / (r.id + ".json"));
}

/// Loads a single record file, a file holding an array of records, or every
/// `*.json` file in a directory (sorted by name). In strict mode the first bad
/// record throws; otherwise it is reported in `diagnostics`.
inline LoadResult load_game_logs(const std::filesystem::path& path, bool strict = true, const LogAdapter& adapter = {}) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& e : std::filesystem::directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else if (std::filesystem::exists(path)) {
    files.push_back(path);
  } else {
    throw Error("no such file or directory: " + path.string());
  }

  LoadResult out;
  auto accept = [&](const Json& doc, const std::string& where) {
    try {
      if (doc.is_object() && doc.contains("schema")) {
        out.records.push_back(game_log_from_json(doc, where));
      } else if (adapter) {
        for (auto& r : adapter(doc, where)) out.records.push_back(std::move(r));
      } else {
        throw Error(where + ": missing field 'schema'");
      }
    } catch (const Error& e) {
      if (strict) throw;
      out.diagnostics.push_back(e.what());
    }
  };
  for (const auto& f : files) {
    Json doc;
    try {
      doc = Json::parse(read_file(f));
    } catch (const Json::parse_error& e) {
      const std::string msg = f.string() + ": " + e.what();
      if (strict) throw Error(msg);
      out.diagnostics.push_back(msg);
      continue;
    }
    if (doc.is_array()) {
      for (std::size_t k = 0; k < doc.size(); ++k) accept(doc[k], f.string() + "[" + std::to_string(k) + "]");
    } else {
      accept(doc, f.string());
    }
  }
  return out;
}

enum class SeatFilter { HumanOnly, All };

/// One player game per selected seat, truncated to `rounds_cap` rounds.
inline std::vector<PlayerGame> extract_player_games(const std::vector<GameLogRecord>& records, SeatFilter filter,
                                                    int rounds_cap = kRoundsCap) {
  std::vector<PlayerGame> out;
  for (const auto& r : records) {
    if (r.log.rounds() < 1) continue;
    auto shared = std::make_shared<const GameLog>(r.log);
    for (const auto& p : r.players)
      if (filter == SeatFilter::All || p.kind == SeatKind::Human)
        out.push_back(make_player_game(shared, p.seat, rounds_cap));
  }
  return out;
}

struct TrainTestSplit {
  std::vector<GameLogRecord> train;
  std::vector<GameLogRecord> test;
};

/// Draws `test_count` all-human games for testing; everything else trains.
inline TrainTestSplit split_train_test(const std::vector<GameLogRecord>& records, std::uint64_t seed,
                                       std::size_t test_count = 15) {
  std::vector<std::size_t> human;
  for (std::size_t k = 0; k < records.size(); ++k)
    if (records[k].all_human()) human.push_back(k);
  if (human.size() < test_count)
    throw Error("split_train_test: need " + std::to_string(test_count) + " all-human games, have " + std::to_string(human.size()));
  Rng rng = derive_rng(seed, 0x5E11);
  std::shuffle(human.begin(), human.end(), rng);
  std::vector<char> is_test(records.size(), 0);
  for (std::size_t k = 0; k < test_count; ++k) is_test[human[k]] = 1;
  TrainTestSplit s;
  for (std::size_t k = 0; k < records.size(); ++k) (is_test[k] ? s.test : s.train).push_back(records[k]);
  return s;
}

// ---- parameter pools ------------------------------------------------------

struct PoolFile {
  ModelKind kind = ModelKind::TFT;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> provenance;
  std::vector<Parameterization> members;

  bool operator==(const PoolFile&) const = default;
};

inline void save_pool(const PoolFile& pool, const std::filesystem::path& path) {
  Json members = Json::array();
  for (const auto& p : pool.members) members.push_back(p.values);
  Json j{{"schema", std::string(kPoolSchema)},
         {"model", std::string(to_string(pool.kind))},
         {"seed", pool.seed},
         {"provenance", pool.provenance},
         {"parameterizations", members}};
  write_file_atomic(path, j.dump(1) + "\n");
}

inline PoolFile load_pool(const std::filesystem::path& path) {
  try {
    const Json j = Json::parse(read_file(path));
    if (j.value("schema", "") != kPoolSchema) throw Error(path.string() + ": not a parameter pool file");
    PoolFile pool;
    pool.kind = parse_model_kind(j.at("model").get<std::string>());
    pool.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("provenance")) pool.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
    for (const auto& v : j.at("parameterizations")) {
      Parameterization p{pool.kind, v.get<std::vector<double>>()};
      validate(p);
      pool.members.push_back(std::move(p));
    }
    if (pool.members.empty()) throw Error(path.string() + ": pool is empty");
    return pool;
  } catch (const Json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

// ---- metric tables --------------------------------------------------------

struct MetricRow {
  std::string label;
  std::string game_id;
  MetricVector metrics;
};

inline void write_metric_table(std::ostream& out, const std::vector<MetricRow>& rows, char sep = ',') {
  out << "label" << sep << "game_id";
  for (auto name : kMetricNames) out << sep << name;
  out << '\n';
  out.precision(17);
  for (const auto& r : rows) {
    out << r.label << sep << r.game_id;
    for (double v : r.metrics.values()) out << sep << v;
    out << '\n';
  }
}

inline std::vector<MetricRow> read_metric_table(std::istream& in, char sep = ',') {
  std::string line;
  if (!std::getline(in, line)) throw Error("metric table is empty");
  std::vector<MetricRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, sep);) cells.push_back(cell);
    if (cells.size() != 2 + kMetricCount) throw Error("metric table line " + std::to_string(line_no) + ": wrong column count");
    std::array<double, kMetricCount> v{};
    for (std::size_t k = 0; k < kMetricCount; ++k) v[k] = std::stod(cells[2 + k]);
    rows.push_back({cells[0], cells[1], MetricVector::from_values(v)});
  }
  return rows;
}

}  // namespace jhg
