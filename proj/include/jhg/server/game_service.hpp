#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jhg/agents/policy.hpp"
#include "jhg/dataset.hpp"
#include "jhg/harness.hpp"

namespace jhg::server {

enum class Phase { Lobby, InRound, Resolving, Survey, Closed };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Lobby: return "lobby";
    case Phase::InRound: return "in_round";
    case Phase::Resolving: return "resolving";
    case Phase::Survey: return "survey";
    case Phase::Closed: return "closed";
  }
  return "?";
}

/// Seat composition of a new game. Agent seats draw uniformly from `pool`.
struct RosterSpec {
  std::size_t humans = 0;
  std::size_t agents = 0;
  std::vector<Parameterization> pool;
};

struct CreateResult {
  std::string game_id;
  std::vector<std::string> credentials;  // one per human seat
};

struct Event {
  std::uint64_t seq = 0;
  std::string type;
  Json payload;
};

struct SurveyRecord {
  std::string game_id;
  std::string respondent;
  std::map<std::string, SeatKind> guesses;
  std::map<std::string, SeatKind> truth;
  std::size_t correct = 0;
  std::size_t total = 0;
};

inline Json to_json(const SurveyRecord& s) {
  auto side = [](const std::map<std::string, SeatKind>& m) {
    Json j = Json::object();
    for (const auto& [label, kind] : m) j[label] = kind == SeatKind::Human ? "human" : "bot";
    return j;
  };
  return {{"schema", "jhg-survey/1"}, {"game_id", s.game_id}, {"respondent", s.respondent},
          {"guesses", side(s.guesses)}, {"truth", side(s.truth)}, {"correct", s.correct}, {"total", s.total}};
}

struct SurveyReport {
  std::size_t respondents = 0;
  std::size_t correct = 0;
  std::size_t total = 0;
  double correct_rate = 0.0;  // percent
  double chance = 0.0;        // percent, averaged over respondents
};

/// Result of a request that can be refused without it being a server fault.
struct Outcome {
  bool ok = true;
  std::string reason;
  static Outcome accept() { return {}; }
  static Outcome reject(std::string why) { return {false, std::move(why)}; }
};

class GameService;

/// One hosted game. All mutation happens under `mutex_`.
class SessionGame {
 public:
  using Clock = std::chrono::steady_clock;

  const std::string& id() const { return id_; }

 private:
  friend class GameService;

  struct Seat {
    SeatKind kind = SeatKind::Human;
    std::string credential;
    bool joined = false;
    Policy policy;
    PlayerDescriptor descriptor;
    std::optional<AllocationVector> pending;
    bool surveyed = false;
  };

  std::string id_;
  GameConfig config_;
  std::uint64_t seed_ = 0;
  std::vector<Seat> seats_;
  GameState state_;
  GameLog log_;
  Phase phase_ = Phase::Lobby;
  std::vector<Event> events_;
  std::vector<SurveyRecord> surveys_;
  std::optional<std::chrono::milliseconds> deadline_;
  Clock::time_point round_started_{};
  std::optional<std::filesystem::path> persist_dir_;

  mutable std::mutex mutex_;
  std::condition_variable changed_;

  static std::string label(std::size_t seat) { return "p" + std::to_string(seat + 1); }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < seats_.size(); ++i) out.push_back(label(i));
    return out;
  }

  std::size_t humans() const {
    std::size_t h = 0;
    for (const auto& s : seats_) h += s.kind == SeatKind::Human;
    return h;
  }

  std::optional<std::size_t> seat_of(const std::string& credential) const {
    for (std::size_t i = 0; i < seats_.size(); ++i)
      if (seats_[i].kind == SeatKind::Human && seats_[i].credential == credential) return i;
    return std::nullopt;
  }

  void emit(std::string type, Json payload) {
    events_.push_back({events_.size(), std::move(type), std::move(payload)});
    changed_.notify_all();
  }

  void start_round(Clock::time_point now) {
    phase_ = Phase::InRound;
    round_started_ = now;
    emit("round_started", {{"round", state_.round + 1}});
  }

  void open(Clock::time_point now) {
    if (humans() == 0) {
      start_round(now);
      while (phase_ == Phase::InRound) resolve(now);
    } else {
      emit("lobby", {{"players", labels()}, {"joined", 0}, {"needed", humans()}});
    }
  }

  bool all_submitted() const {
    for (const auto& s : seats_)
      if (s.kind == SeatKind::Human && !s.pending) return false;
    return true;
  }

  void resolve(Clock::time_point now) {
    phase_ = Phase::Resolving;
    const std::size_t n = seats_.size();
    const int t = state_.round;
    AllocationMatrix x(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      AllocationVector a;
      if (seats_[j].kind == SeatKind::Human) {
        a = *seats_[j].pending;
      } else {
        Rng rng = derive_rng(seed_, j, static_cast<std::uint64_t>(t));
        a = seats_[j].policy(view_of(state_, j, config_.tokens_per_round), rng);
        a.owner = j;
        if (auto why = validate_allocation(a, config_)) throw Error("agent seat produced invalid allocation: " + *why);
      }
      for (std::size_t i = 0; i < n; ++i) x(j, i) = a.tokens[i];
      seats_[j].pending.reset();
    }
    state_ = resolve_round(state_, x, config_);
    log_.allocations.push_back(x);
    log_.popularity.push_back(state_.popularity);
    log_.influence.push_back(state_.influence);

    Json matrix = Json::array();
    for (std::size_t r = 0; r < n; ++r) matrix.push_back(std::vector<int>(x.row(r).begin(), x.row(r).end()));
    emit("round_result", {{"round", state_.round}, {"popularity", state_.popularity}, {"allocations", matrix}});

    if (state_.round >= config_.max_rounds) {
      if (humans() == 0) {
        close();
      } else {
        phase_ = Phase::Survey;
        emit("survey_open", {{"rounds", state_.round}, {"associates", labels()}});
      }
    } else {
      start_round(now);
    }
  }

  GameLogRecord record() const {
    GameLogRecord r;
    r.id = id_;
    r.log = log_;
    for (const auto& s : seats_) r.players.push_back(s.descriptor);
    return r;
  }

  void close() {
    phase_ = Phase::Closed;
    Json kinds = Json::object();
    for (std::size_t i = 0; i < seats_.size(); ++i)
      kinds[label(i)] = seats_[i].kind == SeatKind::Human ? "human" : "bot";
    emit("closed", {{"seat_kinds", kinds}});
    if (persist_dir_) {
      std::filesystem::create_directories(*persist_dir_);
      save_game_log(record(), *persist_dir_ / (id_ + ".json"));
      if (!surveys_.empty()) std::filesystem::create_directories(*persist_dir_ / "surveys");
      for (const auto& s : surveys_)
        write_file_atomic(*persist_dir_ / "surveys" / (id_ + "-" + s.respondent + ".json"), to_json(s).dump(2));
    }
  }

  Json event_json(const Event& e, std::size_t seat) const {
    Json j = {{"seq", e.seq}, {"type", e.type}, {"data", e.payload}};
    if (e.type == "round_result") {
      // The seat's own flows, read off its row and column of the public matrix.
      const auto& m = e.payload.at("allocations");
      Json sent = Json::object(), received = Json::object();
      for (std::size_t i = 0; i < seats_.size(); ++i) {
        if (i == seat) continue;
        sent[label(i)] = m[seat][i];
        received[label(i)] = m[i][seat];
      }
      j["data"]["you"] = {{"label", label(seat)}, {"sent", sent}, {"received", received}, {"kept", m[seat][seat]}};
    }
    return j;
  }

  Json state_json(std::size_t seat) const {
    Json j = {{"game_id", id_},
              {"label", label(seat)},
              {"players", labels()},
              {"phase", to_string(phase_)},
              {"tokens_per_round", config_.tokens_per_round},
              {"rounds_played", state_.round},
              {"popularity", state_.popularity},
              {"popularity_history", log_.popularity},
              {"submitted", seats_[seat].pending.has_value()},
              {"event_count", events_.size()}};
    if (phase_ == Phase::InRound) j["round"] = state_.round + 1;
    if (seats_[seat].pending) j["pending"] = seats_[seat].pending->tokens;
    if (!state_.history.empty()) {
      Json last = Json::array();
      const auto& x = state_.history.back();
      for (std::size_t r = 0; r < x.rows(); ++r) last.push_back(std::vector<int>(x.row(r).begin(), x.row(r).end()));
      j["last_allocations"] = last;
    }
    if (phase_ == Phase::Survey || phase_ == Phase::Closed) j["max_rounds"] = config_.max_rounds;
    if (phase_ == Phase::Survey) j["surveyed"] = seats_[seat].surveyed;
    if (phase_ == Phase::Closed) {
      Json kinds = Json::object();
      for (std::size_t i = 0; i < seats_.size(); ++i)
        kinds[label(i)] = seats_[i].kind == SeatKind::Human ? "human" : "bot";
      j["seat_kinds"] = kinds;
    }
    if (deadline_ && phase_ == Phase::InRound) j["deadline_ms"] = deadline_->count();
    return j;
  }
};

/// Hosts many games. Each game serializes its own mutations; the registry
/// lock is held only to find or insert games.
class GameService {
 public:
  using Clock = SessionGame::Clock;

  struct Options {
    std::optional<std::filesystem::path> persist_dir;
  };

  GameService() = default;
  explicit GameService(Options o) : options_(std::move(o)) {}

  CreateResult create_game(const RosterSpec& roster, const GameConfig& config, std::uint64_t seed,
                           std::optional<std::chrono::milliseconds> deadline = std::nullopt,
                           Clock::time_point now = Clock::now()) {
    validate_config(config);
    if (roster.humans + roster.agents != config.player_count)
      throw Error("roster has " + std::to_string(roster.humans + roster.agents) + " seats for " +
                  std::to_string(config.player_count) + " players");
    if (roster.agents > 0 && roster.pool.empty()) throw Error("agent seats need a non-empty pool");
    for (const auto& p : roster.pool) validate(p);

    auto g = std::make_shared<SessionGame>();
    g->config_ = config;
    g->seed_ = seed;
    g->deadline_ = deadline;
    g->persist_dir_ = options_.persist_dir;
    g->state_ = new_game(config);
    g->log_.config = config;
    g->log_.popularity.push_back(g->state_.popularity);
    g->log_.influence.push_back(g->state_.influence);

    // Seat order is shuffled so labels carry no information about seat kind.
    std::vector<SeatKind> kinds(roster.humans, SeatKind::Human);
    kinds.insert(kinds.end(), roster.agents, SeatKind::Agent);
    Rng rng = derive_rng(seed, 0xC0FFEE);
    std::shuffle(kinds.begin(), kinds.end(), rng);
    std::uniform_int_distribution<std::size_t> pick(0, roster.pool.empty() ? 0 : roster.pool.size() - 1);

    CreateResult out;
    g->seats_.resize(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      auto& s = g->seats_[i];
      s.kind = kinds[i];
      s.descriptor = {i, kinds[i], "", ""};
      if (kinds[i] == SeatKind::Agent) {
        const Parameterization& p = roster.pool[pick(rng)];
        s.policy = make_policy(p);
        s.descriptor.model = std::string(to_string(p.kind));
        s.descriptor.params_ref = to_json(p).dump();
      } else {
        s.credential = new_credential();
        out.credentials.push_back(s.credential);
      }
    }

    {
      std::lock_guard lock(registry_mutex_);
      do g->id_ = "g" + std::to_string(++next_id_);
      while (options_.persist_dir && std::filesystem::exists(*options_.persist_dir / (g->id_ + ".json")));
      games_[g->id_] = g;
    }
    out.game_id = g->id_;
    std::lock_guard lock(g->mutex_);
    g->open(now);
    return out;
  }

  /// Claims the seat behind `credential`. Returns its anonymous label.
  std::string join(const std::string& game_id, const std::string& credential, Clock::time_point now = Clock::now()) {
    auto g = find(game_id);
    std::lock_guard lock(g->mutex_);
    auto seat = authenticate(*g, credential);
    if (g->seats_[seat].joined) throw Rejected("seat already joined");
    g->seats_[seat].joined = true;
    std::size_t joined = 0;
    for (const auto& s : g->seats_) joined += s.kind == SeatKind::Human && s.joined;
    g->emit("lobby", {{"players", g->labels()}, {"joined", joined}, {"needed", g->humans()}});
    if (joined == g->humans() && g->phase_ == Phase::Lobby) g->start_round(now);
    return SessionGame::label(seat);
  }

  Json state(const std::string& game_id, const std::string& credential) {
    auto g = find(game_id);
    std::lock_guard lock(g->mutex_);
    return g->state_json(authenticate(*g, credential));
  }

  /// `round` is the 1-based round the client believes it is playing.
  Outcome submit_allocation(const std::string& game_id, const std::string& credential, int round,
                            const std::vector<int>& tokens, Clock::time_point now = Clock::now()) {
    auto g = find(game_id);
    std::lock_guard lock(g->mutex_);
    const auto seat = authenticate(*g, credential);
    if (g->phase_ != Phase::InRound) return Outcome::reject("not accepting allocations in phase " + std::string(to_string(g->phase_)));
    if (round != g->state_.round + 1)
      return Outcome::reject("round " + std::to_string(round) + " is not the current round");
    AllocationVector a(seat, tokens);
    if (auto why = validate_allocation(a, g->config_)) return Outcome::reject(*why);
    g->seats_[seat].pending = std::move(a);
    if (g->all_submitted()) g->resolve(now);
    return Outcome::accept();
  }

  /// Auto-submits all-keep for missing seats of games whose deadline passed.
  void tick(Clock::time_point now = Clock::now()) {
    for (auto& g : snapshot()) {
      std::lock_guard lock(g->mutex_);
      if (g->phase_ != Phase::InRound || !g->deadline_ || now - g->round_started_ < *g->deadline_) continue;
      for (std::size_t j = 0; j < g->seats_.size(); ++j) {
        auto& s = g->seats_[j];
        if (s.kind != SeatKind::Human || s.pending) continue;
        std::vector<int> keep(g->seats_.size(), 0);
        keep[j] = g->config_.tokens_per_round;
        s.pending = AllocationVector(j, keep);
      }
      g->resolve(now);
    }
  }

  std::vector<Json> events(const std::string& game_id, const std::string& credential, std::uint64_t since = 0) {
    auto g = find(game_id);
    std::lock_guard lock(g->mutex_);
    const auto seat = authenticate(*g, credential);
    std::vector<Json> out;
    for (std::size_t k = since; k < g->events_.size(); ++k) out.push_back(g->event_json(g->events_[k], seat));
    return out;
  }

  /// Blocks until an event past `since` exists, the game closes, or the timeout elapses.
  std::vector<Json> wait_events(const std::string& game_id, const std::string& credential, std::uint64_t since,
                                std::chrono::milliseconds timeout) {
    auto g = find(game_id);
    std::unique_lock lock(g->mutex_);
    const auto seat = authenticate(*g, credential);
    g->changed_.wait_for(lock, timeout, [&] { return g->events_.size() > since; });
    std::vector<Json> out;
    for (std::size_t k = since; k < g->events_.size(); ++k) out.push_back(g->event_json(g->events_[k], seat));
    return out;
  }

  bool closed(const std::string& game_id) {
    auto g = find(game_id);
    std::lock_guard lock(g->mutex_);
    return g->phase_ == Phase::Closed;
  }

  SurveyRecord submit_survey(const std::string& game_id, const std::string& credential,
                             const std::map<std::string, SeatKind>& guesses) {
    auto g = find(game_id);
    std::lock_guard lock(g->mutex_);
    const auto seat = authenticate(*g, credential);
    if (g->phase_ != Phase::Survey) throw Rejected("survey is not open");
    if (g->seats_[seat].surveyed) throw Rejected("survey already submitted");
    SurveyRecord r;
    r.game_id = g->id_;
    r.respondent = SessionGame::label(seat);
    for (std::size_t i = 0; i < g->seats_.size(); ++i) {
      if (i == seat) continue;
      const std::string l = SessionGame::label(i);
      auto it = guesses.find(l);
      if (it == guesses.end()) throw Rejected("missing guess for " + l);
      r.guesses[l] = it->second;
      r.truth[l] = g->seats_[i].kind;
      r.correct += it->second == g->seats_[i].kind;
      ++r.total;
    }
    if (guesses.size() != r.total) throw Rejected("guesses must cover exactly the other players");
    g->seats_[seat].surveyed = true;
    g->surveys_.push_back(r);
    g->emit("survey_progress", {{"submitted", g->surveys_.size()}, {"needed", g->humans()}});
    if (g->surveys_.size() == g->humans()) g->close();
    return r;
  }

  SurveyReport survey_report(const std::string& game_id) {
    auto g = find(game_id);
    std::lock_guard lock(g->mutex_);
    SurveyReport rep;
    double chance = 0.0;
    for (const auto& s : g->surveys_) {
      ++rep.respondents;
      rep.correct += s.correct;
      rep.total += s.total;
      std::size_t bots = 0;
      for (const auto& [l, k] : s.truth) bots += k == SeatKind::Agent;
      chance += chance_baseline(bots, s.truth.size() - bots);
    }
    if (rep.total > 0) rep.correct_rate = 100.0 * static_cast<double>(rep.correct) / static_cast<double>(rep.total);
    if (rep.respondents > 0) rep.chance = chance / static_cast<double>(rep.respondents);
    return rep;
  }

  /// Engine-format record of the game so far, seat kinds included.
  GameLogRecord record(const std::string& game_id) {
    auto g = find(game_id);
    std::lock_guard lock(g->mutex_);
    return g->record();
  }

  std::vector<SurveyRecord> surveys(const std::string& game_id) {
    auto g = find(game_id);
    std::lock_guard lock(g->mutex_);
    return g->surveys_;
  }

  /// Refusal caused by the request (bad credential, duplicate, wrong phase).
  struct Rejected : Error {
    using Error::Error;
  };
  struct NotFound : Error {
    using Error::Error;
  };

 private:
  Options options_;
  std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<SessionGame>> games_;
  std::uint64_t next_id_ = 0;
  std::random_device entropy_;

  std::string new_credential() {
    std::lock_guard lock(registry_mutex_);
    static constexpr char hex[] = "0123456789abcdef";
    std::string s;
    for (int k = 0; k < 4; ++k) {
      std::uint32_t v = entropy_();
      for (int b = 0; b < 8; ++b, v >>= 4) s += hex[v & 0xF];
    }
    return s;
  }

  std::shared_ptr<SessionGame> find(const std::string& id) {
    std::lock_guard lock(registry_mutex_);
    auto it = games_.find(id);
    if (it == games_.end()) throw NotFound("unknown game " + id);
    return it->second;
  }

  std::vector<std::shared_ptr<SessionGame>> snapshot() {
    std::lock_guard lock(registry_mutex_);
    std::vector<std::shared_ptr<SessionGame>> out;
    for (auto& [id, g] : games_) out.push_back(g);
    return out;
  }

  static std::size_t authenticate(const SessionGame& g, const std::string& credential) {
    auto seat = g.seat_of(credential);
    if (!seat) throw NotFound("unknown credential");
    return *seat;
  }
};

}  // namespace jhg::server
