#pragma once

#include <atomic>
#include <thread>

#include <httplib.h>

#include "jhg/server/game_service.hpp"

namespace jhg::server {

inline SeatKind parse_guess(const std::string& s) {
  if (s == "human") return SeatKind::Human;
  if (s == "bot" || s == "agent") return SeatKind::Agent;
  throw GameService::Rejected("guess must be \"human\" or \"bot\", got \"" + s + "\"");
}

/// Game config from a create request: {"players"?, "tokens", "rounds", "popularity": number | [..]}.
inline GameConfig config_from_request(const Json& j, std::size_t seats) {
  GameConfig c = make_config(seats, j.value("tokens", 16), j.value("rounds", 15));
  if (j.contains("popularity")) {
    const auto& p = j.at("popularity");
    if (p.is_number())
      c.initial_popularity.assign(seats, p.get<double>());
    else
      c.initial_popularity = p.get<std::vector<double>>();
  }
  if (j.contains("dynamics")) c.dynamics = dynamics_from_json(j.at("dynamics"));
  return c;
}

/// JSON-over-HTTP front end of a GameService.
///
///   POST /games                       {"humans","agents","pool":[..],"config":{..},"seed","deadline_ms"?}
///   POST /games/:id/join              {"credential"}
///   GET  /games/:id/state?credential=
///   POST /games/:id/allocation        {"credential","round","allocation":[..]}
///   POST /games/:id/survey            {"credential","guesses":{"p2":"bot",..}}
///   GET  /games/:id/events?credential=&since=
///   GET  /games/:id/stream?credential=&since=   (text/event-stream)
///   GET  /games/:id/report
class HttpFrontend {
 public:
  explicit HttpFrontend(GameService& service) : service_(service) { routes(); }
  ~HttpFrontend() { stop(); }

  /// Binds and serves on a background thread. Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    running_ = true;
    listener_ = std::thread([this] { server_.listen_after_bind(); });
    ticker_ = std::thread([this] {
      while (running_) {
        service_.tick();
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
    });
    server_.wait_until_ready();
    return bound;
  }

  void stop() {
    if (!running_) return;
    running_ = false;
    server_.stop();
    if (listener_.joinable()) listener_.join();
    if (ticker_.joinable()) ticker_.join();
  }

  httplib::Server& raw() { return server_; }

 private:
  GameService& service_;
  httplib::Server server_;
  std::thread listener_, ticker_;
  std::atomic<bool> running_{false};

  static void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <class F>
  auto guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const GameService::NotFound& e) {
        reply(res, 404, {{"error", e.what()}});
      } catch (const GameService::Rejected& e) {
        reply(res, 409, {{"error", e.what()}});
      } catch (const Json::exception& e) {
        reply(res, 400, {{"error", std::string("malformed request: ") + e.what()}});
      } catch (const Error& e) {
        reply(res, 400, {{"error", e.what()}});
      }
    };
  }

  static std::string credential_of(const httplib::Request& req) {
    if (req.has_param("credential")) return req.get_param_value("credential");
    if (req.has_header("X-Credential")) return req.get_header_value("X-Credential");
    throw GameService::NotFound("missing credential");
  }

  static std::uint64_t since_of(const httplib::Request& req) {
    return req.has_param("since") ? std::stoull(req.get_param_value("since")) : 0;
  }

  void routes() {
    server_.Post("/games", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json j = Json::parse(req.body);
      RosterSpec roster{j.value("humans", std::size_t{0}), j.value("agents", std::size_t{0}), {}};
      for (const auto& p : j.value("pool", Json::array())) roster.pool.push_back(parameterization_from_json(p));
      const GameConfig c = config_from_request(j.value("config", Json::object()), roster.humans + roster.agents);
      std::optional<std::chrono::milliseconds> deadline;
      if (j.contains("deadline_ms")) deadline = std::chrono::milliseconds(j.at("deadline_ms").get<long>());
      const auto r = service_.create_game(roster, c, j.value("seed", std::uint64_t{0}), deadline);
      reply(res, 201, {{"game_id", r.game_id}, {"credentials", r.credentials}});
    }));

    server_.Post("/games/:id/join", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json j = Json::parse(req.body);
      reply(res, 200, {{"label", service_.join(req.path_params.at("id"), j.at("credential").get<std::string>())}});
    }));

    server_.Get("/games/:id/state", guarded([this](const httplib::Request& req, httplib::Response& res) {
      reply(res, 200, service_.state(req.path_params.at("id"), credential_of(req)));
    }));

    server_.Post("/games/:id/allocation", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json j = Json::parse(req.body);
      const auto o = service_.submit_allocation(req.path_params.at("id"), j.at("credential").get<std::string>(),
                                                j.at("round").get<int>(), j.at("allocation").get<std::vector<int>>());
      if (o.ok)
        reply(res, 200, {{"accepted", true}});
      else
        reply(res, 422, {{"accepted", false}, {"reason", o.reason}});
    }));

    server_.Post("/games/:id/survey", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json j = Json::parse(req.body);
      std::map<std::string, SeatKind> guesses;
      for (const auto& [label, v] : j.at("guesses").items()) guesses[label] = parse_guess(v.get<std::string>());
      const auto r = service_.submit_survey(req.path_params.at("id"), j.at("credential").get<std::string>(), guesses);
      reply(res, 200, {{"correct", r.correct}, {"total", r.total}});
    }));

    server_.Get("/games/:id/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
      reply(res, 200, service_.events(req.path_params.at("id"), credential_of(req), since_of(req)));
    }));

    server_.Get("/games/:id/report", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.path_params.at("id");
      if (!service_.closed(id)) throw GameService::Rejected("report is available once the game closes");
      const auto r = service_.survey_report(id);
      reply(res, 200, {{"respondents", r.respondents}, {"correct", r.correct}, {"total", r.total},
                       {"correct_rate", r.correct_rate}, {"chance", r.chance}});
    }));

    server_.Get("/games/:id/stream", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.path_params.at("id"), cred = credential_of(req);
      service_.events(id, cred, 0);  // authenticates before the stream opens
      auto next = std::make_shared<std::uint64_t>(since_of(req));
      res.set_chunked_content_provider("text/event-stream", [this, id, cred, next](std::size_t, httplib::DataSink& sink) {
        while (running_ && sink.is_writable()) {
          const auto batch = service_.wait_events(id, cred, *next, std::chrono::milliseconds(250));
          for (const auto& e : batch) {
            const std::string frame = "id: " + std::to_string(e.at("seq").get<std::uint64_t>()) + "\nevent: " +
                                      e.at("type").get<std::string>() + "\ndata: " + e.dump() + "\n\n";
            if (!sink.write(frame.data(), frame.size())) return false;
            ++*next;
          }
          if (service_.closed(id) && batch.empty()) {
            sink.done();
            return true;
          }
        }
        return false;
      });
    }));
  }
};

}  // namespace jhg::server
