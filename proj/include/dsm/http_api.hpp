#pragma once

#include <atomic>
#include <functional>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dsm/json_io.hpp"
#include "dsm/service.hpp"

namespace dsm {

// Status code for an exception escaping a handler.
inline int http_status_for(const std::exception& e) {
  if (dynamic_cast<const unauthorized*>(&e)) return 401;
  if (dynamic_cast<const not_found*>(&e)) return 404;
  if (dynamic_cast<const conflict*>(&e)) return 409;
  if (dynamic_cast<const no_data*>(&e)) return 404;
  if (dynamic_cast<const error*>(&e)) return 400;
  return 500;
}

namespace http_detail {

using nlohmann::json;

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("request body is not JSON: ") + e.what());
  }
}

inline std::string bearer(const httplib::Request& req) {
  auto h = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (h.size() <= prefix.size() || h.compare(0, prefix.size(), prefix) != 0)
    throw unauthorized("missing bearer token");
  return h.substr(prefix.size());
}

inline std::optional<std::string> query(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

inline int query_int(const httplib::Request& req, const char* key) {
  auto v = query(req, key);
  if (!v) throw validation_error(std::string("missing query parameter '") + key + "'");
  int out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || p != v->data() + v->size())
    throw validation_error(std::string("query parameter '") + key + "' must be an integer");
  return out;
}

}  // namespace http_detail

// Registers every endpoint of the JSON API on `server`. Schemas: docs/api.md.
inline void install_routes(httplib::Server& server, app& a) {
  using namespace http_detail;
  using handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  auto guarded = [](handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const std::exception& e) {
        int status = http_status_for(e);
        send_json(res, status, json_io::error_json(status, e.what()));
      }
    };
  };
  auto authed = [&a, guarded](std::function<void(user_id, const httplib::Request&, httplib::Response&)> h) {
    return guarded([&a, h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      h(a.authenticate(bearer(req)), req, res);
    });
  };
  auto today = [&a] { return day_of(a.now()); };

  server.Post("/users", guarded([&a](const httplib::Request& req, httplib::Response& res) {
    auto r = json_io::registration_from_json(body_json(req));
    auto id = a.register_user(r.profile, r.password);
    send_json(res, 201, json_io::to_json(a.profile(id)));
  }));

  server.Post("/login", guarded([&a](const httplib::Request& req, httplib::Response& res) {
    auto j = body_json(req);
    auto t = a.login(json_io::detail::get<std::string>(j, "email"), json_io::detail::get<std::string>(j, "password"));
    send_json(res, 200, json_io::to_json(t));
  }));

  server.Get("/me", authed([&a](user_id u, const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, json_io::to_json(a.profile(u)));
  }));

  server.Put("/goals", authed([&a](user_id u, const httplib::Request& req, httplib::Response& res) {
    auto v = a.set_goals(u, json_io::goals_from_json(body_json(req)));
    int status = v.verdict == goal_verdict::accepted ? 200 : v.verdict == goal_verdict::corrected ? 202 : 400;
    send_json(res, status, json_io::to_json(v));
  }));

  server.Get("/goals", authed([&a, today](user_id u, const httplib::Request& req, httplib::Response& res) {
    auto d = query(req, "date");
    auto g = a.goals(u, d ? parse_date(*d) : today());
    if (!g) throw not_found("no goals set");
    send_json(res, 200, json_io::to_json(*g));
  }));

  server.Post("/readings", authed([&a](user_id u, const httplib::Request& req, httplib::Response& res) {
    auto r = json_io::reading_from_json(body_json(req));
    send_json(res, 200, json_io::to_json(a.add_reading(u, r.value, r.context, r.taken_at)));
  }));

  server.Post("/exercise", authed([&a](user_id u, const httplib::Request& req, httplib::Response& res) {
    auto j = body_json(req);
    auto key = req.get_header_value("Idempotency-Key");
    if (key.empty()) key = json_io::detail::get_opt<std::string>(j, "idempotency_key").value_or("");
    send_json(res, 200, json_io::to_json(a.add_exercise(u, json_io::exercise_from_json(j), key)));
  }));

  server.Post("/meals", authed([&a](user_id u, const httplib::Request& req, httplib::Response& res) {
    auto m = json_io::meal_from_json(body_json(req));
    json out;
    if (m.kcal) {
      auto id = a.add_meal(u, meal_record{u, m.eaten_at.value_or(timestamp{}), m.description, *m.kcal});
      out = {{"id", id}, {"kcal", *m.kcal}};
    } else {
      auto [id, food] = a.add_meal_from_food(u, *m.food, *m.grams, m.eaten_at);
      out = {{"id", id}, {"kcal", food.record.kcal_per_100g * *m.grams / 100.0}, {"food", json_io::to_json(food)}};
    }
    send_json(res, 201, out);
  }));

  server.Post("/medications", authed([&a](user_id u, const httplib::Request& req, httplib::Response& res) {
    auto id = a.add_medication(u, json_io::medication_from_json(body_json(req)));
    send_json(res, 201, {{"id", id}});
  }));

  server.Post("/steps/import", authed([&a](user_id u, const httplib::Request& req, httplib::Response& res) {
    std::istringstream in(req.body);
    auto result = a.import_steps(u, import_steps(in));
    send_json(res, result.errors.empty() ? 200 : 207, json_io::to_json(result));
  }));

  server.Get("/foods", guarded([&a](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, json_io::to_json(a.lookup_food(query(req, "q").value_or(""))));
  }));

  server.Post("/days/close", authed([&a, today](user_id u, const httplib::Request& req, httplib::Response& res) {
    auto j = body_json(req);
    auto d = json_io::detail::get_opt<std::string>(j, "date");
    send_json(res, 200, json_io::to_json(a.close_day(u, d ? parse_date(*d) : today() - std::chrono::days{1})));
  }));

  server.Get("/recommendation", guarded([&a](const httplib::Request& req, httplib::Response& res) {
    auto when = enum_from_string<phase>(query(req, "phase").value_or(""));
    auto context = enum_from_string<meal_context>(query(req, "context").value_or(""));
    int bg = query_int(req, "bg");
    std::optional<exercise_session> session;
    if (when == phase::post_exercise) {
      exercise_session s;
      s.duration_min = query_int(req, "duration_min");
      s.kcal_burned = query_int(req, "kcal");
      s.bg_before = glucose_reading{0, query_int(req, "bg_before"), context, {}};
      session = s;
    }
    send_json(res, 200, json_io::to_json(a.what_if(when, context, bg, session)));
  }));

  server.Get("/rules", guarded([&a](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, rules_to_json(a.rules()));
  }));

  server.Get("/rewards", authed([&a](user_id u, const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, json_io::to_json(a.rewards(u)));
  }));

  server.Get("/analytics", authed([&a, today](user_id u, const httplib::Request& req, httplib::Response& res) {
    auto g = enum_from_string<granularity>(query(req, "granularity").value_or("daily"));
    auto from = query(req, "from");
    auto to = query(req, "to");
    date last = to ? parse_date(*to) : today();
    date first = from ? parse_date(*from) : last - std::chrono::days{study_window_days - 1};
    if (last < first) throw validation_error("'from' is after 'to'");
    auto bundle = a.analytics(u, {first, last}, g);
    if (query(req, "format").value_or("json") == "csv") {
      std::ostringstream out;
      write_analytics_csv(out, std::span<const series_bundle>(&bundle, 1));
      res.status = 200;
      res.set_content(out.str(), "text/csv");
      return;
    }
    send_json(res, 200, json_io::to_json(bundle));
  }));

  server.Get("/reminders", authed([&a, today](user_id u, const httplib::Request& req, httplib::Response& res) {
    auto d = query(req, "date");
    json out = json::array();
    for (const auto& r : a.reminders_due(u, d ? parse_date(*d) : today())) out.push_back(json_io::to_json(r));
    send_json(res, 200, out);
  }));

  server.Post("/education/survey", authed([&a](user_id u, const httplib::Request& req, httplib::Response& res) {
    auto survey = json_io::survey_from_json(body_json(req));
    survey.user = u;
    json out = json::array();
    for (const auto& [i, text] : a.education(survey))
      out.push_back({{"area", to_string(i.area)}, {"content_key", i.content_key}, {"text", text}});
    send_json(res, 200, out);
  }));
}

// Owns an httplib server running on a background thread.
class http_service {
 public:
  explicit http_service(app& a) { install_routes(server_, a); }
  http_service(const http_service&) = delete;
  http_service& operator=(const http_service&) = delete;
  ~http_service() { stop(); }

  // Port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port) {
    int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw error("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return bound;
  }

  // Blocks until stop() is called from another thread.
  void run(const std::string& host, int port) {
    if (!server_.listen(host, port)) throw error("cannot listen on " + host + ":" + std::to_string(port));
  }

  void stop() {
    if (server_.is_running()) server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace dsm
