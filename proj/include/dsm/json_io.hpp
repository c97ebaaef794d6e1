#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dsm/service.hpp"

// Request parsing and response shapes for the HTTP API. Field names here are
// the wire contract documented in docs/api.md.
namespace dsm::json_io {

using nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw validation_error("request body must be a JSON object");
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw validation_error(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get(const json& j, const char* key) {
  const auto& v = field(j, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw validation_error(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.is_object()) throw validation_error("request body must be a JSON object");
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return get<T>(j, key);
}

// Integers only: 95.5 mg/dL is rejected rather than truncated.
inline int get_int(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) throw validation_error(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

template <typename Enum>
Enum get_enum(const json& j, const char* key) {
  return enum_from_string<Enum>(get<std::string>(j, key));
}

}  // namespace detail

// --- requests ----------------------------------------------------------------

struct registration {
  user_profile profile;
  std::string password;
};

inline registration registration_from_json(const json& j) {
  using namespace detail;
  registration r;
  r.profile.nickname = get<std::string>(j, "nickname");
  r.profile.email = get<std::string>(j, "email");
  r.profile.age = get_int(j, "age");
  r.profile.sex = get_enum<gender>(j, "gender");
  r.profile.height_cm = get<double>(j, "height_cm");
  r.profile.weight_kg = get<double>(j, "weight_kg");
  r.profile.activity = get_enum<exercise_status>(j, "exercise_status");
  if (auto at = get_opt<std::string>(j, "registered_at")) r.profile.registered_at = parse_timestamp(*at);
  r.password = get<std::string>(j, "password");
  return r;
}

inline goal_set goals_from_json(const json& j) {
  using namespace detail;
  goal_set g;
  const auto& bg = field(j, "bg_target");
  g.bg.low = get_int(bg, "low");
  g.bg.high = get_int(bg, "high");
  if (auto v = get_opt<std::int64_t>(j, "daily_steps")) g.daily_steps = *v;
  if (auto v = get_opt<double>(j, "daily_kcal_burn")) g.daily_kcal_burn = *v;
  if (auto v = get_opt<std::vector<std::string>>(j, "medication_times"))
    for (const auto& t : *v) g.medication_times.push_back(parse_time_of_day(t));
  if (auto v = get_opt<bool>(j, "diet_log_required")) g.diet_log_required = *v;
  if (auto v = get_opt<std::string>(j, "effective_from")) g.effective_from = parse_date(*v);
  return g;
}

struct reading_request {
  int value = 0;
  meal_context context = meal_context::fasting;
  std::optional<timestamp> taken_at;
};

inline reading_request reading_from_json(const json& j) {
  using namespace detail;
  reading_request r{get_int(j, "bg"), get_enum<meal_context>(j, "context"), std::nullopt};
  if (auto at = get_opt<std::string>(j, "taken_at")) r.taken_at = parse_timestamp(*at);
  return r;
}

inline exercise_input exercise_from_json(const json& j) {
  using namespace detail;
  exercise_input in;
  if (auto at = get_opt<std::string>(j, "started_at")) in.started_at = parse_timestamp(*at);
  in.duration_min = get_int(j, "duration_min");
  if (auto v = get_opt<std::int64_t>(j, "steps")) in.steps = *v;
  in.kcal_burned = get_opt<double>(j, "kcal_burned");
  in.bg_before = get_int(j, "bg_before");
  in.bg_after = get_int(j, "bg_after");
  in.context = get_enum<meal_context>(j, "context");
  return in;
}

struct meal_request {
  std::optional<timestamp> eaten_at;
  std::string description;
  std::optional<double> kcal;
  // Alternative to kcal: looked up in the nutrition database.
  std::optional<std::string> food;
  std::optional<double> grams;
};

inline meal_request meal_from_json(const json& j) {
  using namespace detail;
  meal_request m;
  if (auto at = get_opt<std::string>(j, "eaten_at")) m.eaten_at = parse_timestamp(*at);
  m.description = get_opt<std::string>(j, "description").value_or("");
  m.kcal = get_opt<double>(j, "kcal");
  m.food = get_opt<std::string>(j, "food");
  m.grams = get_opt<double>(j, "grams");
  if (!m.kcal && !(m.food && m.grams)) throw validation_error("meal needs either kcal or food and grams");
  return m;
}

inline medication_event medication_from_json(const json& j) {
  using namespace detail;
  medication_event m;
  m.name = get<std::string>(j, "name");
  m.scheduled_at = parse_timestamp(get<std::string>(j, "scheduled_at"));
  if (auto at = get_opt<std::string>(j, "taken_at")) m.taken_at = parse_timestamp(*at);
  return m;
}

inline knowledge_survey survey_from_json(const json& j) {
  knowledge_survey s;
  for (auto a : all_adherence_areas) {
    auto key = std::string(to_string(a));
    if (auto v = detail::get_opt<bool>(j, key.c_str())) s.knows[a] = *v;
  }
  return s;
}

// --- responses ---------------------------------------------------------------

inline json to_json(const user_profile& p) {
  return {{"id", p.id},
          {"nickname", p.nickname},
          {"email", p.email},
          {"age", p.age},
          {"gender", to_string(p.sex)},
          {"height_cm", p.height_cm},
          {"weight_kg", p.weight_kg},
          {"exercise_status", to_string(p.activity)},
          {"registered_at", format_timestamp(p.registered_at)}};
}

inline json to_json(const session_token& t) {
  return {{"token", t.token}, {"user_id", t.user}, {"expires_at", format_timestamp(t.expires_at)}};
}

inline json to_json(const goal_set& g) {
  json times = json::array();
  for (auto t : g.medication_times) times.push_back(format_time_of_day(t));
  return {{"bg_target", {{"low", g.bg.low}, {"high", g.bg.high}}},
          {"daily_steps", g.daily_steps},
          {"daily_kcal_burn", g.daily_kcal_burn},
          {"medication_times", times},
          {"diet_log_required", g.diet_log_required},
          {"effective_from", format_date(g.effective_from)}};
}

inline std::string_view to_string(goal_verdict v) {
  switch (v) {
    case goal_verdict::accepted: return "accepted";
    case goal_verdict::corrected: return "corrected";
    case goal_verdict::invalid: return "invalid";
  }
  return "?";
}

inline json to_json(const goal_validation& v) {
  json j{{"verdict", to_string(v.verdict)}, {"issues", v.issues}};
  j[v.verdict == goal_verdict::accepted ? "goals" : "recommended"] = to_json(v.goal);
  return j;
}

inline json to_json(const recommendation& r) {
  return {{"phase", to_string(r.key.when)},
          {"context", to_string(r.key.context)},
          {"band", to_string(r.key.band)},
          {"action", to_string(r.action)},
          {"message", r.message},
          {"reward_promised", r.reward_promised}};
}

inline json to_json(const reward_entry& e) {
  return {{"user_id", e.user},
          {"earned_at", format_timestamp(e.earned_at)},
          {"points", e.amount},
          {"reason", to_string(e.reason)},
          {"source_ref", e.source_ref}};
}

template <typename Range>
json entries_json(const Range& entries) {
  json a = json::array();
  for (const auto& e : entries) a.push_back(to_json(e));
  return a;
}

inline json to_json(const reading_result& r) {
  return {{"id", r.id},
          {"bg", r.reading.value_mg_dl},
          {"context", to_string(r.reading.context)},
          {"taken_at", format_timestamp(r.reading.taken_at)},
          {"band", to_string(r.band)},
          {"recommendation", to_json(r.advice)},
          {"awarded", entries_json(r.awarded)}};
}

inline json to_json(const exercise_result& r) {
  return {{"id", r.id},
          {"started_at", format_timestamp(r.session.started_at)},
          {"duration_min", r.session.duration_min},
          {"steps", r.session.steps},
          {"kcal_burned", r.session.kcal_burned},
          {"pre_exercise", to_json(r.governing)},
          {"recommendation", to_json(r.feedback)},
          {"awarded", entries_json(r.awarded)}};
}

inline json to_json(const rewards_view& v) { return {{"entries", entries_json(v.entries)}, {"balance", v.balance}}; }

inline json to_json(const daily_log_status& s) {
  json logged, met;
  for (auto a : all_adherence_areas) {
    logged[std::string(to_string(a))] = s.logged[a];
    met[std::string(to_string(a))] = s.goals_met[a];
  }
  return {{"day", format_date(s.day)}, {"logged", logged}, {"goals_met", met}};
}

inline json to_json(const day_close_result& r) {
  return {{"status", to_json(r.status)}, {"awarded", entries_json(r.awarded)}};
}

inline json to_json(const due_reminder& r) { return {{"area", to_string(r.area)}, {"message", r.message}}; }

inline json to_json(const series_bundle& b) {
  json series = json::object();
  for (const auto& [m, buckets] : b.series) {
    json a = json::array();
    for (const auto& k : buckets)
      a.push_back({{"start", format_date(k.days.first)},
                   {"end", format_date(k.days.last)},
                   {"value", k.value ? json(*k.value) : json(nullptr)},
                   {"n", k.n}});
    series[std::string(to_string(m))] = a;
  }
  return {{"user_id", b.user},
          {"granularity", to_string(b.grain)},
          {"from", format_date(b.range.first)},
          {"to", format_date(b.range.last)},
          {"series", series}};
}

inline json to_json(const food_lookup_result& r) {
  json j{{"query", r.record.query},
         {"name", r.record.matched_name},
         {"kcal_per_100g", r.record.kcal_per_100g},
         {"source", to_string(r.record.source)}};
  if (r.warning) j["warning"] = *r.warning;
  return j;
}

inline json to_json(const step_import& s) {
  json rows = json::array(), errors = json::array();
  for (const auto& r : s.rows) rows.push_back({{"date", format_date(r.day)}, {"steps", r.steps}});
  for (const auto& e : s.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  return {{"imported", rows}, {"errors", errors}};
}

inline json error_json(int status, const std::string& message) { return {{"status", status}, {"error", message}}; }

}  // namespace dsm::json_io
