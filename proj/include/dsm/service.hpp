#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dsm/analytics.hpp"
#include "dsm/config.hpp"
#include "dsm/connectors.hpp"
#include "dsm/goals.hpp"
#include "dsm/recommendation.hpp"
#include "dsm/rewards.hpp"
#include "dsm/security.hpp"
#include "dsm/storage.hpp"

namespace dsm {

struct session_token {
  std::string token;
  user_id user = 0;
  timestamp expires_at{};
};

struct reading_result {
  record_id id = 0;
  glucose_reading reading;
  glycemic_band band = glycemic_band::normal;
  recommendation advice;
  std::vector<reward_entry> awarded;
};

struct exercise_input {
  timestamp started_at{};
  int duration_min = 0;
  std::int64_t steps = 0;
  // Derived from steps when absent.
  std::optional<double> kcal_burned;
  int bg_before = 0;
  int bg_after = 0;
  meal_context context = meal_context::fasting;
};

struct exercise_result {
  record_id id = 0;
  exercise_session session;
  recommendation governing;
  recommendation feedback;
  std::vector<reward_entry> awarded;
};

struct day_close_result {
  daily_log_status status;
  std::vector<reward_entry> awarded;
};

struct rewards_view {
  std::vector<reward_entry> entries;
  points balance = 0;
};

struct due_reminder {
  adherence_area area;
  std::string message;
};

// Application layer behind the HTTP API, the replay tool and the device
// listener. Transport-agnostic; every write for one user runs under that
// user's lock, and multi-record writes run in a storage transaction.
class app {
 public:
  using clock_fn = std::function<timestamp()>;

  explicit app(storage& store, service_config config = {}, rule_table rules = default_rule_table(),
               education_catalog education = default_education_catalog(),
               std::optional<nutrition_lookup> nutrition = std::nullopt, clock_fn clock = nullptr)
      : store_(store),
        config_(std::move(config)),
        rules_(std::move(rules)),
        education_(std::move(education)),
        nutrition_(std::move(nutrition)),
        clock_(clock ? std::move(clock) : [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }) {}

  const service_config& config() const noexcept { return config_; }
  const rule_table& rules() const noexcept { return rules_; }
  storage& store() noexcept { return store_; }
  timestamp now() const { return clock_(); }

  // --- accounts --------------------------------------------------------------

  user_id register_user(user_profile profile, const std::string& password) {
    if (password.size() < 6) throw validation_error("password must have at least 6 characters");
    validate_profile(profile);
    if (profile.registered_at == timestamp{}) profile.registered_at = now();
    auto hash = hash_password(password, config_.password_hashing);
    std::lock_guard lock(accounts_mu_);
    return store_.add_user(profile, hash);
  }

  session_token login(const std::string& email, const std::string& password) {
    auto u = store_.find_user_by_email(email);
    if (!u || !verify_password(u->password_hash, password)) throw unauthorized("invalid email or password");
    session_token t{random_token(), u->profile.id, now() + config_.token_ttl};
    std::lock_guard lock(tokens_mu_);
    tokens_[t.token] = t;
    return t;
  }

  user_id authenticate(const std::string& token) const {
    std::lock_guard lock(tokens_mu_);
    auto it = tokens_.find(token);
    if (it == tokens_.end()) throw unauthorized("unknown session token");
    if (it->second.expires_at <= now()) throw unauthorized("session token expired");
    return it->second.user;
  }

  user_profile profile(user_id user) const { return require_user(user).profile; }

  // --- goals & education -----------------------------------------------------

  // Accepted goals are stored; corrections and rejections are only returned.
  goal_validation set_goals(user_id user, goal_set proposed) {
    require_user(user);
    proposed.user = user;
    if (proposed.effective_from == date{}) proposed.effective_from = day_of(now());
    auto lock = lock_user(user);
    auto v = validate_goals(proposed, config_.bounds);
    if (v.verdict == goal_verdict::accepted) store_.put_goals(v.goal);
    return v;
  }

  std::optional<goal_set> goals(user_id user, date day) const { return store_.goals_for(user, day); }

  std::vector<std::pair<education_intervention, std::string>> education(const knowledge_survey& survey) const {
    std::vector<std::pair<education_intervention, std::string>> out;
    for (auto& i : education_gate(survey)) {
      auto it = education_.find(i.content_key);
      if (it == education_.end()) throw not_found("education content missing for " + i.content_key);
      out.emplace_back(i, it->second);
    }
    return out;
  }

  // --- logging ---------------------------------------------------------------

  reading_result add_reading(user_id user, int value, meal_context context, std::optional<timestamp> taken_at = {}) {
    require_user(user);
    glucose_reading r{user, value, context, taken_at.value_or(now())};
    auto band = classify_bg(r, config_.thresholds);
    auto advice = recommend(phase::pre_exercise, r, std::nullopt, rules_, config_.thresholds);

    auto lock = lock_user(user);
    transaction tx(store_);
    date day = day_of(r.taken_at);
    auto before = store_.readings(user, {day, day});
    auto id = store_.add_reading(r);
    std::vector<reward_entry> awarded;
    if (auto g = store_.goals_for(user, day)) {
      auto after = before;
      after.push_back(r);
      auto bonus = in_range_bonus(after, g->bg, config_.schedule) - in_range_bonus(before, g->bg, config_.schedule);
      if (bonus > 0) {
        reward_entry e{user, r.taken_at, bonus, reward_reason::in_range(), "bg:" + std::to_string(id)};
        store_.append_reward(e);
        awarded.push_back(std::move(e));
      }
    }
    tx.commit();
    return {id, r, band, std::move(advice), std::move(awarded)};
  }

  // A repeated non-empty idempotency key throws conflict and changes nothing.
  exercise_result add_exercise(user_id user, const exercise_input& in, const std::string& idempotency_key = {}) {
    require_user(user);
    if (in.duration_min < 0) throw validation_error("duration must be non-negative");
    if (in.steps < 0) throw validation_error("steps must be non-negative");
    if (in.duration_min == 0 && in.steps != 0) throw validation_error("a zero-minute session cannot have steps");
    if (in.kcal_burned && *in.kcal_burned < 0) throw validation_error("kcal burned must be non-negative");

    exercise_session s;
    s.user = user;
    s.started_at = in.started_at == timestamp{} ? now() : in.started_at;
    s.duration_min = in.duration_min;
    s.steps = in.steps;
    s.kcal_burned = in.kcal_burned.value_or(kcal_from_steps(in.steps, config_.kcal_per_step));
    s.bg_before = glucose_reading{user, in.bg_before, in.context, s.started_at};
    s.bg_after = glucose_reading{user, in.bg_after, in.context, s.started_at + std::chrono::minutes{in.duration_min}};

    auto governing = recommend(phase::pre_exercise, *s.bg_before, std::nullopt, rules_, config_.thresholds);
    auto feedback = recommend(phase::post_exercise, *s.bg_after, s, rules_, config_.thresholds);
    auto pts = exercise_points(s, config_.schedule, governing.action);

    auto lock = lock_user(user);
    if (!idempotency_key.empty() && store_.exercise_key_used(user, idempotency_key))
      throw conflict("exercise with idempotency key '" + idempotency_key + "' already recorded");
    transaction tx(store_);
    auto id = store_.add_exercise(s, idempotency_key);
    std::vector<reward_entry> awarded;
    if (pts > 0) {
      auto ref = "exercise:" + (idempotency_key.empty() ? std::to_string(id) : idempotency_key);
      reward_entry e{user, s.bg_after->taken_at, pts, reward_reason::exercise(), ref};
      store_.append_reward(e);
      awarded.push_back(std::move(e));
    }
    tx.commit();
    return {id, std::move(s), std::move(governing), std::move(feedback), std::move(awarded)};
  }

  record_id add_meal(user_id user, meal_record m) {
    require_user(user);
    m.user = user;
    if (m.kcal < 0) throw validation_error("meal kcal must be non-negative");
    if (m.eaten_at == timestamp{}) m.eaten_at = now();
    auto lock = lock_user(user);
    return store_.add_meal(m);
  }

  // Meal calories from the nutrition database: kcal_per_100g scaled by grams.
  std::pair<record_id, food_lookup_result> add_meal_from_food(user_id user, const std::string& food, double grams,
                                                              std::optional<timestamp> eaten_at = {}) {
    if (!(grams > 0)) throw validation_error("serving grams must be positive");
    auto found = lookup_food(food);
    meal_record m{user, eaten_at.value_or(timestamp{}), found.record.matched_name,
                  found.record.kcal_per_100g * grams / 100.0};
    return {add_meal(user, m), std::move(found)};
  }

  food_lookup_result lookup_food(const std::string& query) const {
    if (!nutrition_) throw not_found("no nutrition database configured");
    return nutrition_->lookup_food(query);
  }

  record_id add_medication(user_id user, medication_event m) {
    require_user(user);
    m.user = user;
    if (m.name.empty()) throw validation_error("medication name is required");
    if (m.taken_at && *m.taken_at < m.scheduled_at - std::chrono::hours{24})
      throw validation_error("medication taken more than 24h before it was scheduled");
    auto lock = lock_user(user);
    return store_.add_medication(m);
  }

  // Rows already present with the same count are accepted again; rows that
  // conflict are reported and skipped.
  step_import import_steps(user_id user, step_import parsed) {
    require_user(user);
    auto lock = lock_user(user);
    step_import out{{}, std::move(parsed.errors)};
    for (const auto& row : parsed.rows) {
      try {
        store_.upsert_steps(user, row.day, row.steps);
        out.rows.push_back(row);
      } catch (const conflict& e) {
        out.errors.push_back({0, e.what()});
      }
    }
    return out;
  }

  // --- daily evaluation & rewards ----------------------------------------------

  day_logs logs_for(user_id user, date day) const {
    day_logs logs;
    logs.readings = store_.readings(user, {day, day});
    logs.sessions = store_.exercises(user, {day, day});
    logs.meals = store_.meals(user, {day, day});
    logs.medications = store_.medications(user, {day, day});
    auto steps = store_.tracker_steps(user, {day, day});
    if (auto it = steps.find(day); it != steps.end()) logs.tracker_steps = it->second;
    return logs;
  }

  // Awards the per-area bonuses for a finished day. Closing a day twice throws
  // conflict.
  day_close_result close_day(user_id user, date day) {
    require_user(user);
    auto lock = lock_user(user);
    auto g = store_.goals_for(user, day);
    if (!g) throw validation_error("no goals in effect on " + format_date(day));
    auto status = evaluate_day(user, day, logs_for(user, day), *g, config_.kcal_per_step);
    const std::string ref = "day:" + format_date(day);
    for (auto a : all_adherence_areas)
      if (store_.reward_exists(user, reward_reason::goal(a), ref)) throw conflict(format_date(day) + " already closed");

    transaction tx(store_);
    std::vector<reward_entry> awarded;
    timestamp end_of_day = timestamp{day} + std::chrono::hours{23} + std::chrono::minutes{59} + std::chrono::seconds{59};
    for (auto a : all_adherence_areas) {
      if (!status.goals_met[a]) continue;
      reward_entry e{user, end_of_day, config_.schedule.area_bonus, reward_reason::goal(a), ref};
      store_.append_reward(e);
      awarded.push_back(std::move(e));
    }
    tx.commit();
    return {status, std::move(awarded)};
  }

  rewards_view rewards(user_id user) const {
    require_user(user);
    rewards_view v{store_.rewards(user), 0};
    for (const auto& e : v.entries) v.balance += e.amount;
    return v;
  }

  // --- reminders ---------------------------------------------------------------

  // Areas that went three days without a log and were not reminded in the
  // last three days. Reminders returned here are recorded as sent.
  std::vector<due_reminder> reminders_due(user_id user, date today) {
    auto u = require_user(user);
    auto lock = lock_user(user);
    auto g = store_.goals_for(user, today);
    date since = g ? g->effective_from : day_of(u.profile.registered_at);
    if (since > today) return {};
    date_range window{since, today};

    per_area<std::optional<date>> last_log;
    auto note = [&](adherence_area a, date d) {
      if (!last_log[a] || *last_log[a] < d) last_log[a] = d;
    };
    for (const auto& r : store_.readings(user, window)) note(adherence_area::bg_monitoring, day_of(r.taken_at));
    for (const auto& s : store_.exercises(user, window)) note(adherence_area::exercise, day_of(s.started_at));
    for (const auto& [d, n] : store_.tracker_steps(user, window))
      if (n > 0) note(adherence_area::exercise, d);
    for (const auto& m : store_.meals(user, window)) note(adherence_area::diet, day_of(m.eaten_at));
    for (const auto& m : store_.medications(user, window)) note(adherence_area::medication, day_of(m.scheduled_at));

    per_area<std::optional<date>> last_reminder;
    for (const auto& r : store_.reminders(user))
      if (r.sent_on <= today && (!last_reminder[r.area] || *last_reminder[r.area] < r.sent_on))
        last_reminder[r.area] = r.sent_on;

    std::vector<due_reminder> out;
    for (auto a : all_adherence_areas) {
      if (!reminder_due(last_log[a], last_reminder[a], today, since)) continue;
      store_.add_reminder({user, a, today});
      out.push_back({a, "Nothing logged for " + std::string(to_string(a)) + " in the last " +
                            std::to_string(reminder_interval_days) + " days. Please record today's data."});
    }
    return out;
  }

  // --- analytics -----------------------------------------------------------------

  series_bundle analytics(user_id user, date_range range, granularity g) const {
    require_user(user);
    return dashboard_series(load_history(store_, user, range), range, g, config_.kcal_per_step);
  }

  // Stateless engine query.
  recommendation what_if(phase when, meal_context context, int bg,
                         const std::optional<exercise_session>& session = std::nullopt) const {
    return recommend(when, glucose_reading{0, bg, context, {}}, session, rules_, config_.thresholds);
  }

 private:
  stored_user require_user(user_id user) const {
    auto u = store_.find_user(user);
    if (!u) throw not_found("unknown user " + std::to_string(user));
    return *u;
  }

  std::unique_lock<std::mutex> lock_user(user_id user) {
    std::shared_ptr<std::mutex> m;
    {
      std::lock_guard g(locks_mu_);
      auto& slot = user_locks_[user];
      if (!slot) slot = std::make_shared<std::mutex>();
      m = slot;
    }
    return std::unique_lock(*m);
  }

  storage& store_;
  service_config config_;
  rule_table rules_;
  education_catalog education_;
  std::optional<nutrition_lookup> nutrition_;
  clock_fn clock_;

  std::mutex accounts_mu_;
  mutable std::mutex tokens_mu_;
  std::map<std::string, session_token> tokens_;
  std::mutex locks_mu_;
  std::map<user_id, std::shared_ptr<std::mutex>> user_locks_;
};

}  // namespace dsm
