#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dsm/analytics.hpp"
#include "dsm/goals.hpp"
#include "dsm/rewards.hpp"

namespace dsm {

using record_id = std::int64_t;

struct stored_user {
  user_profile profile;
  std::string password_hash;
};

struct reminder_record {
  user_id user = 0;
  adherence_area area = adherence_area::bg_monitoring;
  date sent_on{};

  friend bool operator==(const reminder_record&, const reminder_record&) = default;
};

// Persistence boundary. Every method is atomic on its own; multi-step writes
// go through a transaction.
class storage {
 public:
  virtual ~storage() = default;

  // Throws conflict when the email is taken. Returns the new id.
  virtual user_id add_user(const user_profile& profile, const std::string& password_hash) = 0;
  virtual std::optional<stored_user> find_user(user_id id) const = 0;
  virtual std::optional<stored_user> find_user_by_email(const std::string& email) const = 0;
  virtual std::vector<user_id> user_ids() const = 0;

  virtual void put_goals(const goal_set& goals) = 0;
  // Latest goals whose effective_from is on or before `day`.
  virtual std::optional<goal_set> goals_for(user_id user, date day) const = 0;

  virtual record_id add_reading(const glucose_reading& r) = 0;
  virtual std::vector<glucose_reading> readings(user_id user, date_range range) const = 0;

  // Throws conflict when `idempotency_key` is non-empty and already used.
  virtual record_id add_exercise(const exercise_session& s, const std::string& idempotency_key) = 0;
  virtual bool exercise_key_used(user_id user, const std::string& idempotency_key) const = 0;
  virtual std::vector<exercise_session> exercises(user_id user, date_range range) const = 0;

  virtual record_id add_meal(const meal_record& m) = 0;
  virtual std::vector<meal_record> meals(user_id user, date_range range) const = 0;

  virtual record_id add_medication(const medication_event& m) = 0;
  virtual std::vector<medication_event> medications(user_id user, date_range range) const = 0;

  // Same count again is a no-op; a different count throws conflict.
  virtual void upsert_steps(user_id user, date day, std::int64_t steps) = 0;
  virtual std::map<date, std::int64_t> tracker_steps(user_id user, date_range range) const = 0;

  // Throws conflict on a repeated (user, reason, source_ref).
  virtual void append_reward(const reward_entry& e) = 0;
  virtual bool reward_exists(user_id user, const reward_reason& reason, const std::string& source_ref) const = 0;
  virtual std::vector<reward_entry> rewards(user_id user) const = 0;
  // Sum of the user's points computed by the store itself.
  virtual points audit_balance(user_id user) const = 0;

  virtual void add_reminder(const reminder_record& r) = 0;
  virtual std::vector<reminder_record> reminders(user_id user) const = 0;

  virtual void begin() = 0;
  virtual void commit() = 0;
  virtual void rollback() = 0;
};

// Commits on commit(), rolls back if destroyed first.
class transaction {
 public:
  explicit transaction(storage& s) : s_(s) { s_.begin(); }
  transaction(const transaction&) = delete;
  transaction& operator=(const transaction&) = delete;
  ~transaction() {
    if (!done_) {
      try {
        s_.rollback();
      } catch (...) {
      }
    }
  }

  void commit() {
    s_.commit();
    done_ = true;
  }

 private:
  storage& s_;
  bool done_ = false;
};

inline date_range all_time() {
  return {date{std::chrono::year{1970} / 1 / 1}, date{std::chrono::year{9999} / 12 / 31}};
}

inline user_history load_history(const storage& s, user_id user, date_range range = all_time()) {
  user_history h;
  h.user = user;
  h.readings = s.readings(user, range);
  h.sessions = s.exercises(user, range);
  h.meals = s.meals(user, range);
  for (auto& e : s.rewards(user))
    if (range.contains(day_of(e.earned_at))) h.rewards.push_back(std::move(e));
  h.tracker_steps = s.tracker_steps(user, range);
  return h;
}

// --- in-memory ---------------------------------------------------------------

class memory_storage final : public storage {
 public:
  user_id add_user(const user_profile& profile, const std::string& password_hash) override {
    std::lock_guard lock(mu_);
    for (const auto& u : st_.users)
      if (u.profile.email == profile.email) throw conflict("email already registered");
    stored_user u{profile, password_hash};
    u.profile.id = static_cast<user_id>(st_.users.size() + 1);
    st_.users.push_back(u);
    return u.profile.id;
  }

  std::optional<stored_user> find_user(user_id id) const override {
    std::lock_guard lock(mu_);
    if (id < 1 || id > static_cast<user_id>(st_.users.size())) return std::nullopt;
    return st_.users[static_cast<std::size_t>(id - 1)];
  }

  std::optional<stored_user> find_user_by_email(const std::string& email) const override {
    std::lock_guard lock(mu_);
    for (const auto& u : st_.users)
      if (u.profile.email == email) return u;
    return std::nullopt;
  }

  std::vector<user_id> user_ids() const override {
    std::lock_guard lock(mu_);
    std::vector<user_id> out;
    for (const auto& u : st_.users) out.push_back(u.profile.id);
    return out;
  }

  void put_goals(const goal_set& goals) override {
    std::lock_guard lock(mu_);
    require_user(goals.user);
    st_.goals.push_back(goals);
  }

  std::optional<goal_set> goals_for(user_id user, date day) const override {
    std::lock_guard lock(mu_);
    std::optional<goal_set> best;
    // Later writes win among equal effective dates.
    for (const auto& g : st_.goals)
      if (g.user == user && g.effective_from <= day && (!best || g.effective_from >= best->effective_from)) best = g;
    return best;
  }

  record_id add_reading(const glucose_reading& r) override {
    std::lock_guard lock(mu_);
    require_user(r.user);
    st_.readings.push_back(r);
    return static_cast<record_id>(st_.readings.size());
  }

  std::vector<glucose_reading> readings(user_id user, date_range range) const override {
    std::lock_guard lock(mu_);
    return select(st_.readings, user, range, [](const auto& r) { return r.taken_at; });
  }

  record_id add_exercise(const exercise_session& s, const std::string& key) override {
    std::lock_guard lock(mu_);
    require_user(s.user);
    if (!key.empty() && !st_.exercise_keys.insert({s.user, key}).second)
      throw conflict("exercise with idempotency key '" + key + "' already recorded");
    st_.sessions.push_back(s);
    return static_cast<record_id>(st_.sessions.size());
  }

  bool exercise_key_used(user_id user, const std::string& key) const override {
    std::lock_guard lock(mu_);
    return st_.exercise_keys.count({user, key}) > 0;
  }

  std::vector<exercise_session> exercises(user_id user, date_range range) const override {
    std::lock_guard lock(mu_);
    return select(st_.sessions, user, range, [](const auto& s) { return s.started_at; });
  }

  record_id add_meal(const meal_record& m) override {
    std::lock_guard lock(mu_);
    require_user(m.user);
    st_.meals.push_back(m);
    return static_cast<record_id>(st_.meals.size());
  }

  std::vector<meal_record> meals(user_id user, date_range range) const override {
    std::lock_guard lock(mu_);
    return select(st_.meals, user, range, [](const auto& m) { return m.eaten_at; });
  }

  record_id add_medication(const medication_event& m) override {
    std::lock_guard lock(mu_);
    require_user(m.user);
    st_.medications.push_back(m);
    return static_cast<record_id>(st_.medications.size());
  }

  std::vector<medication_event> medications(user_id user, date_range range) const override {
    std::lock_guard lock(mu_);
    return select(st_.medications, user, range, [](const auto& m) { return m.scheduled_at; });
  }

  void upsert_steps(user_id user, date day, std::int64_t steps) override {
    std::lock_guard lock(mu_);
    require_user(user);
    auto [it, inserted] = st_.steps.emplace(std::make_pair(user, day), steps);
    if (!inserted && it->second != steps)
      throw conflict("conflicting step count for " + format_date(day));
  }

  std::map<date, std::int64_t> tracker_steps(user_id user, date_range range) const override {
    std::lock_guard lock(mu_);
    std::map<date, std::int64_t> out;
    for (const auto& [k, v] : st_.steps)
      if (k.first == user && range.contains(k.second)) out[k.second] = v;
    return out;
  }

  void append_reward(const reward_entry& e) override {
    std::lock_guard lock(mu_);
    require_user(e.user);
    st_.ledger.append(e);
  }

  bool reward_exists(user_id user, const reward_reason& reason, const std::string& source_ref) const override {
    std::lock_guard lock(mu_);
    return st_.ledger.contains(user, reason, source_ref);
  }

  std::vector<reward_entry> rewards(user_id user) const override {
    std::lock_guard lock(mu_);
    return st_.ledger.entries_for(user);
  }

  points audit_balance(user_id user) const override {
    std::lock_guard lock(mu_);
    return st_.ledger.balance(user);
  }

  void add_reminder(const reminder_record& r) override {
    std::lock_guard lock(mu_);
    require_user(r.user);
    st_.reminders.push_back(r);
  }

  std::vector<reminder_record> reminders(user_id user) const override {
    std::lock_guard lock(mu_);
    std::vector<reminder_record> out;
    for (const auto& r : st_.reminders)
      if (r.user == user) out.push_back(r);
    return out;
  }

  // Single-level. The store stays locked to other threads until commit or
  // rollback; rollback restores the snapshot taken at begin().
  void begin() override {
    mu_.lock();
    snapshot_ = st_;
  }
  void commit() override {
    snapshot_.reset();
    mu_.unlock();
  }
  void rollback() override {
    if (snapshot_) st_ = std::move(*snapshot_);
    snapshot_.reset();
    mu_.unlock();
  }

 private:
  struct state {
    std::vector<stored_user> users;
    std::vector<goal_set> goals;
    std::vector<glucose_reading> readings;
    std::vector<exercise_session> sessions;
    std::set<std::pair<user_id, std::string>> exercise_keys;
    std::vector<meal_record> meals;
    std::vector<medication_event> medications;
    std::map<std::pair<user_id, date>, std::int64_t> steps;
    reward_ledger ledger;
    std::vector<reminder_record> reminders;
  };

  void require_user(user_id id) const {
    if (id < 1 || id > static_cast<user_id>(st_.users.size()))
      throw not_found("unknown user " + std::to_string(id));
  }

  // Records of `user` inside `range`, ordered by time then insertion.
  template <typename T, typename When>
  static std::vector<T> select(const std::vector<T>& all, user_id user, date_range range, When when) {
    std::vector<T> out;
    for (const auto& x : all)
      if (x.user == user && range.contains(day_of(when(x)))) out.push_back(x);
    std::stable_sort(out.begin(), out.end(), [&](const T& a, const T& b) { return when(a) < when(b); });
    return out;
  }

  mutable std::recursive_mutex mu_;
  state st_;
  std::optional<state> snapshot_;
};

}  // namespace dsm
